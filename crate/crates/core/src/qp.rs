//! Dense convex quadratic programming with linear equalities, linear
//! inequalities and convex quadratic inequality constraints.
//!
//! Equalities are eliminated through a nullspace basis, then a log-barrier
//! interior-point scheme handles the inequalities: a phase-I pass maximizes
//! the worst-constraint margin to find a strictly feasible start (its optimum
//! doubles as an infeasibility certificate), and phase II follows the central
//! path. Problems here are small (tens to a few hundred variables), so all
//! linear algebra is dense.
//!
//! Callers must supply a bounded feasible set (box the decision variables);
//! unbounded directions are caught only by a coarse internal guard.

use nalgebra::{DMatrix, DVector};

/// Convex quadratic constraint `0.5 z' Q z + a' z <= r` (`Q` PSD, possibly 0).
#[derive(Debug, Clone)]
pub struct QuadConstraint {
    pub q: DMatrix<f64>,
    pub a: DVector<f64>,
    pub rhs: f64,
}

/// `min 0.5 z' H z + g' z + c`  s.t.  `A z = b`, `G z <= h`, quad constraints.
#[derive(Debug, Clone)]
pub struct DenseProgram {
    pub hessian: DMatrix<f64>,
    pub gradient: DVector<f64>,
    pub constant: f64,
    pub eq: Option<(DMatrix<f64>, DVector<f64>)>,
    pub ineq: Option<(DMatrix<f64>, DVector<f64>)>,
    pub quad: Vec<QuadConstraint>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub complementarity: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub z: DVector<f64>,
    pub value: f64,
    pub duals_ineq: DVector<f64>,
    pub duals_quad: Vec<f64>,
    pub duals_eq: DVector<f64>,
    pub kkt: KktResiduals,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Optimal(Solution),
    /// No feasible point; `margin` is the best achieved worst-constraint
    /// violation (positive) or the equality-system residual.
    Infeasible { margin: f64 },
    MaxIterations(Solution),
}

impl SolveOutcome {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            SolveOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, SolveOutcome::Infeasible { .. })
    }
}

const GAP_TOL: f64 = 1e-10;
const NEWTON_TOL: f64 = 1e-13;
const MAX_NEWTON_INNER: usize = 80;
const MAX_NEWTON_TOTAL: usize = 4000;
const BARRIER_MU: f64 = 20.0;
const PHASE1_GUARD: f64 = 1e8;
const EQ_RESIDUAL_TOL: f64 = 1e-8;

/// Nullspace-based handling of `A z = b`, reusable across right-hand sides.
pub struct EqualityBasis {
    /// Columns span the nullspace of `A`; empty matrix when `A` has full
    /// column rank (fully determined system).
    pub basis: DMatrix<f64>,
    svd: Option<(DMatrix<f64>, nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
    dim: usize,
}

impl EqualityBasis {
    pub fn new(a: Option<&DMatrix<f64>>, dim: usize) -> Self {
        match a {
            None => Self { basis: DMatrix::identity(dim, dim), svd: None, dim },
            Some(a) => {
                // Pad with zero rows so the thin SVD still exposes the full
                // right singular basis (and with it the nullspace).
                let padded = if a.nrows() < dim {
                    let mut p = DMatrix::zeros(dim, dim);
                    p.view_mut((0, 0), (a.nrows(), dim)).copy_from(a);
                    p
                } else {
                    a.clone()
                };
                let svd = padded.svd(true, true);
                let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
                let tol = 1e-12 * max_sv.max(1.0);
                let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
                let v_t = svd.v_t.as_ref().expect("svd with v requested");
                let mut basis = DMatrix::zeros(dim, dim - rank);
                for (col, row) in (rank..dim).enumerate() {
                    for i in 0..dim {
                        basis[(i, col)] = v_t[(row, i)];
                    }
                }
                Self { basis, svd: Some((a.clone(), svd)), dim }
            }
        }
    }

    /// Minimum-norm particular solution of `A z = b`, with its residual.
    pub fn particular(&self, b: Option<&DVector<f64>>) -> (DVector<f64>, f64) {
        match (&self.svd, b) {
            (Some((a, svd)), Some(b)) => {
                let padded_b = if b.len() < self.dim {
                    let mut p = DVector::zeros(self.dim);
                    p.rows_mut(0, b.len()).copy_from(b);
                    p
                } else {
                    b.clone()
                };
                let zp =
                    svd.solve(&padded_b, 1e-12).unwrap_or_else(|_| DVector::zeros(self.dim));
                let res = (a * &zp - b).amax();
                (zp, res)
            }
            _ => (DVector::zeros(self.dim), 0.0),
        }
    }
}

/// Smooth constraint in reduced coordinates: `0.5 y' Q y + a' y + r <= 0`.
#[derive(Clone)]
struct Smooth {
    q: Option<DMatrix<f64>>,
    a: DVector<f64>,
    r: f64,
}

impl Smooth {
    fn eval(&self, y: &DVector<f64>) -> f64 {
        let mut v = self.a.dot(y) + self.r;
        if let Some(q) = &self.q {
            v += 0.5 * (y.transpose() * q * y)[(0, 0)];
        }
        v
    }

    fn grad(&self, y: &DVector<f64>) -> DVector<f64> {
        match &self.q {
            Some(q) => q * y + &self.a,
            None => self.a.clone(),
        }
    }
}

pub fn solve(prog: &DenseProgram) -> SolveOutcome {
    let dim = prog.gradient.len();
    let eqb = EqualityBasis::new(prog.eq.as_ref().map(|(a, _)| a), dim);
    solve_with_basis(prog, &eqb)
}

/// Solve with a precomputed equality nullspace (the basis only depends on the
/// equality matrix, so receding-horizon callers reuse it across states).
pub fn solve_with_basis(prog: &DenseProgram, eqb: &EqualityBasis) -> SolveOutcome {
    let (zp, eq_res) = eqb.particular(prog.eq.as_ref().map(|(_, b)| b));
    let scale = prog
        .eq
        .as_ref()
        .map(|(_, b)| b.amax())
        .unwrap_or(0.0)
        .max(1.0);
    if eq_res > EQ_RESIDUAL_TOL * scale {
        return SolveOutcome::Infeasible { margin: eq_res };
    }
    let z = &eqb.basis;
    let k = z.ncols();

    // Reduced objective 0.5 y' Ht y + gt' y (+ ct).
    let hz = &prog.hessian * z;
    let ht = z.transpose() * &hz;
    let gt = z.transpose() * (&prog.hessian * &zp + &prog.gradient);
    let ct = prog.constant
        + 0.5 * (zp.transpose() * &prog.hessian * &zp)[(0, 0)]
        + prog.gradient.dot(&zp);

    // Reduced constraints.
    let mut cons: Vec<Smooth> = Vec::new();
    if let Some((g, h)) = &prog.ineq {
        let gz = g * z;
        let gzp = g * &zp;
        for i in 0..g.nrows() {
            cons.push(Smooth {
                q: None,
                a: gz.row(i).transpose(),
                r: gzp[i] - h[i],
            });
        }
    }
    let n_lin = cons.len();
    for qc in &prog.quad {
        let qz = &qc.q * z;
        let qred = z.transpose() * &qz;
        let a = z.transpose() * (&qc.q * &zp + &qc.a);
        let r = 0.5 * (zp.transpose() * &qc.q * &zp)[(0, 0)] + qc.a.dot(&zp) - qc.rhs;
        cons.push(Smooth { q: Some(qred), a, r });
    }

    let unwrap_solution = |y: &DVector<f64>,
                           duals: &[f64],
                           gap: f64,
                           steps: usize| {
        let zfull = &zp + z * y;
        let value = 0.5 * (y.transpose() * &ht * y)[(0, 0)] + gt.dot(y) + ct;
        let mut duals_ineq = DVector::zeros(n_lin);
        for i in 0..n_lin {
            duals_ineq[i] = duals[i];
        }
        let duals_quad: Vec<f64> = duals[n_lin..].to_vec();
        finish_solution(prog, zfull, value, duals_ineq, duals_quad, gap, steps)
    };

    if k == 0 {
        // Fully determined by equalities.
        let y = DVector::zeros(0);
        let viol = cons.iter().map(|c| c.eval(&y)).fold(0.0, f64::max);
        if viol > 1e-9 * scale {
            return SolveOutcome::Infeasible { margin: viol };
        }
        return SolveOutcome::Optimal(unwrap_solution(&y, &vec![0.0; cons.len()], 0.0, 0));
    }

    // Fast path: unconstrained minimizer of the reduced problem, accepted if
    // it satisfies every inequality.
    if let Some(chol) = regularized_cholesky(&ht) {
        let y = chol.solve(&(-&gt));
        if cons.iter().all(|c| c.eval(&y) <= 1e-12 * scale.max(y.amax())) {
            return SolveOutcome::Optimal(unwrap_solution(
                &y,
                &vec![0.0; cons.len()],
                0.0,
                0,
            ));
        }
    }

    if cons.is_empty() {
        // Unconstrained but singular Hessian: least-squares stationary point.
        let y = ht.clone().svd(true, true).solve(&(-&gt), 1e-12).unwrap_or(DVector::zeros(k));
        return SolveOutcome::Optimal(unwrap_solution(&y, &[], 0.0, 0));
    }

    // Phase I: minimize s subject to g_i(y) <= s (plus a coarse box guard).
    let mut y = DVector::zeros(k);
    let (feasible, y1, margin, steps1) = phase_one(&cons, &y);
    if !feasible {
        return SolveOutcome::Infeasible { margin };
    }
    y = y1;

    // Phase II: central path on t*f + barrier.
    let mut total_steps = steps1;
    let m = cons.len() as f64;
    let f0 = (0.5 * (y.transpose() * &ht * &y)[(0, 0)] + gt.dot(&y) + ct).abs();
    let mut t = (m / f0.max(1.0)).max(1.0);
    let mut duals = vec![0.0; cons.len()];
    loop {
        let (y_new, steps, ok) = newton_centering(&ht, &gt, &cons, &y, t);
        total_steps += steps;
        y = y_new;
        for (i, c) in cons.iter().enumerate() {
            duals[i] = 1.0 / (t * (-c.eval(&y)).max(1e-300));
        }
        let fcur = 0.5 * (y.transpose() * &ht * &y)[(0, 0)] + gt.dot(&y) + ct;
        let gap = m / t;
        if gap <= GAP_TOL * fcur.abs().max(1.0) {
            return SolveOutcome::Optimal(unwrap_solution(&y, &duals, gap, total_steps));
        }
        if total_steps > MAX_NEWTON_TOTAL || !ok {
            return SolveOutcome::MaxIterations(unwrap_solution(&y, &duals, gap, total_steps));
        }
        t *= BARRIER_MU;
    }
}

/// Maximize the worst-constraint margin to find a strictly feasible point.
/// Returns (found, point, best max-violation, newton steps).
fn phase_one(cons: &[Smooth], y0: &DVector<f64>) -> (bool, DVector<f64>, f64, usize) {
    let k = y0.len();
    let max_g = |y: &DVector<f64>| cons.iter().map(|c| c.eval(y)).fold(f64::NEG_INFINITY, f64::max);
    let g0 = max_g(y0);
    if g0 < -1e-9 {
        return (true, y0.clone(), g0, 0);
    }
    // Extended variable w = (y, s).
    let mut w = DVector::zeros(k + 1);
    for i in 0..k {
        w[i] = y0[i];
    }
    w[k] = g0 + g0.abs().max(1.0);
    let mut t = 1.0;
    let mut total = 0usize;
    let mut best = g0;
    let eval_slack = |w: &DVector<f64>, c: &Smooth| {
        let y = w.rows(0, k).into_owned();
        w[k] - c.eval(&y)
    };
    for _outer in 0..60 {
        // Newton on t*s - sum log(s - g_i(y)) - guards.
        let mut inner_ok = false;
        for _ in 0..MAX_NEWTON_INNER {
            total += 1;
            let y = w.rows(0, k).into_owned();
            let mut grad = DVector::zeros(k + 1);
            grad[k] = t;
            let mut hess = DMatrix::zeros(k + 1, k + 1);
            for c in cons {
                let s = eval_slack(&w, c);
                let d = 1.0 / s;
                let gc = c.grad(&y);
                // d/dw of (s - g): (-grad g, 1)
                let mut e = DVector::zeros(k + 1);
                for i in 0..k {
                    e[i] = -gc[i];
                }
                e[k] = 1.0;
                grad.axpy(-d, &e, 1.0);
                hess.ger(d * d, &e, &e, 1.0);
                if let Some(q) = &c.q {
                    for i in 0..k {
                        for j in 0..k {
                            hess[(i, j)] += d * q[(i, j)];
                        }
                    }
                }
            }
            // Box guard on all coordinates.
            for i in 0..=k {
                let lo = PHASE1_GUARD + w[i];
                let hi = PHASE1_GUARD - w[i];
                grad[i] += 1.0 / hi - 1.0 / lo;
                hess[(i, i)] += 1.0 / (hi * hi) + 1.0 / (lo * lo);
            }
            let step = match regularized_cholesky(&hess) {
                Some(ch) => ch.solve(&(-&grad)),
                None => break,
            };
            let decrement = -grad.dot(&step);
            if decrement <= NEWTON_TOL {
                inner_ok = true;
                break;
            }
            let mut alpha = 1.0;
            loop {
                let cand = &w + alpha * &step;
                let strict = cons.iter().all(|c| eval_slack(&cand, c) > 0.0)
                    && cand.amax() < PHASE1_GUARD;
                if strict {
                    w = cand;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-14 {
                    break;
                }
            }
            let ycur = w.rows(0, k).into_owned();
            let cur = max_g(&ycur);
            best = best.min(cur);
            if cur < -1e-9 {
                return (true, ycur, cur, total);
            }
            if alpha < 1e-14 {
                break;
            }
        }
        let ycur = w.rows(0, k).into_owned();
        let cur = max_g(&ycur);
        if cur < -1e-9 {
            return (true, ycur, cur, total);
        }
        if cons.len() as f64 / t < 1e-12 * best.abs().max(1e-6) || (!inner_ok && t > 1e10) {
            break;
        }
        t *= BARRIER_MU;
    }
    let ycur = w.rows(0, k).into_owned();
    let cur = max_g(&ycur);
    (cur < -1e-9, ycur, cur.min(best), total)
}

fn newton_centering(
    ht: &DMatrix<f64>,
    gt: &DVector<f64>,
    cons: &[Smooth],
    y0: &DVector<f64>,
    t: f64,
) -> (DVector<f64>, usize, bool) {
    let k = y0.len();
    let mut y = y0.clone();
    let mut steps = 0usize;
    for _ in 0..MAX_NEWTON_INNER {
        steps += 1;
        let mut grad = t * (ht * &y + gt);
        let mut hess = t * ht.clone();
        for c in cons {
            let s = -c.eval(&y);
            let d = 1.0 / s;
            let gc = c.grad(&y);
            grad.axpy(d, &gc, 1.0);
            hess.ger(d * d, &gc, &gc, 1.0);
            if let Some(q) = &c.q {
                for i in 0..k {
                    for j in 0..k {
                        hess[(i, j)] += d * q[(i, j)];
                    }
                }
            }
        }
        let step = match regularized_cholesky(&hess) {
            Some(ch) => ch.solve(&(-&grad)),
            None => return (y, steps, false),
        };
        let decrement = -grad.dot(&step);
        if decrement <= NEWTON_TOL {
            return (y, steps, true);
        }
        // Backtrack to strict feasibility, then Armijo on the barrier value.
        let barrier = |y: &DVector<f64>| -> Option<f64> {
            let mut v = t * (0.5 * (y.transpose() * ht * y)[(0, 0)] + gt.dot(y));
            for c in cons {
                let s = -c.eval(y);
                if s <= 0.0 {
                    return None;
                }
                v -= s.ln();
            }
            Some(v)
        };
        let base = barrier(&y).expect("current iterate strictly feasible");
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha >= 1e-14 {
            let cand = &y + alpha * &step;
            if let Some(v) = barrier(&cand) {
                if v <= base - 0.25 * alpha * decrement {
                    y = cand;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            return (y, steps, true);
        }
    }
    (y, steps, true)
}

fn regularized_cholesky(m: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    if n == 0 {
        return nalgebra::Cholesky::new(m.clone());
    }
    let scale = m.diagonal().amax().max(1.0);
    let mut jitter = 0.0;
    for _ in 0..8 {
        let mut trial = m.clone();
        if jitter > 0.0 {
            for i in 0..n {
                trial[(i, i)] += jitter;
            }
        }
        if let Some(ch) = nalgebra::Cholesky::new(trial) {
            return Some(ch);
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
    }
    None
}

fn finish_solution(
    prog: &DenseProgram,
    z: DVector<f64>,
    value: f64,
    duals_ineq: DVector<f64>,
    duals_quad: Vec<f64>,
    gap: f64,
    steps: usize,
) -> Solution {
    // Stationarity residual with equality duals fitted by least squares.
    let mut r = &prog.hessian * &z + &prog.gradient;
    if let Some((g, _)) = &prog.ineq {
        r += g.transpose() * &duals_ineq;
    }
    for (qc, &mu) in prog.quad.iter().zip(&duals_quad) {
        r += mu * (&qc.q * &z + &qc.a);
    }
    let duals_eq = match &prog.eq {
        Some((a, _)) => {
            let at = a.transpose();
            let nu = at.clone().svd(true, true).solve(&(-&r), 1e-12).unwrap_or_else(|_| {
                DVector::zeros(a.nrows())
            });
            r += &at * &nu;
            nu
        }
        None => DVector::zeros(0),
    };
    let mut primal: f64 = 0.0;
    if let Some((a, b)) = &prog.eq {
        primal = primal.max((a * &z - b).amax());
    }
    if let Some((g, h)) = &prog.ineq {
        let s = g * &z - h;
        primal = primal.max(s.iter().cloned().fold(0.0, f64::max));
    }
    for qc in &prog.quad {
        let v = 0.5 * (z.transpose() * &qc.q * &z)[(0, 0)] + qc.a.dot(&z) - qc.rhs;
        primal = primal.max(v.max(0.0));
    }
    let scale = prog.gradient.amax().max(1.0);
    Solution {
        z,
        value,
        duals_ineq,
        duals_quad,
        duals_eq,
        kkt: KktResiduals {
            stationarity: r.amax() / scale,
            primal,
            complementarity: gap,
        },
        newton_steps: steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unconstrained(h: &[f64], g: &[f64], n: usize) -> DenseProgram {
        DenseProgram {
            hessian: DMatrix::from_row_slice(n, n, h),
            gradient: DVector::from_row_slice(g),
            constant: 0.0,
            eq: None,
            ineq: None,
            quad: Vec::new(),
        }
    }

    #[test]
    fn unconstrained_quadratic() {
        // min x^2 + y^2 - 2x  => x = 1, y = 0, value -1.
        let p = unconstrained(&[2.0, 0.0, 0.0, 2.0], &[-2.0, 0.0], 2);
        let s = solve(&p).optimal().unwrap();
        assert_abs_diff_eq!(s.z[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.z[1], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.value, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn equality_constrained_matches_kkt() {
        // min x^2 + y^2 s.t. x + y = 2 => (1, 1).
        let mut p = unconstrained(&[2.0, 0.0, 0.0, 2.0], &[0.0, 0.0], 2);
        p.eq = Some((
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_row_slice(&[2.0]),
        ));
        let s = solve(&p).optimal().unwrap();
        assert_abs_diff_eq!(s.z[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.z[1], 1.0, epsilon = 1e-10);
        assert!(s.kkt.stationarity < 1e-8);
    }

    #[test]
    fn active_linear_inequality() {
        // min (x-2)^2 s.t. x <= 1 => x = 1, dual 2.
        let mut p = unconstrained(&[2.0], &[-4.0], 1);
        p.constant = 4.0;
        p.ineq = Some((
            DMatrix::from_row_slice(1, 1, &[1.0]),
            DVector::from_row_slice(&[1.0]),
        ));
        let s = solve(&p).optimal().unwrap();
        assert_abs_diff_eq!(s.z[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(s.duals_ineq[0], 2.0, epsilon = 1e-5);
    }

    #[test]
    fn inactive_constraints_take_fast_path() {
        let mut p = unconstrained(&[2.0, 0.0, 0.0, 2.0], &[-2.0, 0.0], 2);
        p.ineq = Some((
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            DVector::from_row_slice(&[10.0, 10.0]),
        ));
        let s = solve(&p).optimal().unwrap();
        assert_eq!(s.newton_steps, 0);
        assert_abs_diff_eq!(s.z[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_box_detected() {
        // x <= -1 and x >= 1.
        let mut p = unconstrained(&[2.0], &[0.0], 1);
        p.ineq = Some((
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            DVector::from_row_slice(&[-1.0, -1.0]),
        ));
        match solve(&p) {
            SolveOutcome::Infeasible { margin } => assert!(margin > 0.5),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_equalities_detected() {
        let mut p = unconstrained(&[2.0], &[0.0], 1);
        p.eq = Some((
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            DVector::from_row_slice(&[0.0, 1.0]),
        ));
        assert!(solve(&p).is_infeasible());
    }

    #[test]
    fn quadratic_constraint_active() {
        // min (x-3)^2 + y^2 s.t. x^2 + y^2 <= 1 => x = 1, y = 0, value 4.
        let mut p = unconstrained(&[2.0, 0.0, 0.0, 2.0], &[-6.0, 0.0], 2);
        p.constant = 9.0;
        p.quad.push(QuadConstraint {
            q: DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]),
            a: DVector::zeros(2),
            rhs: 1.0,
        });
        let s = solve(&p).optimal().unwrap();
        assert_abs_diff_eq!(s.z[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.z[1], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.value, 4.0, epsilon = 1e-5);
    }

    #[test]
    fn linear_program_on_polytope() {
        // min -x - y s.t. 0 <= x,y <= 1 => (1,1), value -2.
        let mut p = unconstrained(&[0.0, 0.0, 0.0, 0.0], &[-1.0, -1.0], 2);
        p.ineq = Some((
            DMatrix::from_row_slice(
                4,
                2,
                &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0],
            ),
            DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0]),
        ));
        let s = solve(&p).optimal().unwrap();
        assert_abs_diff_eq!(s.value, -2.0, epsilon = 1e-7);
    }

    #[test]
    fn kkt_residuals_reported_small() {
        let mut p = unconstrained(&[2.0, 0.4, 0.4, 2.0], &[1.0, -3.0], 2);
        p.eq = Some((
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            DVector::from_row_slice(&[0.25]),
        ));
        p.ineq = Some((
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            DVector::from_row_slice(&[0.3, 0.3]),
        ));
        let s = solve(&p).optimal().unwrap();
        assert!(s.kkt.stationarity < 1e-6, "stationarity {}", s.kkt.stationarity);
        assert!(s.kkt.primal < 1e-9);
        assert!(s.kkt.complementarity < 1e-8);
    }
}
