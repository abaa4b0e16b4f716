//! Finite, time-homogeneous Markov chains driving the switching system.
//!
//! A chain is validated at construction: rows must be stochastic and the
//! positive-entry digraph must be irreducible and aperiodic. Structural
//! properties (cover sets, bet nodes) and the stationary distribution are
//! derived from the validated matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Entries below this magnitude are treated as structural zeros when the
/// transition digraph is built, so that floating-point dust cannot create
/// spurious edges.
pub const ZERO_ENTRY_TOL: f64 = 1e-14;

/// Row sums and the initial distribution must be stochastic to this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Residual tolerance for the stationary distribution fixed point.
pub const STATIONARY_TOL: f64 = 1e-10;

const POWER_ITERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("transition matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("chain must have at least one mode")]
    Empty,
    #[error("initial distribution has length {got}, expected {expected}")]
    InitialLength { got: usize, expected: usize },
    #[error("invalid chain: {0}")]
    Invalid(ChainDiagnosis),
    #[error("stationary distribution did not converge within {0} iterations")]
    StationaryDidNotConverge(usize),
}

/// Outcome of the structural validity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChainDiagnosis {
    Valid,
    /// A row or the initial distribution is not a probability vector.
    NotStochastic { description: String },
    /// The positive-entry digraph is not strongly connected.
    Reducible { unreachable_from: usize },
    /// The chain has period > 1.
    Periodic { period: usize },
}

impl std::fmt::Display for ChainDiagnosis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChainDiagnosis::Valid => write!(f, "valid"),
            ChainDiagnosis::NotStochastic { description } => {
                write!(f, "not stochastic: {description}")
            }
            ChainDiagnosis::Reducible { unreachable_from } => write!(
                f,
                "reducible: some mode is unreachable from mode {unreachable_from} (0-based)"
            ),
            ChainDiagnosis::Periodic { period } => write!(f, "periodic with period {period}"),
        }
    }
}

/// Irreducible aperiodic Markov chain on modes `0..num_modes()`.
///
/// Immutable after construction; shared freely across simulation workers.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    transition: DMatrix<f64>,
    initial: DVector<f64>,
}

/// Probability vector `pi` with `pi * P = pi`.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub pi: DVector<f64>,
}

impl MarkovChain {
    /// Validates and builds a chain. Fails on non-stochastic, reducible or
    /// periodic matrices.
    pub fn new(transition: DMatrix<f64>, initial: DVector<f64>) -> Result<Self, ChainError> {
        if transition.nrows() != transition.ncols() {
            return Err(ChainError::NotSquare {
                rows: transition.nrows(),
                cols: transition.ncols(),
            });
        }
        if transition.nrows() == 0 {
            return Err(ChainError::Empty);
        }
        if initial.len() != transition.nrows() {
            return Err(ChainError::InitialLength {
                got: initial.len(),
                expected: transition.nrows(),
            });
        }
        if let Some(desc) = probability_vector_defect(initial.as_slice()) {
            return Err(ChainError::Invalid(ChainDiagnosis::NotStochastic {
                description: format!("initial distribution {desc}"),
            }));
        }
        match diagnose(&transition) {
            ChainDiagnosis::Valid => Ok(Self { transition, initial }),
            other => Err(ChainError::Invalid(other)),
        }
    }

    /// Builds a chain with the uniform initial distribution.
    pub fn with_uniform_initial(transition: DMatrix<f64>) -> Result<Self, ChainError> {
        let n = transition.nrows();
        let initial = DVector::from_element(n, 1.0 / n as f64);
        Self::new(transition, initial)
    }

    /// Builds a chain whose rows are stochastic but which may be reducible or
    /// periodic. Structural operations (cover, bet node, tree unrolling,
    /// sampling) remain well defined on such chains; the stationary
    /// distribution does not. Prefer [`MarkovChain::new`].
    pub fn new_unvalidated(
        transition: DMatrix<f64>,
        initial: DVector<f64>,
    ) -> Result<Self, ChainError> {
        if transition.nrows() != transition.ncols() {
            return Err(ChainError::NotSquare {
                rows: transition.nrows(),
                cols: transition.ncols(),
            });
        }
        if transition.nrows() == 0 {
            return Err(ChainError::Empty);
        }
        if let ChainDiagnosis::NotStochastic { description } = diagnose(&transition) {
            return Err(ChainError::Invalid(ChainDiagnosis::NotStochastic { description }));
        }
        Ok(Self { transition, initial })
    }

    pub fn num_modes(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn initial(&self) -> &DVector<f64> {
        &self.initial
    }

    /// Transition probability from mode `i` to mode `j` (0-based).
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.transition[(i, j)]
    }

    /// Modes reachable from `i` in one step: `{ j : p_ij > 0 }`.
    ///
    /// Panics if `i` is out of range.
    pub fn cover(&self, i: usize) -> Vec<usize> {
        assert!(i < self.num_modes(), "mode index {i} out of range");
        (0..self.num_modes())
            .filter(|&j| self.transition[(i, j)] > ZERO_ENTRY_TOL)
            .collect()
    }

    /// A most probable successor of `i`; ties broken by lowest index so that
    /// downstream terminal constraints are reproducible.
    ///
    /// Panics if `i` is out of range.
    pub fn bet_node(&self, i: usize) -> usize {
        assert!(i < self.num_modes(), "mode index {i} out of range");
        let mut best = 0usize;
        let mut best_p = -1.0;
        for j in 0..self.num_modes() {
            let p = self.transition[(i, j)];
            if p > best_p + ZERO_ENTRY_TOL {
                best = j;
                best_p = p;
            }
        }
        best
    }

    /// Solves `pi P = pi`, `sum pi = 1` by a dense bordered solve, falling back
    /// to power iteration. The result is verified to [`STATIONARY_TOL`].
    pub fn stationary_distribution(&self) -> Result<StationaryDistribution, ChainError> {
        let n = self.num_modes();
        // Stacked system [P' - I; 1'] pi = [0; 1], solved least-squares.
        let mut sys = DMatrix::zeros(n + 1, n);
        for i in 0..n {
            for j in 0..n {
                sys[(i, j)] = self.transition[(j, i)] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..n {
            sys[(n, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        let svd = sys.svd(true, true);
        if let Ok(sol) = svd.solve(&rhs, 1e-13) {
            if sol.iter().all(|&x| x > 0.0) && self.stationary_residual(&sol) <= STATIONARY_TOL {
                let total: f64 = sol.iter().sum();
                return Ok(StationaryDistribution { pi: sol / total });
            }
        }
        // Fallback: power iteration from the uniform distribution.
        let mut pi = DVector::from_element(n, 1.0 / n as f64);
        for _ in 0..POWER_ITERATION_CAP {
            let next = self.propagate(&pi);
            let diff = (&next - &pi).amax();
            pi = next;
            if diff <= 0.1 * STATIONARY_TOL {
                break;
            }
        }
        if self.stationary_residual(&pi) <= STATIONARY_TOL && pi.iter().all(|&x| x > 0.0) {
            let total: f64 = pi.iter().sum();
            Ok(StationaryDistribution { pi: pi / total })
        } else {
            Err(ChainError::StationaryDidNotConverge(POWER_ITERATION_CAP))
        }
    }

    /// One step of the distribution recursion `d <- d P`.
    pub fn propagate(&self, dist: &DVector<f64>) -> DVector<f64> {
        self.transition.transpose() * dist
    }

    /// Distribution of the mode after `steps` steps starting from a point mass
    /// on `theta0`.
    pub fn mode_distribution(&self, theta0: usize, steps: usize) -> DVector<f64> {
        let mut d = DVector::zeros(self.num_modes());
        d[theta0] = 1.0;
        for _ in 0..steps {
            d = self.propagate(&d);
        }
        d
    }

    fn stationary_residual(&self, pi: &DVector<f64>) -> f64 {
        (self.propagate(pi) - pi).amax()
    }
}

fn probability_vector_defect(v: &[f64]) -> Option<String> {
    for (k, &x) in v.iter().enumerate() {
        if !x.is_finite() || x < -STOCHASTIC_TOL || x > 1.0 + STOCHASTIC_TOL {
            return Some(format!("entry {k} = {x} outside [0, 1]"));
        }
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Some(format!("sums to {sum}, expected 1"));
    }
    None
}

/// Structural validity check: stochastic rows, strong connectivity of the
/// positive-entry digraph, aperiodicity via the gcd of cycle lengths.
///
/// Checked structurally rather than spectrally so that near-zero entries do
/// not make the verdict ambiguous; entries below [`ZERO_ENTRY_TOL`] are zeros.
pub fn diagnose(transition: &DMatrix<f64>) -> ChainDiagnosis {
    let n = transition.nrows();
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| transition[(i, j)]).collect();
        if let Some(desc) = probability_vector_defect(&row) {
            return ChainDiagnosis::NotStochastic {
                description: format!("row {i} {desc}"),
            };
        }
    }
    let edge = |i: usize, j: usize| transition[(i, j)] > ZERO_ENTRY_TOL;

    // Strong connectivity: forward and backward reachability from mode 0.
    let forward = reachable(n, |i, j| edge(i, j));
    if let Some(missing) = (0..n).find(|&k| !forward[k]) {
        let _ = missing;
        return ChainDiagnosis::Reducible { unreachable_from: 0 };
    }
    let backward = reachable(n, |i, j| edge(j, i));
    if (0..n).any(|k| !backward[k]) {
        return ChainDiagnosis::Reducible { unreachable_from: 0 };
    }

    // Aperiodicity: on a strongly connected digraph the period equals
    // gcd over all edges (u, v) of (dist(u) + 1 - dist(v)) for BFS distances
    // from any fixed root.
    let dist = bfs_distances(n, |i, j| edge(i, j));
    let mut g: i64 = 0;
    for u in 0..n {
        for v in 0..n {
            if edge(u, v) {
                let delta = dist[u] as i64 + 1 - dist[v] as i64;
                g = gcd(g, delta.abs());
            }
        }
    }
    if g == 1 {
        ChainDiagnosis::Valid
    } else {
        ChainDiagnosis::Periodic { period: g.max(2) as usize }
    }
}

fn reachable(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && edge(u, v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn bfs_distances(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[0] = 0;
    queue.push_back(0usize);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if edge(u, v) && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}
