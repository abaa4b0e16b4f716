//! Finite-horizon unrolling of the mode chain into a scenario tree.
//!
//! Each node carries its stage, mode and path probability; one decision per
//! non-leaf node realizes causality of the control policy structurally. The
//! tree is stored flat (parent links, contiguous child ranges) in
//! breadth-first order with children sorted by ascending mode index, so a
//! given `(chain, theta0, horizon)` always produces the identical tree.

use crate::chain::MarkovChain;
use std::ops::Range;
use thiserror::Error;

/// Default cap on the node count before tree construction refuses to proceed.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("root mode {0} out of range")]
    BadRootMode(usize),
    #[error("tree would exceed {cap} nodes at stage {stage}; use a smaller horizon")]
    NodeCapExceeded { cap: usize, stage: usize },
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub stage: usize,
    pub mode: usize,
    pub parent: Option<usize>,
    /// Transition probability from the parent's mode to this node's mode
    /// (1 at the root).
    pub trans_prob: f64,
    /// Unconditional path probability; products of `trans_prob` along the
    /// path, hence exact by construction.
    pub prob: f64,
    pub children: Range<usize>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioTree {
    nodes: Vec<TreeNode>,
    /// `stage_bounds[k]..stage_bounds[k+1]` indexes the stage-k nodes.
    stage_bounds: Vec<usize>,
    horizon: usize,
    root_mode: usize,
    /// Control index for each node: non-leaf nodes are numbered consecutively
    /// in node order; leaves map to `None`.
    control_index: Vec<Option<usize>>,
    num_controls: usize,
}

impl ScenarioTree {
    pub fn build(chain: &MarkovChain, theta0: usize, horizon: usize) -> Result<Self, TreeError> {
        Self::build_capped(chain, theta0, horizon, DEFAULT_NODE_CAP)
    }

    pub fn build_capped(
        chain: &MarkovChain,
        theta0: usize,
        horizon: usize,
        cap: usize,
    ) -> Result<Self, TreeError> {
        if horizon == 0 {
            return Err(TreeError::ZeroHorizon);
        }
        if theta0 >= chain.num_modes() {
            return Err(TreeError::BadRootMode(theta0));
        }
        let mut nodes = vec![TreeNode {
            stage: 0,
            mode: theta0,
            parent: None,
            trans_prob: 1.0,
            prob: 1.0,
            children: 0..0,
        }];
        let mut stage_bounds = vec![0usize, 1];
        let mut frontier = 0..1usize;
        for stage in 1..=horizon {
            for v in frontier.clone() {
                let start = nodes.len();
                let parent_mode = nodes[v].mode;
                let parent_prob = nodes[v].prob;
                for j in chain.cover(parent_mode) {
                    if nodes.len() >= cap {
                        return Err(TreeError::NodeCapExceeded { cap, stage });
                    }
                    let p = chain.prob(parent_mode, j);
                    nodes.push(TreeNode {
                        stage,
                        mode: j,
                        parent: Some(v),
                        trans_prob: p,
                        prob: parent_prob * p,
                        children: 0..0,
                    });
                }
                nodes[v].children = start..nodes.len();
            }
            frontier = stage_bounds[stage]..nodes.len();
            stage_bounds.push(nodes.len());
        }
        let mut control_index = Vec::with_capacity(nodes.len());
        let mut num_controls = 0;
        for node in &nodes {
            if node.stage < horizon {
                control_index.push(Some(num_controls));
                num_controls += 1;
            } else {
                control_index.push(None);
            }
        }
        Ok(Self {
            nodes,
            stage_bounds,
            horizon,
            root_mode: theta0,
            control_index,
            num_controls,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn root_mode(&self) -> usize {
        self.root_mode
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Node ids making up stage `k`.
    pub fn stage_range(&self, k: usize) -> Range<usize> {
        self.stage_bounds[k]..self.stage_bounds[k + 1]
    }

    pub fn leaves(&self) -> Range<usize> {
        self.stage_range(self.horizon)
    }

    /// Decision slot of a node, `None` for leaves. Non-leaf nodes are numbered
    /// consecutively in breadth-first node order.
    pub fn control_index(&self, id: usize) -> Option<usize> {
        self.control_index[id]
    }

    pub fn num_controls(&self) -> usize {
        self.num_controls
    }

    /// Expectation over stage `k`: values are aligned with `stage_range(k)`.
    ///
    /// Panics if the value slice does not cover the stage.
    pub fn expected_over_stage(&self, k: usize, values: &[f64]) -> f64 {
        let range = self.stage_range(k);
        assert_eq!(
            values.len(),
            range.len(),
            "stage {k} has {} nodes, got {} values",
            range.len(),
            values.len()
        );
        range
            .clone()
            .zip(values)
            .map(|(id, v)| self.nodes[id].prob * v)
            .sum()
    }

    /// Expectation of node-indexed values over stage `k`.
    pub fn expected_over_stage_by_id(&self, k: usize, value: impl Fn(usize) -> f64) -> f64 {
        self.stage_range(k).map(|id| self.nodes[id].prob * value(id)).sum()
    }

    /// Mode sequence along the path from the root to `id`, inclusive.
    pub fn path_modes(&self, id: usize) -> Vec<usize> {
        let mut rev = vec![self.nodes[id].mode];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            rev.push(self.nodes[p].mode);
            cur = p;
        }
        rev.reverse();
        rev
    }

    /// Child of `id` whose mode is `mode`, if present.
    pub fn child_with_mode(&self, id: usize, mode: usize) -> Option<usize> {
        self.nodes[id].children.clone().find(|&c| self.nodes[c].mode == mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    fn chain(p: &[f64], n: usize) -> MarkovChain {
        MarkovChain::with_uniform_initial(DMatrix::from_row_slice(n, n, p)).unwrap()
    }

    fn two_mode() -> MarkovChain {
        chain(&[0.9, 0.1, 0.5, 0.5], 2)
    }

    #[test]
    fn single_mode_chain_gives_a_path() {
        let c = chain(&[1.0], 1);
        let t = ScenarioTree::build(&c, 0, 5).unwrap();
        assert_eq!(t.num_nodes(), 6);
        assert!(t.nodes().iter().all(|n| (n.prob - 1.0).abs() == 0.0));
        assert_eq!(t.num_controls(), 5);
    }

    #[test]
    fn two_mode_depth_two_probabilities() {
        let t = ScenarioTree::build(&two_mode(), 0, 2).unwrap();
        let s1: Vec<(usize, f64)> =
            t.stage_range(1).map(|id| (t.node(id).mode, t.node(id).prob)).collect();
        assert_eq!(s1.len(), 2);
        assert_abs_diff_eq!(s1[0].1, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(s1[1].1, 0.1, epsilon = 1e-15);
        let mut s2: Vec<f64> = t.stage_range(2).map(|id| t.node(id).prob).collect();
        s2.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expect = [0.81, 0.09, 0.05, 0.05];
        for (got, want) in s2.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s2.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_entries_prune_branches() {
        let c = MarkovChain::new_unvalidated(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]),
            DVector::from_row_slice(&[1.0, 0.0]),
        )
        .unwrap();
        let t = ScenarioTree::build(&c, 0, 4).unwrap();
        assert_eq!(t.num_nodes(), 5); // single path
    }

    #[test]
    fn stage_probabilities_sum_to_one() {
        let t = ScenarioTree::build(&two_mode(), 1, 6).unwrap();
        for k in 0..=6 {
            let total: f64 = t.stage_range(k).map(|id| t.node(id).prob).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn expected_over_stage_trivial_and_weighted() {
        let t = ScenarioTree::build(&two_mode(), 0, 2).unwrap();
        let ones = vec![1.0; t.stage_range(2).len()];
        assert_abs_diff_eq!(t.expected_over_stage(2, &ones), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            t.expected_over_stage(1, &[10.0, 0.0]),
            9.0,
            epsilon = 1e-12
        );
    }

    /// Brute-force enumeration oracle: expectation over all mode sequences of
    /// length k weighted by path probability products.
    fn enumeration_expectation(
        c: &MarkovChain,
        theta0: usize,
        k: usize,
        value: &dyn Fn(&[usize]) -> f64,
    ) -> f64 {
        let mut total = 0.0;
        let nu = c.num_modes();
        let mut seq = vec![theta0];
        fn recurse(
            c: &MarkovChain,
            nu: usize,
            k: usize,
            seq: &mut Vec<usize>,
            p: f64,
            value: &dyn Fn(&[usize]) -> f64,
            total: &mut f64,
        ) {
            if seq.len() == k + 1 {
                *total += p * value(seq);
                return;
            }
            let last = *seq.last().unwrap();
            for j in 0..nu {
                let pj = c.prob(last, j);
                if pj > 0.0 {
                    seq.push(j);
                    recurse(c, nu, k, seq, p * pj, value, total);
                    seq.pop();
                }
            }
        }
        recurse(c, nu, k, &mut seq, 1.0, value, &mut total);
        total
    }

    #[test]
    fn stage_expectation_matches_enumeration_oracle() {
        let c = two_mode();
        let value = |path: &[usize]| {
            // An arbitrary path-dependent functional of the realized modes.
            path.iter().map(|&m| (m + 1) as f64).product::<f64>()
        };
        for k in 1..=6 {
            let t = ScenarioTree::build(&c, 0, k).unwrap();
            let vals: Vec<f64> =
                t.stage_range(k).map(|id| value(&t.path_modes(id))).collect();
            let tree_e = t.expected_over_stage(k, &vals);
            let oracle = enumeration_expectation(&c, 0, k, &value);
            assert_abs_diff_eq!(tree_e, oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn tower_property_on_the_tree() {
        // Stage-(k+1) expectation equals the stage-k expectation of per-node
        // conditional averages.
        let t = ScenarioTree::build(&two_mode(), 0, 5).unwrap();
        let value = |id: usize| (id as f64).sin() + 1.5;
        for k in 0..5 {
            let direct = t.expected_over_stage_by_id(k + 1, value);
            let nested = t.expected_over_stage_by_id(k, |v| {
                t.node(v)
                    .children
                    .clone()
                    .map(|c| t.node(c).trans_prob * value(c))
                    .sum::<f64>()
            });
            assert_abs_diff_eq!(direct, nested, epsilon = 1e-12);
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = ScenarioTree::build(&two_mode(), 0, 6).unwrap();
        let b = ScenarioTree::build(&two_mode(), 0, 6).unwrap();
        assert_eq!(a.num_nodes(), b.num_nodes());
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            assert_eq!(x.mode, y.mode);
            assert_eq!(x.parent, y.parent);
            assert_eq!(x.children, y.children);
            assert!(x.prob.to_bits() == y.prob.to_bits());
        }
    }

    #[test]
    fn node_cap_produces_structured_error() {
        let err = ScenarioTree::build_capped(&two_mode(), 0, 25, 1000).unwrap_err();
        assert!(matches!(err, TreeError::NodeCapExceeded { .. }));
    }
}
