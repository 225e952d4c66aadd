//! Greedy forward selection and backward elimination.
//!
//! Both passes accept a move only when it lowers `n log(rss) + 2|S|` by more
//! than [`MIN_IMPROVEMENT`]; candidate ties go to the smallest index. Inside
//! the branch-and-bound the passes are confined to a node: forward starts from
//! the variables fixed in and may add free ones, backward starts from all
//! non-excluded variables and may remove free ones, so the result is always
//! feasible for the node.

use serde::{Deserialize, Serialize};

use crate::bnb::NodeState;
use crate::gram::GramSystem;
use crate::ols::{full_aic, subset_rss, Factor, Objective};
use crate::solution::Incumbent;
use crate::varset::VarSet;

pub const MIN_IMPROVEMENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub direction: Direction,
    pub index: usize,
    /// Objective after the move.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassResult {
    pub incumbent: Incumbent,
    pub moves: Vec<Move>,
    pub evaluations: u64,
}

/// Add variables from `candidates` to `start` while the objective improves.
pub fn forward_pass(g: &GramSystem, start: VarSet, candidates: VarSet) -> PassResult {
    let obj = Objective::new(g);
    let mut set = start;
    let mut factor = Factor::for_set(g, set);
    let mut current = obj.eval(factor.rss(), set.len()).value;
    let mut moves = Vec::new();
    let mut evaluations = 1;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for j in candidates.difference(set) {
            let cp = factor.checkpoint();
            factor.push(j);
            let v = obj.eval(factor.rss(), set.len() + 1).value;
            factor.rollback(cp);
            evaluations += 1;
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, v)) if v < current - MIN_IMPROVEMENT => {
                factor.push(j);
                set.insert(j);
                current = v;
                moves.push(Move {
                    direction: Direction::Forward,
                    index: j,
                    objective: v,
                });
            }
            _ => break,
        }
    }
    PassResult {
        incumbent: Incumbent::evaluate(g, set),
        moves,
        evaluations,
    }
}

/// Remove variables in `removable` from `start` while the objective improves.
pub fn backward_pass(g: &GramSystem, start: VarSet, removable: VarSet) -> PassResult {
    let obj = Objective::new(g);
    let mut set = start;
    let mut current = obj.eval(subset_rss(g, set), set.len()).value;
    let mut moves = Vec::new();
    let mut evaluations = 1;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for j in removable.intersection(set) {
            let trial = set.without(j);
            let v = obj.eval(subset_rss(g, trial), trial.len()).value;
            evaluations += 1;
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, v)) if v < current - MIN_IMPROVEMENT => {
                set.remove(j);
                current = v;
                moves.push(Move {
                    direction: Direction::Backward,
                    index: j,
                    objective: v,
                });
            }
            _ => break,
        }
    }
    PassResult {
        incumbent: Incumbent::evaluate(g, set),
        moves,
        evaluations,
    }
}

#[derive(Debug, Clone)]
pub struct StepwiseOutcome {
    pub best: Incumbent,
    pub forward: PassResult,
    pub backward: PassResult,
}

/// Node-level upper bound: both passes confined to the node, better one wins.
pub fn stepwise_bound(node: &NodeState, g: &GramSystem) -> StepwiseOutcome {
    let free = node.free();
    let forward = forward_pass(g, node.z1, free);
    let backward = backward_pass(g, node.z1.union(free), free);
    let best = if forward.incumbent.value() < backward.incumbent.value() {
        forward.incumbent.clone()
    } else {
        backward.incumbent.clone()
    };
    StepwiseOutcome {
        best,
        forward,
        backward,
    }
}

/// Result of a standalone stepwise run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseReport {
    pub direction: Direction,
    pub incumbent: Incumbent,
    pub full_aic: f64,
    pub moves: Vec<Move>,
    pub evaluations: u64,
}

impl StepwiseReport {
    fn from_pass(g: &GramSystem, direction: Direction, pass: PassResult) -> Self {
        StepwiseReport {
            direction,
            full_aic: full_aic(pass.incumbent.value(), g.n()),
            incumbent: pass.incumbent,
            moves: pass.moves,
            evaluations: pass.evaluations,
        }
    }
}

/// Forward selection from the empty model.
pub fn sw_forward(g: &GramSystem) -> StepwiseReport {
    let all = VarSet::full(g.p());
    StepwiseReport::from_pass(g, Direction::Forward, forward_pass(g, VarSet::empty(), all))
}

/// Backward elimination from the full model.
pub fn sw_backward(g: &GramSystem) -> StepwiseReport {
    let all = VarSet::full(g.p());
    StepwiseReport::from_pass(g, Direction::Backward, backward_pass(g, all, all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::enumerate::enumerate_all;
    use crate::synth::SynthSpec;

    #[test]
    fn leaf_node_returns_fixed_subset() {
        let d = SynthSpec::new(30, 4).seed(2).generate();
        let g = GramSystem::build(&d).unwrap();
        let mut node = NodeState::root(4);
        node.z1 = [0, 2].into_iter().collect();
        node.z0 = [1, 3].into_iter().collect();
        let out = stepwise_bound(&node, &g);
        assert_eq!(out.forward.incumbent.subset, node.z1);
        assert_eq!(out.backward.incumbent.subset, node.z1);
        assert!(out.forward.moves.is_empty() && out.backward.moves.is_empty());
    }

    #[test]
    fn forward_finds_the_exact_predictor() {
        let noise = SynthSpec::new(40, 3).seed(17).generate();
        let x1: Vec<f64> = (0..40).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let mut cols = vec![x1.clone()];
        cols.extend(noise.columns().iter().cloned());
        let g = GramSystem::build(&Dataset::from_columns(cols, x1).unwrap()).unwrap();
        let sw = sw_forward(&g);
        assert_eq!(sw.incumbent.subset.to_vec(), vec![0]);
        assert_eq!(enumerate_all(&g, 20, false).unwrap().best.to_vec(), vec![0]);
    }

    #[test]
    fn single_predictor_matches_enumeration() {
        for seed in 0..5 {
            let g = GramSystem::build(&SynthSpec::new(15, 1).seed(seed).generate()).unwrap();
            let best = enumerate_all(&g, 20, false).unwrap();
            assert_eq!(sw_forward(&g).incumbent.subset, best.best);
            assert_eq!(sw_backward(&g).incumbent.subset, best.best);
        }
    }

    #[test]
    fn moves_strictly_improve_and_respect_fixings() {
        for seed in 0..10 {
            let g = GramSystem::build(&SynthSpec::new(30, 8).dependencies(1).seed(seed).generate()).unwrap();
            let opt = enumerate_all(&g, 20, false).unwrap().objective.value;
            let mut node = NodeState::root(8);
            node.z1 = VarSet::singleton(1);
            node.z0 = VarSet::singleton(5);
            let out = stepwise_bound(&node, &g);
            for pass in [&out.forward, &out.backward] {
                assert!(node.z1.is_subset(pass.incumbent.subset));
                assert!(pass.incumbent.subset.is_disjoint(node.z0));
                let free = node.free().len() as u64;
                assert!(pass.moves.len() as u64 <= free);
                assert!(pass.evaluations <= free * (free + 1) / 2 + free + 1);
            }
            let mut prev = f64::INFINITY;
            for m in &out.forward.moves {
                assert!(m.objective < prev - MIN_IMPROVEMENT);
                prev = m.objective;
            }
            let root = stepwise_bound(&NodeState::root(8), &g);
            assert!(root.best.value() >= opt - 1e-9);
        }
    }
}
