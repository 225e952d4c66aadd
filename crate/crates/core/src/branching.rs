//! Branching-variable selection.
//!
//! Three rules are provided: the largest relaxation coefficient
//! ([`select_default`]), the variable used most often by the best stored
//! solutions ([`select_most_frequent`]), and strong branching on the
//! `z_k = 0` side only ([`select_strong`]). The `z_k = 1` side of strong
//! branching never needs a solve: its relaxation has the same free columns
//! as the parent's, so its value is the parent bound plus two.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bnb::NodeState;
use crate::dependencies::DependencyCollection;
use crate::error::{Error, Result};
use crate::gram::GramSystem;
use crate::ols::{solve_subset, Objective, OlsFit};
use crate::varset::VarSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchingRule {
    /// Most-frequent when the data has linear dependencies, strong otherwise.
    Auto,
    /// Largest relaxation coefficient magnitude.
    Std,
    /// Most frequent among the best pooled solutions.
    Mfb,
    /// Strong branching.
    Sb,
}

impl BranchingRule {
    pub fn resolve(self, deps: &DependencyCollection) -> BranchingRule {
        match self {
            BranchingRule::Auto if deps.is_empty() => BranchingRule::Sb,
            BranchingRule::Auto => BranchingRule::Mfb,
            rule => rule,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BranchingRule::Auto => "auto",
            BranchingRule::Std => "std",
            BranchingRule::Mfb => "mfb",
            BranchingRule::Sb => "sb",
        }
    }
}

impl fmt::Display for BranchingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BranchingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(BranchingRule::Auto),
            "std" | "default" => Ok(BranchingRule::Std),
            "mfb" => Ok(BranchingRule::Mfb),
            "sb" | "strong" => Ok(BranchingRule::Sb),
            other => Err(Error::Config(format!("unknown branching rule {other:?}"))),
        }
    }
}

/// The best `capacity` distinct feasible subsets seen so far, ascending by
/// objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPool {
    capacity: usize,
    entries: Vec<(VarSet, f64)>,
}

impl SolutionPool {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "pool capacity must be positive");
        SolutionPool {
            capacity,
            entries: Vec::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(VarSet, f64)] {
        &self.entries
    }

    /// Admit a solution. Duplicates are ignored; when full, the worst entry
    /// is evicted only by a strictly better one. Returns whether it was kept.
    pub fn offer(&mut self, subset: VarSet, value: f64) -> bool {
        if self.entries.iter().any(|(s, _)| *s == subset) {
            return false;
        }
        let pos = self.entries.partition_point(|(_, v)| *v <= value);
        if pos >= self.capacity {
            return false;
        }
        self.entries.insert(pos, (subset, value));
        self.entries.truncate(self.capacity);
        true
    }
}

/// Free variable with the largest relaxation coefficient magnitude.
pub fn select_default(node: &NodeState, fit: &OlsFit) -> Result<usize> {
    let free = node.free();
    let mut best: Option<(usize, f64)> = None;
    for j in free {
        let score = fit.coef(j).abs();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::NoFreeVariables)
}

/// Free variable contained in the most pooled solutions. Falls back to
/// [`select_default`] on an empty pool.
pub fn select_most_frequent(node: &NodeState, pool: &SolutionPool, fit: &OlsFit) -> Result<usize> {
    let free = node.free();
    if free.is_empty() {
        return Err(Error::NoFreeVariables);
    }
    if pool.is_empty() {
        return select_default(node, fit);
    }
    let mut best: Option<(usize, usize)> = None;
    for j in free {
        let score = pool.entries().iter().filter(|(s, _)| s.contains(j)).count();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((j, score));
        }
    }
    Ok(best.expect("free set is nonempty").0)
}

/// Outcome of strong branching at one node.
#[derive(Debug, Clone)]
pub struct StrongChoice {
    pub index: usize,
    /// Relaxation value of the `z_index = 0` child.
    pub theta: f64,
    /// That child's relaxation fit, reusable when the child is processed.
    pub fit: OlsFit,
    pub solves: u64,
}

/// Solve the `z_k = 0` relaxation for every free `k` and pick the largest.
pub fn select_strong(node: &NodeState, g: &GramSystem) -> Result<StrongChoice> {
    let free = node.free();
    if free.is_empty() {
        return Err(Error::NoFreeVariables);
    }
    let obj = Objective::new(g);
    let base = node.z1.union(free);
    let penalty = 2.0 * node.z1.len() as f64;
    let mut best: Option<(usize, f64, OlsFit)> = None;
    let mut solves = 0;
    for k in free {
        let fit = solve_subset(g, base.without(k));
        solves += 1;
        let theta = obj.log_term(fit.rss) + penalty;
        if best.as_ref().is_none_or(|(_, t, _)| theta > *t) {
            best = Some((k, theta, fit));
        }
    }
    let (index, theta, fit) = best.expect("free set is nonempty");
    Ok(StrongChoice {
        index,
        theta,
        fit,
        solves,
    })
}
