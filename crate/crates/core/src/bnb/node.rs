use serde::{Deserialize, Serialize};

use crate::dependencies::DependencyCollection;
use crate::error::{Error, Result};
use crate::gram::GramSystem;
use crate::ols::{solve_subset, Factor, Objective, OlsFit};
use crate::solution::Incumbent;
use crate::varset::VarSet;

/// A node `(Z1, Z0, Z)` of the search tree: variables fixed in, fixed out,
/// and free. Only `Z1` and `Z0` are stored; `Z` is the complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub p: usize,
    pub z1: VarSet,
    pub z0: VarSet,
    pub depth: usize,
    /// Lower bound on every completion of this node.
    pub lower: f64,
    /// `lower` was taken from the parent without a solve.
    pub inherited: bool,
    /// Residual of the relaxation behind `lower`, when known.
    pub relax_rss: Option<f64>,
}

impl NodeState {
    pub fn root(p: usize) -> Self {
        NodeState {
            p,
            z1: VarSet::empty(),
            z0: VarSet::empty(),
            depth: 0,
            lower: f64::NEG_INFINITY,
            inherited: false,
            relax_rss: None,
        }
    }

    pub fn free(&self) -> VarSet {
        VarSet::full(self.p).difference(self.z1).difference(self.z0)
    }

    pub fn is_leaf(&self) -> bool {
        self.free().is_empty()
    }

    /// `Z1` and `Z0` are disjoint subsets of `0..p`.
    pub fn is_valid_partition(&self) -> bool {
        let all = VarSet::full(self.p);
        self.z1.is_disjoint(self.z0) && self.z1.is_subset(all) && self.z0.is_subset(all)
    }
}

/// Relaxation bound: least squares free on `Z1 ∪ Z`, then
/// `n log(rss) + 2 |Z1|`.
pub fn relax_bound(node: &NodeState, g: &GramSystem) -> (f64, OlsFit) {
    let fit = solve_subset(g, node.z1.union(node.free()));
    let lower = Objective::new(g).log_term(fit.rss) + 2.0 * node.z1.len() as f64;
    (lower, fit)
}

/// Feasible solution read off a relaxation fit: `Z1` plus the free
/// variables whose coefficient is nonzero, scored from the relaxation
/// residual without a new solve.
pub fn harvest_incumbent(node: &NodeState, fit: &OlsFit, g: &GramSystem, zero_tol: f64) -> Incumbent {
    let subset = node.z1.union(fit.nonzero_within(node.free(), zero_tol));
    let mut beta = fit.beta.clone();
    for j in node.free().difference(subset) {
        beta[j + 1] = 0.0;
    }
    Incumbent {
        subset,
        objective: Objective::new(g).eval(fit.rss, subset.len()),
        rss: fit.rss,
        beta,
    }
}

/// Split on free variable `j`. The `z_j = 1` child keeps the parent's free
/// columns, so its bound is the parent's plus two and needs no solve; the
/// `z_j = 0` child starts from the parent's bound and must be solved.
pub fn branch(node: &NodeState, j: usize) -> Result<(NodeState, NodeState)> {
    if !node.free().contains(j) {
        return Err(Error::NotFree(j));
    }
    let one = NodeState {
        p: node.p,
        z1: node.z1.with(j),
        z0: node.z0,
        depth: node.depth + 1,
        lower: node.lower + 2.0,
        inherited: true,
        relax_rss: node.relax_rss,
    };
    let zero = NodeState {
        p: node.p,
        z1: node.z1,
        z0: node.z0.with(j),
        depth: node.depth + 1,
        lower: node.lower,
        inherited: true,
        relax_rss: None,
    };
    Ok((one, zero))
}

/// Fix `z_q = 0` for every free `q` that completes a stored dependent set
/// whose other members are all fixed in. Repeats until nothing changes.
pub fn apply_dependency_fixing(node: &NodeState, deps: &DependencyCollection) -> NodeState {
    let mut out = node.clone();
    loop {
        let mut changed = false;
        for members in deps.member_sets() {
            let free = members.intersection(out.free());
            for q in free {
                if members.without(q).is_subset(out.z1) {
                    out.z0.insert(q);
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Slow variant of [`apply_dependency_fixing`]: tests every free column for
/// dependence on the intercept plus `Z1` directly from the Gram system.
pub fn apply_rank_fixing(node: &NodeState, g: &GramSystem) -> NodeState {
    let mut out = node.clone();
    let base = Factor::for_set(g, node.z1);
    for q in node.free() {
        let mut f = base.clone();
        if !f.push(q) {
            out.z0.insert(q);
        }
    }
    out
}

/// Whether `z1` contains an entire stored dependent set.
pub fn violates_cut(z1: VarSet, deps: &DependencyCollection) -> bool {
    deps.member_sets().any(|m| m.is_subset(z1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::enumerate::enumerate_all;
    use crate::synth::SynthSpec;

    fn set(v: &[usize]) -> VarSet {
        v.iter().copied().collect()
    }

    fn node(p: usize, z1: &[usize], z0: &[usize]) -> NodeState {
        let mut n = NodeState::root(p);
        n.z1 = set(z1);
        n.z0 = set(z0);
        n
    }

    #[test]
    fn root_bound_uses_full_model() {
        let g = GramSystem::build(&SynthSpec::new(25, 5).seed(1).generate()).unwrap();
        let (lower, fit) = relax_bound(&NodeState::root(5), &g);
        let full = solve_subset(&g, VarSet::full(5));
        assert_eq!(fit.rss, full.rss);
        assert_eq!(lower, 25.0 * full.rss.ln());
    }

    #[test]
    fn leaf_bound_is_exact() {
        let g = GramSystem::build(&SynthSpec::new(25, 4).seed(2).generate()).unwrap();
        let leaf = node(4, &[0, 3], &[1, 2]);
        let (lower, _) = relax_bound(&leaf, &g);
        assert_eq!(lower, Incumbent::evaluate(&g, set(&[0, 3])).value());
    }

    #[test]
    fn bound_below_all_completions() {
        let g = GramSystem::build(&SynthSpec::new(25, 6).seed(3).generate()).unwrap();
        let n = node(6, &[0], &[1]);
        let (lower, _) = relax_bound(&n, &g);
        let free = n.free().to_vec();
        assert_eq!(free.len(), 4);
        for mask in 0u32..16 {
            let extra: VarSet = free
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &j)| j)
                .collect();
            let v = Incumbent::evaluate(&g, n.z1.union(extra)).value();
            assert!(lower <= v + 1e-9);
        }
    }

    #[test]
    fn harvest_cases() {
        let g = GramSystem::build(&SynthSpec::new(25, 4).seed(4).generate()).unwrap();
        let n = node(4, &[1], &[]);
        let (lower, fit) = relax_bound(&n, &g);
        let inc = harvest_incumbent(&n, &fit, &g, 1e-9);
        assert_eq!(inc.subset, VarSet::full(4));
        assert!((inc.value() - (lower + 6.0)).abs() < 1e-9);

        let mut zeroed = fit.clone();
        for j in n.free() {
            zeroed.beta[j + 1] = 0.0;
        }
        let inc = harvest_incumbent(&n, &zeroed, &g, 1e-9);
        assert_eq!(inc.subset, n.z1);
        assert!((inc.value() - lower).abs() < 1e-9);
    }

    #[test]
    fn harvest_skips_dropped_duplicate() {
        let base = SynthSpec::new(20, 2).seed(5).generate();
        let cols = vec![
            base.column(0).to_vec(),
            base.column(0).to_vec(),
            base.column(1).to_vec(),
        ];
        let g = GramSystem::build(&Dataset::from_columns(cols, base.response().to_vec()).unwrap()).unwrap();
        let n = NodeState::root(3);
        let (_, fit) = relax_bound(&n, &g);
        assert_eq!(fit.dropped.to_vec(), vec![1]);
        let inc = harvest_incumbent(&n, &fit, &g, 1e-9);
        assert!(!inc.subset.contains(1));
        assert!(inc.subset.contains(0));
    }

    #[test]
    fn branch_children() {
        let mut n = node(3, &[0], &[]);
        n.lower = 10.0;
        let (one, zero) = branch(&n, 2).unwrap();
        assert_eq!(one.lower, 12.0);
        assert!(one.inherited);
        assert_eq!(one.z1, set(&[0, 2]));
        assert_eq!(zero.z0, set(&[2]));
        assert!(matches!(branch(&n, 0), Err(Error::NotFree(0))));

        let last = node(2, &[0], &[]);
        let (a, b) = branch(&last, 1).unwrap();
        assert!(a.is_leaf() && b.is_leaf());
    }

    #[test]
    fn lemma_fixing_examples() {
        let deps = DependencyCollection::from_member_sets([set(&[1, 2])]);
        let fixed = apply_dependency_fixing(&node(4, &[1], &[]), &deps);
        assert_eq!(fixed.z0, set(&[2]));
        assert_eq!(fixed.free(), set(&[0, 3]));

        let n = node(4, &[1], &[]);
        assert_eq!(apply_dependency_fixing(&n, &DependencyCollection::default()), n);

        let deps = DependencyCollection::from_member_sets([set(&[1, 2]), set(&[2, 3])]);
        let fixed = apply_dependency_fixing(&node(4, &[1, 3], &[]), &deps);
        assert_eq!(fixed.z0, set(&[2]));
    }

    #[test]
    fn cut_containment() {
        let deps = DependencyCollection::from_member_sets([set(&[1, 2])]);
        assert!(violates_cut(set(&[1, 2, 5]), &deps));
        assert!(!violates_cut(set(&[1]), &deps));
    }

    #[test]
    fn rank_fixing_matches_collection_on_duplicates() {
        let base = SynthSpec::new(20, 3).seed(6).generate();
        let mut cols = base.columns().to_vec();
        cols.push(base.column(1).to_vec());
        let d = Dataset::from_columns(cols, base.response().to_vec()).unwrap();
        let g = GramSystem::build(&d).unwrap();
        let deps = crate::dependencies::find_dependencies(&d);
        let n = node(4, &[1], &[]);
        assert_eq!(apply_rank_fixing(&n, &g).z0, apply_dependency_fixing(&n, &deps).z0);
        let best = enumerate_all(&g, 20, false).unwrap().best;
        assert!(!violates_cut(best, &deps));
    }
}
