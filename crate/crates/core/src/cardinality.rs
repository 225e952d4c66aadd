//! Best subsets of a fixed size, and sweeps over the size.
//!
//! [`best_subset_k`] minimizes the residual sum of squares over subsets with
//! exactly (or at most) `k` predictors. Because the residual can only shrink
//! as columns are added, the fit free on `Z1 ∪ Z` bounds every completion of
//! a node. [`sweep_naive`] solves every `k`; [`sweep_fast`] walks `k` upward
//! and stops once `k` exceeds `⌊(θ̄ − θ̂)/2⌋`, where `θ̂ = n log(rss_full)` and
//! `θ̄` is the best objective seen so far.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnb::{apply_dependency_fixing, violates_cut, NodeState};
use crate::dependencies::DependencyCollection;
use crate::error::{Error, Result};
use crate::gram::GramSystem;
use crate::ols::{full_aic, solve_subset, subset_rss, Objective};
use crate::solution::Incumbent;
use crate::stepwise::sw_forward;
use crate::varset::VarSet;

/// Relative slack on `theta_bar - theta_hat`.
pub const INVERSION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CardinalityMode {
    ExactK,
    AtMostK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityResult {
    pub k: usize,
    /// Smallest residual over feasible subsets; infinite when none exists.
    #[serde(with = "infinite_as_null")]
    pub eta: f64,
    pub subset: Option<VarSet>,
    /// `n log(eta) + 2 |subset|`; infinite when infeasible.
    #[serde(with = "infinite_as_null")]
    pub objective: f64,
    /// Nodes explored by the size-constrained search.
    pub nodes: u64,
}

impl CardinalityResult {
    pub fn is_feasible(&self) -> bool {
        self.subset.is_some()
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Minimum-residual subset with `k` predictors (exactly or at most) that
/// contains no stored dependent set.
pub fn best_subset_k(
    g: &GramSystem,
    deps: &DependencyCollection,
    k: usize,
    mode: CardinalityMode,
) -> Result<CardinalityResult> {
    best_subset_k_seeded(g, deps, k, mode, None)
}

/// [`best_subset_k`] started from a known feasible subset, typically the
/// previous size's answer in at-most mode.
pub fn best_subset_k_seeded(
    g: &GramSystem,
    deps: &DependencyCollection,
    k: usize,
    mode: CardinalityMode,
    seed: Option<VarSet>,
) -> Result<CardinalityResult> {
    let p = g.p();
    if k > p {
        return Err(Error::CardinalityOutOfRange { k, p });
    }
    let mut search = SizeSearch {
        g,
        deps,
        k,
        mode,
        best: None,
        nodes: 0,
    };
    let seeds = seed.into_iter().chain(greedy_seed(g, deps, k));
    for s in seeds {
        if search.feasible(s) {
            let rss = subset_rss(g, s);
            if search.best.is_none_or(|(_, b)| rss < b) {
                search.best = Some((s, rss));
            }
        }
    }
    search.visit(NodeState::root(p));
    let obj = Objective::new(g);
    Ok(match search.best {
        Some((subset, eta)) => CardinalityResult {
            k,
            eta,
            subset: Some(subset),
            objective: obj.eval(eta, subset.len()).value,
            nodes: search.nodes,
        },
        None => CardinalityResult {
            k,
            eta: f64::INFINITY,
            subset: None,
            objective: f64::INFINITY,
            nodes: search.nodes,
        },
    })
}

/// Forward selection by residual, forced to exactly `k` steps.
fn greedy_seed(g: &GramSystem, deps: &DependencyCollection, k: usize) -> Option<VarSet> {
    let mut set = VarSet::empty();
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in VarSet::full(g.p()).difference(set) {
            let trial = set.with(j);
            if violates_cut(trial, deps) {
                continue;
            }
            let rss = subset_rss(g, trial);
            if best.is_none_or(|(_, b)| rss < b) {
                best = Some((j, rss));
            }
        }
        set.insert(best?.0);
    }
    Some(set)
}

struct SizeSearch<'a> {
    g: &'a GramSystem,
    deps: &'a DependencyCollection,
    k: usize,
    mode: CardinalityMode,
    best: Option<(VarSet, f64)>,
    nodes: u64,
}

impl SizeSearch<'_> {
    fn size_ok(&self, len: usize) -> bool {
        match self.mode {
            CardinalityMode::ExactK => len == self.k,
            CardinalityMode::AtMostK => len <= self.k,
        }
    }

    fn feasible(&self, s: VarSet) -> bool {
        self.size_ok(s.len()) && !violates_cut(s, self.deps)
    }

    fn visit(&mut self, node: NodeState) {
        self.nodes += 1;
        let node = apply_dependency_fixing(&node, self.deps);
        let free = node.free();
        if node.z1.len() > self.k || violates_cut(node.z1, self.deps) {
            return;
        }
        if self.mode == CardinalityMode::ExactK && node.z1.len() + free.len() < self.k {
            return;
        }
        let all = node.z1.union(free);
        let fit = solve_subset(self.g, all);
        if self.best.is_some_and(|(_, b)| fit.rss >= b) {
            return;
        }
        if self.feasible(all) {
            self.best = Some((all, fit.rss));
            return;
        }
        let mut pick: Option<(usize, f64)> = None;
        for j in free {
            let score = fit.coef(j).abs();
            if pick.is_none_or(|(_, s)| score > s) {
                pick = Some((j, score));
            }
        }
        let Some((j, _)) = pick else {
            return;
        };
        let mut one = node.clone();
        one.z1.insert(j);
        self.visit(one);
        let mut zero = node;
        zero.z0.insert(j);
        self.visit(zero);
    }
}

/// Largest size an optimal subset can have given a feasible objective
/// `theta_bar` and the unpenalized full-model value `theta_hat`.
pub fn k_cap(theta_bar: f64, theta_hat: f64, p: usize) -> Result<usize> {
    // Slack so a subset fitting as well as the full model keeps its own size.
    let slack = INVERSION_TOL * theta_hat.abs().max(1.0);
    if theta_bar < theta_hat - slack {
        return Err(Error::BoundInversion {
            upper: theta_bar,
            lower: theta_hat,
        });
    }
    let width = ((theta_bar - theta_hat + slack) / 2.0).floor();
    if width.is_nan() || width >= p as f64 {
        return Ok(p);
    }
    Ok(width.max(0.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Naive,
    FastEq,
    FastLe,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::Naive => "naive",
            SweepMode::FastEq => "fast-eq",
            SweepMode::FastLe => "fast-le",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub mode: SweepMode,
    /// `θ̄` started from forward stepwise instead of infinity.
    pub seeded_from_stepwise: bool,
    pub best: Incumbent,
    pub full_aic: f64,
    /// `n log(rss)` of the full model.
    pub theta_hat: f64,
    /// Per-size results in the order solved.
    pub rows: Vec<CardinalityResult>,
    /// The size at which the early stop fired, if it did.
    pub stopped_at: Option<usize>,
    pub solves: u64,
    pub nodes: u64,
    pub wall_time_secs: f64,
}

impl SweepReport {
    pub fn objective(&self) -> f64 {
        self.best.value()
    }
}

/// Solve every size `0..=p` with exact cardinality and keep the best.
pub fn sweep_naive(g: &GramSystem, deps: &DependencyCollection) -> Result<SweepReport> {
    let start = Instant::now();
    let mut rows = Vec::with_capacity(g.p() + 1);
    for k in 0..=g.p() {
        rows.push(best_subset_k(g, deps, k, CardinalityMode::ExactK)?);
    }
    Ok(finish(g, SweepMode::Naive, false, rows, None, start))
}

/// Sizes in increasing order, stopping as soon as `k` exceeds [`k_cap`].
/// `FastLe` solves the at-most variant, seeded with the previous answer.
pub fn sweep_fast(
    g: &GramSystem,
    deps: &DependencyCollection,
    mode: SweepMode,
    seed_from_stepwise: bool,
) -> Result<SweepReport> {
    let start = Instant::now();
    let p = g.p();
    let card = match mode {
        SweepMode::FastLe => CardinalityMode::AtMostK,
        _ => CardinalityMode::ExactK,
    };
    let theta_hat = Objective::new(g).log_term(subset_rss(g, VarSet::full(p)));
    let mut theta_bar = if seed_from_stepwise {
        sw_forward(g).incumbent.value()
    } else {
        f64::INFINITY
    };
    let mut rows: Vec<CardinalityResult> = Vec::new();
    let mut stopped_at = None;
    for k in 0..=p {
        if k > k_cap(theta_bar, theta_hat, p)? {
            stopped_at = Some(k);
            break;
        }
        let prev = rows
            .last()
            .and_then(|r| r.subset)
            .filter(|_| card == CardinalityMode::AtMostK);
        let row = best_subset_k_seeded(g, deps, k, card, prev)?;
        theta_bar = theta_bar.min(row.objective);
        rows.push(row);
    }
    let mut report = finish(g, mode, seed_from_stepwise, rows, stopped_at, start);
    if seed_from_stepwise {
        let sw = sw_forward(g).incumbent;
        if sw.value() < report.best.value() {
            report.full_aic = full_aic(sw.value(), g.n());
            report.best = sw;
        }
    }
    Ok(report)
}

fn finish(
    g: &GramSystem,
    mode: SweepMode,
    seeded: bool,
    rows: Vec<CardinalityResult>,
    stopped_at: Option<usize>,
    start: Instant,
) -> SweepReport {
    let mut best: Option<&CardinalityResult> = None;
    for r in rows.iter().filter(|r| r.is_feasible()) {
        if best.is_none_or(|b| r.objective < b.objective) {
            best = Some(r);
        }
    }
    let subset = best
        .and_then(|r| r.subset)
        .expect("the empty subset is always feasible");
    let best = Incumbent::evaluate(g, subset);
    let theta_hat = Objective::new(g).log_term(subset_rss(g, VarSet::full(g.p())));
    SweepReport {
        mode,
        seeded_from_stepwise: seeded,
        full_aic: full_aic(best.value(), g.n()),
        best,
        theta_hat,
        solves: rows.len() as u64,
        nodes: rows.iter().map(|r| r.nodes).sum(),
        rows,
        stopped_at,
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::enumerate::enumerate_all;
    use crate::synth::SynthSpec;

    fn gram(n: usize, p: usize, seed: u64) -> GramSystem {
        GramSystem::build(&SynthSpec::new(n, p).seed(seed).generate()).unwrap()
    }

    #[test]
    fn extremes() {
        let g = gram(25, 5, 1);
        let deps = DependencyCollection::default();
        let r0 = best_subset_k(&g, &deps, 0, CardinalityMode::ExactK).unwrap();
        assert_eq!(r0.subset, Some(VarSet::empty()));
        assert_eq!(r0.eta, subset_rss(&g, VarSet::empty()));
        let r5 = best_subset_k(&g, &deps, 5, CardinalityMode::ExactK).unwrap();
        assert_eq!(r5.eta, subset_rss(&g, VarSet::full(5)));
        assert!(matches!(
            best_subset_k(&g, &deps, 6, CardinalityMode::ExactK),
            Err(Error::CardinalityOutOfRange { k: 6, p: 5 })
        ));
    }

    #[test]
    fn matches_combinatorial_oracle() {
        let g = gram(25, 8, 2);
        let deps = DependencyCollection::default();
        let mut by_k = [f64::INFINITY; 9];
        for bits in 0u128..256 {
            let s = VarSet::from_bits(bits);
            by_k[s.len()] = by_k[s.len()].min(subset_rss(&g, s));
        }
        let mut running = f64::INFINITY;
        for (k, &eta) in by_k.iter().enumerate() {
            let exact = best_subset_k(&g, &deps, k, CardinalityMode::ExactK).unwrap();
            assert!((exact.eta - eta).abs() <= 1e-9 * eta.max(1.0), "k={k}");
            running = running.min(eta);
            let le = best_subset_k(&g, &deps, k, CardinalityMode::AtMostK).unwrap();
            assert!((le.eta - running).abs() <= 1e-9 * running.max(1.0), "k={k}");
        }
    }

    #[test]
    fn cap_formula() {
        assert_eq!(k_cap(10.5, 3.0, 20).unwrap(), 3);
        assert_eq!(k_cap(3.0, 3.0, 20).unwrap(), 0);
        assert_eq!(k_cap(f64::INFINITY, 3.0, 7).unwrap(), 7);
        assert_eq!(k_cap(1e6, 0.0, 7).unwrap(), 7);
        assert!(matches!(k_cap(1.0, 3.0, 5), Err(Error::BoundInversion { .. })));
    }

    #[test]
    fn sweeps_agree_with_enumeration() {
        for seed in 0..6 {
            let d = SynthSpec::new(30, 7)
                .dependencies((seed % 2) as usize)
                .seed(seed)
                .generate();
            let g = GramSystem::build(&d).unwrap();
            let deps = crate::dependencies::find_dependencies(&d);
            let opt = enumerate_all(&g, 20, false).unwrap().objective.value;
            let naive = sweep_naive(&g, &deps).unwrap();
            assert!((naive.objective() - opt).abs() < 1e-6);
            for mode in [SweepMode::FastEq, SweepMode::FastLe] {
                for seeded in [false, true] {
                    let fast = sweep_fast(&g, &deps, mode, seeded).unwrap();
                    assert!((fast.objective() - opt).abs() < 1e-6, "{mode:?} seeded={seeded}");
                    assert!(fast.solves <= naive.solves);
                }
            }
        }
    }

    #[test]
    fn pure_noise_stops_early() {
        let noise = SynthSpec::new(60, 6).seed(9).generate();
        let y: Vec<f64> = (0..60).map(|i| ((i * 37) % 11) as f64).collect();
        let d = Dataset::from_columns(noise.columns().to_vec(), y).unwrap();
        let g = GramSystem::build(&d).unwrap();
        let deps = DependencyCollection::default();
        let opt = enumerate_all(&g, 20, false).unwrap();
        let fast = sweep_fast(&g, &deps, SweepMode::FastEq, false).unwrap();
        assert_eq!(fast.best.subset, opt.best);
        if opt.best.is_empty() {
            assert!(fast.stopped_at.is_some());
        }
    }

    #[test]
    fn infeasible_sizes_are_infinite() {
        let base = SynthSpec::new(20, 2).seed(4).generate();
        let cols = vec![
            base.column(0).to_vec(),
            base.column(0).to_vec(),
            base.column(1).to_vec(),
        ];
        let d = Dataset::from_columns(cols, base.response().to_vec()).unwrap();
        let g = GramSystem::build(&d).unwrap();
        let deps = crate::dependencies::find_dependencies(&d);
        let r = best_subset_k(&g, &deps, 3, CardinalityMode::ExactK).unwrap();
        assert!(!r.is_feasible() && r.eta.is_infinite());
        let json = serde_json::to_string(&r).unwrap();
        let back: CardinalityResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
