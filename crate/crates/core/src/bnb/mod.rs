//! Branch-and-bound over `(Z1, Z0, Z)` nodes.
//!
//! Each node's bound is the least-squares fit free on `Z1 ∪ Z`. The `z_j = 1`
//! child of a node has the same free columns as its parent, so it inherits
//! the parent's bound plus two and is never solved; only `z_j = 0` children
//! cost a solve (and under strong branching that solve already happened
//! while choosing `j`).

mod node;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use node::{
    apply_dependency_fixing, apply_rank_fixing, branch, harvest_incumbent, relax_bound, violates_cut, NodeState,
};

use crate::branching::{select_default, select_most_frequent, select_strong, BranchingRule, SolutionPool};
use crate::dependencies::{DependencyCollection, COEFFICIENT_TOL, DEPENDENCY_TOL};
use crate::enumerate::DEFAULT_ENUMERATION_CAP;
use crate::error::{Error, Result};
use crate::gram::GramSystem;
use crate::ols::{full_aic, gap_percent, rss_floor, OlsFit, PIVOT_TOL, ZERO_TOL};
use crate::solution::Incumbent;
use crate::stepwise::{stepwise_bound, MIN_IMPROVEMENT};
use crate::varset::VarSet;

pub const DEFAULT_TIME_LIMIT: f64 = 5000.0;
pub const DEFAULT_STEPWISE_DEPTH: usize = 10;
pub const DEFAULT_POOL_SIZE: usize = 10;
pub const DEFAULT_PRUNE_TOL: f64 = 1e-9;
/// A candidate must beat the incumbent by more than this to replace it.
pub const INCUMBENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchOrder {
    /// Smallest bound first; ties to the deeper node, then the older one.
    BestFirst,
    DepthFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub branching: BranchingRule,
    pub pool_size: usize,
    /// Run the stepwise bound at nodes no deeper than this. `None` disables it.
    pub stepwise_depth: Option<usize>,
    pub node_limit: Option<u64>,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub order: SearchOrder,
    pub prune_tol: f64,
    pub zero_tol: f64,
    pub enumeration_cap: usize,
    /// Use strong branching only at nodes with at most this many free variables.
    pub strong_cap: Option<usize>,
    /// Turning this off explores the whole tree; meant for testing.
    pub pruning: bool,
    /// Also fix any free column that is collinear with the intercept and `Z1`,
    /// checked from the Gram matrix at every node.
    pub dynamic_dependency_check: bool,
    /// Record one [`NodeTrace`] per visited node.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            branching: BranchingRule::Auto,
            pool_size: DEFAULT_POOL_SIZE,
            stepwise_depth: Some(DEFAULT_STEPWISE_DEPTH),
            node_limit: None,
            time_limit: Some(DEFAULT_TIME_LIMIT),
            order: SearchOrder::BestFirst,
            prune_tol: DEFAULT_PRUNE_TOL,
            zero_tol: ZERO_TOL,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            strong_cap: None,
            pruning: true,
            dynamic_dependency_check: false,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_branching(mut self, rule: BranchingRule) -> Self {
        self.branching = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=100).contains(&self.pool_size) {
            return Err(Error::Config(format!("pool size {} outside 1..=100", self.pool_size)));
        }
        if self.node_limit == Some(0) {
            return Err(Error::Config("node limit must be positive".into()));
        }
        if let Some(t) = self.time_limit {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Config(format!("time limit {t} must be positive")));
            }
        }
        if !(0.0..=1e-3).contains(&self.prune_tol) {
            return Err(Error::Config(format!(
                "prune tolerance {} outside [0, 1e-3]",
                self.prune_tol
            )));
        }
        if !(self.zero_tol >= 0.0 && self.zero_tol < 1.0) {
            return Err(Error::Config(format!(
                "zero tolerance {} outside [0, 1)",
                self.zero_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    NodeLimit,
    TimeLimit,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::NodeLimit => "node-limit",
            Status::TimeLimit => "time-limit",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Nodes taken off the frontier and processed.
    pub nodes: u64,
    /// Relaxations solved while processing nodes.
    pub relaxations: u64,
    /// Relaxations solved by strong branching.
    pub strong_solves: u64,
    pub stepwise_evaluations: u64,
    /// Nodes discarded by bound, whether on creation, on removal or after processing.
    pub pruned: u64,
    /// Variables fixed to zero by dependency fixing.
    pub fixings: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub prune: f64,
    pub zero: f64,
    pub pivot: f64,
    pub dependency: f64,
    pub dependency_coefficient: f64,
    pub incumbent: f64,
    pub stepwise_improvement: f64,
    pub rss_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeAction {
    Pruned,
    Leaf,
    Branched,
}

/// One visited node, after dependency fixing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTrace {
    pub id: u64,
    pub parent: Option<u64>,
    pub depth: usize,
    pub z1: VarSet,
    pub z0: VarSet,
    pub lower: f64,
    pub inherited: bool,
    pub action: NodeAction,
    pub branched_on: Option<usize>,
    pub incumbent: f64,
    pub global_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: Status,
    pub best: Incumbent,
    pub full_aic: f64,
    pub lower_bound: f64,
    pub gap_percent: f64,
    pub counters: Counters,
    /// Rule actually used after resolving `auto`.
    pub branching: BranchingRule,
    pub order: SearchOrder,
    pub wall_time_secs: f64,
    pub n: usize,
    pub p: usize,
    pub dependent_sets: usize,
    pub tolerances: Tolerances,
    /// `full_aic - objective`.
    pub aic_offset: f64,
    #[serde(skip)]
    pub trace: Vec<NodeTrace>,
}

impl SolveReport {
    pub fn objective(&self) -> f64 {
        self.best.value()
    }
}

enum Source {
    /// Same relaxation as the parent; bound and harvest already done there.
    Inherited(Rc<OlsFit>),
    /// Relaxation solved during strong branching; harvest still pending.
    Cached(Rc<OlsFit>),
    Unsolved,
}

struct Open {
    state: NodeState,
    id: u64,
    parent: Option<u64>,
    source: Source,
}

struct Frontier {
    order: SearchOrder,
    heap: BinaryHeap<Keyed>,
    stack: Vec<Open>,
}

struct Keyed(Open);

impl Keyed {
    fn key(&self) -> (f64, usize, u64) {
        (self.0.state.lower, self.0.state.depth, self.0.id)
    }
}

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    // BinaryHeap pops the maximum, so "greater" means "explore first".
    fn cmp(&self, other: &Self) -> Ordering {
        let (la, da, ia) = self.key();
        let (lb, db, ib) = other.key();
        lb.total_cmp(&la).then(da.cmp(&db)).then(ib.cmp(&ia))
    }
}

impl Frontier {
    fn new(order: SearchOrder) -> Self {
        Frontier {
            order,
            heap: BinaryHeap::new(),
            stack: Vec::new(),
        }
    }

    fn push(&mut self, node: Open) {
        match self.order {
            SearchOrder::BestFirst => self.heap.push(Keyed(node)),
            SearchOrder::DepthFirst => self.stack.push(node),
        }
    }

    fn pop(&mut self) -> Option<Open> {
        match self.order {
            SearchOrder::BestFirst => self.heap.pop().map(|k| k.0),
            SearchOrder::DepthFirst => self.stack.pop(),
        }
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty() && self.stack.is_empty()
    }

    fn min_lower(&self) -> f64 {
        match self.order {
            SearchOrder::BestFirst => self.heap.peek().map_or(f64::INFINITY, |k| k.0.state.lower),
            SearchOrder::DepthFirst => self.stack.iter().map(|o| o.state.lower).fold(f64::INFINITY, f64::min),
        }
    }

    fn retain(&mut self, mut keep: impl FnMut(&Open) -> bool) -> u64 {
        let before = (self.heap.len() + self.stack.len()) as u64;
        self.heap.retain(|k| keep(&k.0));
        self.stack.retain(|o| keep(o));
        before - (self.heap.len() + self.stack.len()) as u64
    }
}

struct Search<'a> {
    g: &'a GramSystem,
    deps: &'a DependencyCollection,
    cfg: &'a SolverConfig,
    rule: BranchingRule,
    incumbent: Option<Incumbent>,
    pool: SolutionPool,
    counters: Counters,
    next_id: u64,
    global_lower: f64,
    trace: Vec<NodeTrace>,
}

impl Search<'_> {
    fn upper(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, Incumbent::value)
    }

    fn prunable(&self, lower: f64) -> bool {
        let upper = self.upper();
        self.cfg.pruning && upper.is_finite() && lower >= upper - self.cfg.prune_tol * upper.abs().max(1.0)
    }

    fn offer(&mut self, candidate: Incumbent) {
        self.pool.offer(candidate.subset, candidate.value());
        if candidate.value() < self.upper() - INCUMBENT_TOL {
            self.incumbent = Some(candidate);
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn process(&mut self, open: Open, children: &mut Vec<Open>) -> Result<(NodeAction, Option<usize>, NodeState)> {
        let Open { state, id, source, .. } = open;
        let mut node = apply_dependency_fixing(&state, self.deps);
        if self.cfg.dynamic_dependency_check {
            node = apply_rank_fixing(&node, self.g);
        }
        let newly_fixed = node.z0.difference(state.z0).len() as u64;
        self.counters.fixings += newly_fixed;

        let (fit, fresh) = match source {
            Source::Inherited(fit) if newly_fixed == 0 => (fit, false),
            Source::Cached(fit) if newly_fixed == 0 => (fit, true),
            _ => {
                let (lower, fit) = relax_bound(&node, self.g);
                self.counters.relaxations += 1;
                node.lower = node.lower.max(lower);
                node.relax_rss = Some(fit.rss);
                node.inherited = false;
                (Rc::new(fit), true)
            }
        };

        if self.prunable(node.lower) {
            self.counters.pruned += 1;
            return Ok((NodeAction::Pruned, None, node));
        }
        if fresh {
            let candidate = harvest_incumbent(&node, &fit, self.g, self.cfg.zero_tol);
            self.offer(candidate);
        }
        let free = node.free();
        if !free.is_empty() && self.cfg.stepwise_depth.is_some_and(|d| node.depth <= d) {
            let sw = stepwise_bound(&node, self.g);
            self.counters.stepwise_evaluations += sw.forward.evaluations + sw.backward.evaluations;
            self.offer(sw.forward.incumbent);
            self.offer(sw.backward.incumbent);
        }
        if self.prunable(node.lower) {
            self.counters.pruned += 1;
            return Ok((NodeAction::Pruned, None, node));
        }
        if free.is_empty() {
            return Ok((NodeAction::Leaf, None, node));
        }

        let mut strong = None;
        let j = match self.rule {
            BranchingRule::Sb if self.cfg.strong_cap.is_none_or(|cap| free.len() <= cap) => {
                let choice = select_strong(&node, self.g)?;
                self.counters.strong_solves += choice.solves;
                let j = choice.index;
                strong = Some((choice.theta, choice.fit));
                j
            }
            BranchingRule::Mfb => select_most_frequent(&node, &self.pool, &fit)?,
            _ => select_default(&node, &fit)?,
        };
        let (mut one, mut zero) = branch(&node, j)?;

        let one_id = self.fresh_id();
        if violates_cut(one.z1, self.deps) || self.prunable(one.lower) {
            self.counters.pruned += 1;
        } else {
            one.inherited = true;
            children.push(Open {
                state: one,
                id: one_id,
                parent: Some(id),
                source: Source::Inherited(Rc::clone(&fit)),
            });
        }

        let zero_id = self.fresh_id();
        let source = match strong {
            Some((theta, fit)) => {
                zero.lower = zero.lower.max(theta);
                zero.relax_rss = Some(fit.rss);
                Source::Cached(Rc::new(fit))
            }
            None => Source::Unsolved,
        };
        if self.prunable(zero.lower) {
            self.counters.pruned += 1;
        } else {
            zero.inherited = matches!(source, Source::Unsolved);
            children.push(Open {
                state: zero,
                id: zero_id,
                parent: Some(id),
                source,
            });
        }
        Ok((NodeAction::Branched, Some(j), node))
    }
}

/// Find a subset minimizing `n log(rss) + 2k`.
///
/// Stops early only on a node or time limit; the report then carries the
/// best subset found and a valid lower bound.
pub fn solve(g: &GramSystem, deps: &DependencyCollection, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let start = Instant::now();
    let p = g.p();
    let rule = cfg.branching.resolve(deps);
    let mut search = Search {
        g,
        deps,
        cfg,
        rule,
        incumbent: None,
        pool: SolutionPool::new(cfg.pool_size),
        counters: Counters::default(),
        next_id: 0,
        global_lower: f64::NEG_INFINITY,
        trace: Vec::new(),
    };
    let root = NodeState::root(p);
    if violates_cut(root.z1, deps) {
        return Err(Error::Config("a stored dependent set is empty".into()));
    }
    let mut frontier = Frontier::new(cfg.order);
    let root_id = search.fresh_id();
    frontier.push(Open {
        state: root,
        id: root_id,
        parent: None,
        source: Source::Unsolved,
    });

    let mut status = Status::Optimal;
    loop {
        if frontier.is_empty() {
            break;
        }
        if cfg.node_limit.is_some_and(|limit| search.counters.nodes >= limit) {
            status = Status::NodeLimit;
            break;
        }
        if cfg.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t) {
            status = Status::TimeLimit;
            break;
        }
        let open = frontier.pop().expect("frontier is nonempty");
        if search.prunable(open.state.lower) {
            search.counters.pruned += 1;
            continue;
        }
        search.counters.nodes += 1;
        let (id, parent) = (open.id, open.parent);
        let mut children = Vec::with_capacity(2);
        let (action, branched_on, node) = search.process(open, &mut children)?;
        // Depth-first must pop the `z_j = 1` child first, so it goes on top.
        if cfg.order == SearchOrder::DepthFirst {
            children.reverse();
        }
        for child in children {
            frontier.push(child);
        }
        if cfg.trace {
            let lower = search.upper().min(frontier.min_lower());
            search.global_lower = search.global_lower.max(lower);
            search.trace.push(NodeTrace {
                id,
                parent,
                depth: node.depth,
                z1: node.z1,
                z0: node.z0,
                lower: node.lower,
                inherited: node.inherited,
                action,
                branched_on,
                incumbent: search.upper(),
                global_lower: search.global_lower,
            });
        }
    }

    if status != Status::Optimal {
        let search_ref = &search;
        let upper = search_ref.upper();
        let tol = cfg.prune_tol * upper.abs().max(1.0);
        let discarded = frontier.retain(|o| !(cfg.pruning && o.state.lower >= upper - tol));
        search.counters.pruned += discarded;
        if frontier.is_empty() {
            status = Status::Optimal;
        }
    }

    let tracked = search
        .incumbent
        .take()
        .expect("the root relaxation always yields a candidate");
    let best = Incumbent::evaluate(g, tracked.subset);
    let upper = best.value();
    let lower_bound = if frontier.is_empty() {
        upper
    } else {
        upper.min(frontier.min_lower()).max(search.global_lower.min(upper))
    };
    let gap = gap_percent(upper, lower_bound);

    Ok(SolveReport {
        status,
        full_aic: full_aic(upper, g.n()),
        aic_offset: full_aic(0.0, g.n()),
        best,
        lower_bound,
        gap_percent: gap,
        counters: search.counters,
        branching: rule,
        order: cfg.order,
        wall_time_secs: start.elapsed().as_secs_f64(),
        n: g.n(),
        p,
        dependent_sets: deps.len(),
        tolerances: tolerances(g, cfg),
        trace: search.trace,
    })
}

pub fn tolerances(g: &GramSystem, cfg: &SolverConfig) -> Tolerances {
    Tolerances {
        prune: cfg.prune_tol,
        zero: cfg.zero_tol,
        pivot: PIVOT_TOL,
        dependency: DEPENDENCY_TOL,
        dependency_coefficient: COEFFICIENT_TOL,
        incumbent: INCUMBENT_TOL,
        stepwise_improvement: MIN_IMPROVEMENT,
        rss_floor: rss_floor(g),
    }
}
