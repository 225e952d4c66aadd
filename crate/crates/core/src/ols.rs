//! Subset least squares on the Gram system and the objective arithmetic.
//!
//! A subset fit factors the Gram submatrix over `{intercept} ∪ S` with a
//! row-oriented Cholesky factorization. Rows are appended one column at a
//! time, so a factor can grow incrementally and an ascending-order build is
//! bit-identical to any other ascending-order build of the same subset. A
//! column whose pivot falls below [`PIVOT_TOL`] times its own diagonal is
//! linearly dependent on the columns already present; it is dropped and the
//! fit proceeds without it, which leaves the minimal residual unchanged.

use serde::{Deserialize, Serialize};

use crate::gram::GramSystem;
use crate::varset::VarSet;

/// Relative pivot threshold for dropping a column during factorization.
pub const PIVOT_TOL: f64 = 1e-10;
/// Relative threshold under which a fitted coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Incremental Cholesky factor of a Gram submatrix.
#[derive(Debug, Clone)]
pub struct Factor<'g> {
    gram: &'g GramSystem,
    /// Accepted Gram indices, in insertion order.
    cols: Vec<usize>,
    /// Packed lower-triangular rows; row `r` occupies `r + 1` entries.
    l: Vec<f64>,
    /// `L^{-1} b` over the accepted columns.
    w: Vec<f64>,
    ssq: f64,
    dropped: Vec<usize>,
}

/// Saved size of a [`Factor`], for cheap backtracking.
#[derive(Debug, Clone, Copy)]
pub struct Checkpoint {
    cols: usize,
    l: usize,
    dropped: usize,
    ssq: f64,
}

impl<'g> Factor<'g> {
    /// A factor holding only the intercept.
    pub fn new(gram: &'g GramSystem) -> Self {
        let mut f = Factor {
            gram,
            cols: Vec::with_capacity(gram.dim()),
            l: Vec::new(),
            w: Vec::new(),
            ssq: 0.0,
            dropped: Vec::new(),
        };
        f.push_gram_index(0);
        f
    }

    /// Factor over the intercept plus `set`, in ascending order.
    pub fn for_set(gram: &'g GramSystem, set: VarSet) -> Self {
        let mut f = Factor::new(gram);
        for j in set {
            f.push(j);
        }
        f
    }

    /// Append predictor `j`. Returns `false` when the column was dropped.
    pub fn push(&mut self, j: usize) -> bool {
        self.push_gram_index(j + 1)
    }

    fn push_gram_index(&mut self, c: usize) -> bool {
        let g = self.gram;
        let m = self.cols.len();
        let start = self.l.len();
        let mut row_off = 0;
        for t in 0..m {
            let mut s = g.g(c, self.cols[t]);
            for u in 0..t {
                s -= self.l[start + u] * self.l[row_off + u];
            }
            self.l.push(s / self.l[row_off + t]);
            row_off += t + 1;
        }
        let diag = g.g(c, c);
        let mut d = diag;
        for u in 0..m {
            let v = self.l[start + u];
            d -= v * v;
        }
        if d.is_nan() || d <= PIVOT_TOL * diag {
            self.l.truncate(start);
            self.dropped.push(c);
            return false;
        }
        let piv = d.sqrt();
        self.l.push(piv);
        let mut s = g.b(c);
        for u in 0..m {
            s -= self.l[start + u] * self.w[u];
        }
        let wc = s / piv;
        self.w.push(wc);
        self.ssq += wc * wc;
        self.cols.push(c);
        true
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            cols: self.cols.len(),
            l: self.l.len(),
            dropped: self.dropped.len(),
            ssq: self.ssq,
        }
    }

    pub fn rollback(&mut self, cp: Checkpoint) {
        self.cols.truncate(cp.cols);
        self.w.truncate(cp.cols);
        self.l.truncate(cp.l);
        self.dropped.truncate(cp.dropped);
        self.ssq = cp.ssq;
    }

    /// Residual sum of squares of the current fit.
    pub fn rss(&self) -> f64 {
        (self.gram.yty() - self.ssq).max(0.0)
    }

    /// Number of accepted columns, intercept included.
    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// Predictor indices dropped for rank deficiency.
    pub fn dropped(&self) -> VarSet {
        self.dropped.iter().map(|&c| c - 1).collect()
    }

    /// Coefficients indexed like the Gram system (`[0]` is the intercept);
    /// entries for absent or dropped columns are zero.
    pub fn coefficients(&self) -> Vec<f64> {
        let m = self.cols.len();
        let row_start = |r: usize| r * (r + 1) / 2;
        let mut x = self.w.clone();
        for r in (0..m).rev() {
            let mut s = x[r];
            for (k, xk) in x.iter().enumerate().take(m).skip(r + 1) {
                s -= self.l[row_start(k) + r] * xk;
            }
            x[r] = s / self.l[row_start(r) + r];
        }
        let mut beta = vec![0.0; self.gram.dim()];
        for (&c, v) in self.cols.iter().zip(x) {
            beta[c] = v;
        }
        beta
    }

    pub fn into_fit(self, subset: VarSet) -> OlsFit {
        let rss = self.rss();
        OlsFit {
            subset,
            beta: self.coefficients(),
            rss,
            sigma2: rss / self.gram.n() as f64,
            dropped: self.dropped(),
        }
    }
}

/// Least-squares fit of the response on the intercept plus a subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub subset: VarSet,
    /// Gram-indexed coefficients: `beta[0]` is the intercept and
    /// `beta[j + 1]` belongs to predictor `j`.
    pub beta: Vec<f64>,
    pub rss: f64,
    /// `rss / n`, the maximum-likelihood error variance.
    pub sigma2: f64,
    /// Members of `subset` removed for rank deficiency.
    pub dropped: VarSet,
}

impl OlsFit {
    pub fn intercept(&self) -> f64 {
        self.beta[0]
    }

    /// Coefficient of predictor `j`.
    pub fn coef(&self, j: usize) -> f64 {
        self.beta[j + 1]
    }

    /// Members of `candidates` whose coefficient is nonzero, judged relative
    /// to the largest coefficient magnitude.
    pub fn nonzero_within(&self, candidates: VarSet, zero_tol: f64) -> VarSet {
        let scale = self.beta.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        candidates
            .iter()
            .filter(|&j| self.coef(j).abs() > zero_tol * scale)
            .collect()
    }
}

/// Minimize `Σ (y_i - b0 - Σ_{j∈S} b_j x_ij)^2` from the Gram aggregates.
pub fn solve_subset(g: &GramSystem, subset: VarSet) -> OlsFit {
    Factor::for_set(g, subset).into_fit(subset)
}

/// Residual sum of squares alone, skipping the back-substitution.
pub fn subset_rss(g: &GramSystem, subset: VarSet) -> f64 {
    Factor::for_set(g, subset).rss()
}

/// `n log(rss) + 2k`, the objective minimized over subsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub value: f64,
    pub k: usize,
    /// `rss` was below the floor and was clamped up to it.
    pub clamped: bool,
}

/// `max(1e-12 · y·y, 1e-300)`: residuals below this count as a perfect fit.
pub fn rss_floor(g: &GramSystem) -> f64 {
    (1e-12 * g.yty()).max(1e-300)
}

/// `n log(max(rss, floor)) + 2k`.
pub fn objective(rss: f64, k: usize, n: usize, floor: f64) -> ObjectiveValue {
    let clamped = rss < floor;
    let r = if clamped { floor } else { rss };
    ObjectiveValue {
        value: n as f64 * r.ln() + 2.0 * k as f64,
        k,
        clamped,
    }
}

/// Objective evaluation bound to one Gram system.
#[derive(Debug, Clone, Copy)]
pub struct Objective {
    pub n: usize,
    pub floor: f64,
}

impl Objective {
    pub fn new(g: &GramSystem) -> Self {
        Objective {
            n: g.n(),
            floor: rss_floor(g),
        }
    }

    pub fn eval(&self, rss: f64, k: usize) -> ObjectiveValue {
        objective(rss, k, self.n, self.floor)
    }

    /// `n log(max(rss, floor))` without the cardinality term.
    pub fn log_term(&self, rss: f64) -> f64 {
        self.n as f64 * rss.max(self.floor).ln()
    }
}

/// The conventional AIC: the objective plus the constant
/// `4 + n (log(2π/n) + 1)` that does not depend on the subset.
pub fn full_aic(objective_value: f64, n: usize) -> f64 {
    let n = n as f64;
    objective_value + 4.0 + n * ((2.0 * std::f64::consts::PI / n).ln() + 1.0)
}

/// Relative optimality gap in percent.
pub fn gap_percent(upper: f64, lower: f64) -> f64 {
    (upper - lower) / upper.abs().max(1.0) * 100.0
}
