//! Detection of linear dependency among the intercept and predictor columns.
//!
//! Columns are scanned left to right against a growing independent basis
//! (modified Gram-Schmidt with one reorthogonalization pass). A column whose
//! residual after projection is at most [`DEPENDENCY_TOL`] times its own norm
//! is recorded together with the coefficients expressing it in the basis.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::varset::VarSet;

/// Relative residual below which a column counts as dependent.
pub const DEPENDENCY_TOL: f64 = 1e-8;
/// Relative contribution below which a coefficient counts as zero.
pub const COEFFICIENT_TOL: f64 = 1e-10;

/// One dependency found by [`find_dependencies`]:
/// `x_dependent = intercept_coef * 1 + sum_k coef_k * x_k` over `basis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentSet {
    /// Predictor index of the column that is a combination of earlier ones.
    pub dependent: usize,
    /// Earlier predictors with a nonzero coefficient.
    pub basis: VarSet,
    /// Whether the intercept takes part with a nonzero coefficient.
    pub intercept: bool,
    pub intercept_coef: f64,
    /// `(predictor, coefficient)` for every member of `basis`.
    pub coefficients: Vec<(usize, f64)>,
}

impl DependentSet {
    /// `basis ∪ {dependent}`: a set whose columns, together with the
    /// intercept, are linearly dependent. No optimal subset contains all of it.
    pub fn members(&self) -> VarSet {
        self.basis.with(self.dependent)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DependencyCollection {
    sets: Vec<DependentSet>,
}

impl DependencyCollection {
    pub fn new(sets: Vec<DependentSet>) -> Self {
        DependencyCollection { sets }
    }

    /// A collection from bare member sets, as used when hand-building nodes.
    pub fn from_member_sets(sets: impl IntoIterator<Item = VarSet>) -> Self {
        DependencyCollection {
            sets: sets
                .into_iter()
                .map(|m| {
                    let dependent = m.iter().last().expect("empty dependent set");
                    DependentSet {
                        dependent,
                        basis: m.without(dependent),
                        intercept: false,
                        intercept_coef: 0.0,
                        coefficients: Vec::new(),
                    }
                })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[DependentSet] {
        &self.sets
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DependentSet> {
        self.sets.iter()
    }

    pub fn member_sets(&self) -> impl Iterator<Item = VarSet> + '_ {
        self.sets.iter().map(DependentSet::members)
    }
}

/// Greedy scan of columns `0..=p` (intercept first) for linear dependency.
pub fn find_dependencies(d: &Dataset) -> DependencyCollection {
    let n = d.n();
    let ones = vec![1.0; n];
    let cols: Vec<&[f64]> = std::iter::once(ones.as_slice())
        .chain(d.columns().iter().map(Vec::as_slice))
        .collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();

    // accepted[i] is the column index of orthonormal vector q[i];
    // r[i] holds column i of the triangular factor.
    let mut accepted: Vec<usize> = Vec::new();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r: Vec<Vec<f64>> = Vec::new();
    let mut sets = Vec::new();

    for (c, col) in cols.iter().enumerate() {
        let mut v = col.to_vec();
        let mut proj = vec![0.0; q.len()];
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let t = dot(qi, &v);
                proj[i] += t;
                axpy(-t, qi, &mut v);
            }
        }
        let resid = norm(&v);
        if resid > DEPENDENCY_TOL * norms[c] {
            v.iter_mut().for_each(|x| *x /= resid);
            q.push(v);
            proj.push(resid);
            r.push(proj);
            accepted.push(c);
            continue;
        }

        // Solve the triangular system R alpha = proj.
        let m = accepted.len();
        let mut alpha = proj;
        for i in (0..m).rev() {
            let mut s = alpha[i];
            for k in i + 1..m {
                s -= r[k][i] * alpha[k];
            }
            alpha[i] = s / r[i][i];
        }
        let scale = norms[c].max(f64::MIN_POSITIVE);
        let mut basis = VarSet::empty();
        let mut coefficients = Vec::new();
        let mut intercept_coef = 0.0;
        let mut intercept = false;
        for (i, &col_idx) in accepted.iter().enumerate() {
            let significant = alpha[i].abs() * norms[col_idx] > COEFFICIENT_TOL * scale;
            if col_idx == 0 {
                intercept_coef = alpha[i];
                intercept = significant;
            } else if significant {
                basis.insert(col_idx - 1);
                coefficients.push((col_idx - 1, alpha[i]));
            }
        }
        sets.push(DependentSet {
            dependent: c - 1,
            basis,
            intercept,
            intercept_coef,
            coefficients,
        });
    }
    DependencyCollection { sets }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SynthSpec;

    fn residual_ratio(d: &Dataset, s: &DependentSet) -> f64 {
        let target = d.column(s.dependent);
        let mut fit = vec![s.intercept_coef; d.n()];
        for &(k, a) in &s.coefficients {
            for (f, x) in fit.iter_mut().zip(d.column(k)) {
                *f += a * x;
            }
        }
        let r: f64 = fit.iter().zip(target).map(|(f, t)| (f - t).powi(2)).sum::<f64>().sqrt();
        r / norm(target).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn duplicated_column() {
        let x1 = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let d = Dataset::from_columns(vec![x1.clone(), x1], vec![1.0, 2.0, 0.0, 4.0, 3.0]).unwrap();
        let deps = find_dependencies(&d);
        assert_eq!(deps.len(), 1);
        let s = &deps.sets()[0];
        assert_eq!(s.dependent, 1);
        assert_eq!(s.basis.to_vec(), vec![0]);
        assert!((s.coefficients[0].1 - 1.0).abs() < 1e-12);
        assert!(!s.intercept);
    }

    #[test]
    fn sum_of_two_columns() {
        let x1 = vec![1.0, 3.0, 2.0, 5.0, 4.0, 0.5];
        let x2 = vec![2.0, -1.0, 0.0, 1.0, 7.0, 3.0];
        let x3: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        let d = Dataset::from_columns(vec![x1, x2, x3], vec![1.0; 6]).unwrap();
        let deps = find_dependencies(&d);
        assert_eq!(deps.len(), 1);
        let s = &deps.sets()[0];
        assert_eq!((s.dependent, s.basis.to_vec()), (2, vec![0, 1]));
        for &(_, a) in &s.coefficients {
            assert!((a - 1.0).abs() < 1e-10);
        }
        assert_eq!(s.members().to_vec(), vec![0, 1, 2]);
    }

    #[test]
    fn constant_column_depends_on_intercept() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 4.0], vec![5.0, 5.0, 5.0]], vec![0.0, 1.0, 3.0]).unwrap();
        let deps = find_dependencies(&d);
        assert_eq!(deps.len(), 1);
        let s = &deps.sets()[0];
        assert_eq!(s.dependent, 1);
        assert!(s.basis.is_empty());
        assert!(s.intercept);
        assert!((s.intercept_coef - 5.0).abs() < 1e-12);
        assert_eq!(s.members().to_vec(), vec![1]);
    }

    #[test]
    fn independent_data_has_no_dependencies() {
        let d = SynthSpec::new(50, 5).seed(4).generate();
        assert!(find_dependencies(&d).is_empty());
    }

    #[test]
    fn residual_invariant_and_determinism() {
        for seed in 0..10 {
            let d = SynthSpec::new(30, 8).dependencies(3).seed(seed).generate();
            let deps = find_dependencies(&d);
            assert!(!deps.is_empty());
            for s in deps.iter() {
                assert!(!s.members().is_empty());
                assert!(residual_ratio(&d, s) <= 1e-8, "seed {seed}: {s:?}");
            }
            assert_eq!(deps, find_dependencies(&d));
            let std = d.standardize().unwrap();
            assert_eq!(
                find_dependencies(&std).member_sets().collect::<Vec<_>>(),
                deps.member_sets().collect::<Vec<_>>()
            );
        }
    }
}
