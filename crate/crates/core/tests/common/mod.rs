#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use subset_aic::{Dataset, GramSystem, SynthSpec, VarSet};

/// Small random instance for the oracle suites. Every third one carries
/// exact linear dependencies (injected combinations, or a one-hot group).
pub fn oracle_instance(i: u64) -> (String, Dataset) {
    let n = 20 + (i * 7919 % 41) as usize;
    let p = 4 + (i * 104729 % 11) as usize;
    let spec = SynthSpec::new(n, p).seed(1000 + i);
    let spec = match i % 3 {
        0 if p >= 6 && i.is_multiple_of(2) => spec.one_hot(&[3]).dependencies(1),
        0 if p >= 5 => spec.dependencies(1 + (p >= 8) as usize),
        0 => spec.one_hot(&[p.min(3)]),
        _ => spec,
    };
    let label = format!("#{i} n={n} p={p} deps={} one_hot={:?}", spec.dependencies, spec.one_hot);
    (label, spec.generate())
}

pub fn has_injected_dependency(i: u64) -> bool {
    i.is_multiple_of(3)
}

pub fn gram(d: &Dataset) -> GramSystem {
    GramSystem::build(d).unwrap()
}

/// Residual sum of squares by SVD least squares on the raw design matrix.
pub fn dense_rss(d: &Dataset, subset: VarSet) -> f64 {
    let n = d.n();
    let cols: Vec<usize> = subset.iter().collect();
    let x = DMatrix::from_fn(
        n,
        cols.len() + 1,
        |r, c| if c == 0 { 1.0 } else { d.column(cols[c - 1])[r] },
    );
    let y = DVector::from_column_slice(d.response());
    let svd = x.clone().svd(true, true);
    let eps = 1e-10 * svd.singular_values.max();
    let beta = svd.solve(&y, eps).unwrap();
    (y - x * beta).norm_squared()
}

/// `n log(max(rss, floor)) + 2k`, computed without the library.
pub fn dense_objective(d: &Dataset, subset: VarSet) -> f64 {
    let n = d.n() as f64;
    let yty: f64 = d.response().iter().map(|v| v * v).sum();
    let floor = (1e-12 * yty).max(1e-300);
    n * dense_rss(d, subset).max(floor).ln() + 2.0 * subset.len() as f64
}

/// Minimum of [`dense_objective`] over every subset.
pub fn dense_optimum(d: &Dataset) -> (VarSet, f64) {
    let p = d.p();
    let mut best = (VarSet::empty(), f64::INFINITY);
    for bits in 0u128..(1u128 << p) {
        let s = VarSet::from_bits(bits);
        let v = dense_objective(d, s);
        if v < best.1 {
            best = (s, v);
        }
    }
    best
}

/// Every completion of a node: `z1` plus any subset of `free`.
pub fn completions(z1: VarSet, free: VarSet) -> impl Iterator<Item = VarSet> {
    let free: Vec<usize> = free.iter().collect();
    (0u64..(1u64 << free.len())).map(move |mask| {
        let mut s = z1;
        for (i, &j) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s.insert(j);
            }
        }
        s
    })
}
