//! Seeded synthetic regression instances for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;

/// Recipe for a random regression instance.
///
/// Predictors are i.i.d. standard normal. `dependencies` of them are replaced
/// by exact integer combinations of two other columns plus an optional
/// constant shift, and `one_hot` appends indicator groups whose columns sum
/// to the intercept. The response is a sparse linear model plus unit noise.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    pub dependencies: usize,
    /// Sizes of one-hot groups appended after the numeric columns; counted in `p`.
    pub one_hot: Vec<usize>,
    /// Number of predictors with a nonzero true coefficient.
    pub active: usize,
    pub noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n: usize, p: usize) -> Self {
        SynthSpec {
            n,
            p,
            dependencies: 0,
            one_hot: Vec::new(),
            active: p.div_ceil(2),
            noise: 1.0,
            seed: 0,
        }
    }

    pub fn dependencies(mut self, k: usize) -> Self {
        self.dependencies = k;
        self
    }

    pub fn one_hot(mut self, groups: &[usize]) -> Self {
        self.one_hot = groups.to_vec();
        self
    }

    pub fn active(mut self, k: usize) -> Self {
        self.active = k;
        self
    }

    pub fn noise(mut self, sd: f64) -> Self {
        self.noise = sd;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn generate(&self) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let hot: usize = self.one_hot.iter().sum();
        assert!(hot <= self.p, "one-hot groups exceed p");
        let numeric = self.p - hot;
        assert!(
            self.dependencies == 0 || numeric >= self.dependencies + 2,
            "not enough numeric columns for the requested dependencies"
        );
        let base = numeric - self.dependencies;
        let n = self.n;

        let mut cols: Vec<Vec<f64>> = (0..base)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        for _ in 0..self.dependencies {
            let a = rng.random_range(0..base);
            let mut b = rng.random_range(0..base - 1);
            if b >= a {
                b += 1;
            }
            let ca = [1.0, 2.0, -1.0][rng.random_range(0..3)];
            let cb = [1.0, -1.0, 3.0][rng.random_range(0..3)];
            let shift = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            let col = (0..n).map(|i| ca * cols[a][i] + cb * cols[b][i] + shift).collect();
            cols.push(col);
        }
        cols.shuffle(&mut rng);
        for &size in &self.one_hot {
            let labels: Vec<usize> = (0..n)
                .map(|i| if i < size { i } else { rng.random_range(0..size) })
                .collect();
            for level in 0..size {
                cols.push(labels.iter().map(|&l| if l == level { 1.0 } else { 0.0 }).collect());
            }
        }

        let mut order: Vec<usize> = (0..self.p).collect();
        order.shuffle(&mut rng);
        let mut beta = vec![0.0; self.p];
        for &j in order.iter().take(self.active.min(self.p)) {
            let mag: f64 = rng.random_range(0.3..1.5);
            beta[j] = if rng.random_bool(0.5) { mag } else { -mag };
        }
        let y = (0..n)
            .map(|i| {
                let signal: f64 = cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum();
                let e: f64 = rng.sample(StandardNormal);
                signal + self.noise * e
            })
            .collect();
        Dataset::from_columns(cols, y).expect("synthetic data is valid")
    }
}
