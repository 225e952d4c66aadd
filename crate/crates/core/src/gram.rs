//! Inner-product aggregates of the intercept-augmented design.

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Inner products of `[1 x_1 ... x_p]` with itself and with the response.
///
/// Gram index 0 is the all-ones intercept column and predictor `j` (0-based)
/// lives at Gram index `j + 1`. Every subset least-squares problem is solved
/// from these aggregates without revisiting the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    dim: usize,
    /// Row-major `dim x dim`.
    g: Vec<f64>,
    b: Vec<f64>,
    yty: f64,
    n: usize,
}

impl GramSystem {
    /// Accumulate `G`, `b` and `y·y` in a single pass over the rows.
    pub fn build(d: &Dataset) -> Result<Self> {
        let p = d.p();
        let dim = p + 1;
        let n = d.n();
        let mut g = vec![0.0; dim * dim];
        let mut b = vec![0.0; dim];
        let mut yty = 0.0;
        let mut row = vec![1.0; dim];
        for i in 0..n {
            for j in 0..p {
                row[j + 1] = d.column(j)[i];
            }
            let y = d.response()[i];
            for r in 0..dim {
                let xr = row[r];
                b[r] += xr * y;
                let base = r * dim;
                for c in r..dim {
                    g[base + c] += xr * row[c];
                }
            }
            yty += y * y;
        }
        for r in 0..dim {
            for c in 0..r {
                g[r * dim + c] = g[c * dim + r];
            }
        }
        if !(g.iter().chain(&b).all(|v| v.is_finite()) && yty.is_finite()) {
            return Err(Error::Overflow);
        }
        Ok(GramSystem { dim, g, b, yty, n })
    }

    /// Construct from precomputed aggregates (`g` row-major, symmetric).
    pub fn from_parts(g: Vec<f64>, b: Vec<f64>, yty: f64, n: usize) -> Result<Self> {
        let dim = b.len();
        if dim < 2 || g.len() != dim * dim {
            return Err(Error::Config("Gram dimensions do not match".into()));
        }
        Ok(GramSystem { dim, g, b, yty, n })
    }

    /// `p + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> usize {
        self.dim - 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn g(&self, r: usize, c: usize) -> f64 {
        self.g[r * self.dim + c]
    }

    #[inline]
    pub fn b(&self, r: usize) -> f64 {
        self.b[r]
    }

    pub fn yty(&self) -> f64 {
        self.yty
    }

    /// Submatrix over the given Gram indices, row-major.
    pub fn submatrix(&self, idx: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(idx.len() * idx.len());
        for &r in idx {
            for &c in idx {
                out.push(self.g(r, c));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_products() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 3.0]], vec![1.0, 2.0, 3.0]).unwrap();
        let g = GramSystem::build(&d).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.submatrix(&[0, 1]), vec![3.0, 6.0, 6.0, 14.0]);
        assert_eq!((g.b(0), g.b(1)), (6.0, 14.0));
        assert_eq!(g.yty(), 14.0);
        assert_eq!(g.n(), 3);
    }

    #[test]
    fn standardized_columns_are_orthogonal_to_intercept() {
        let d = crate::synth::SynthSpec::new(30, 5)
            .seed(2)
            .generate()
            .standardize()
            .unwrap();
        let g = GramSystem::build(&d).unwrap();
        assert_eq!(g.g(0, 0), 30.0);
        for j in 1..g.dim() {
            assert!(g.g(0, j).abs() < 1e-10);
            assert!((g.g(j, j) - 29.0).abs() <= 1e-12 * 29.0);
        }
    }

    #[test]
    fn symmetric() {
        let d = crate::synth::SynthSpec::new(15, 4).seed(9).generate();
        let g = GramSystem::build(&d).unwrap();
        for r in 0..g.dim() {
            for c in 0..g.dim() {
                assert_eq!(g.g(r, c), g.g(c, r));
            }
        }
    }
}
