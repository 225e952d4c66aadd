use serde::{Deserialize, Serialize};

use crate::gram::GramSystem;
use crate::ols::{solve_subset, Objective, ObjectiveValue};
use crate::varset::VarSet;

/// A feasible subset together with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub subset: VarSet,
    pub objective: ObjectiveValue,
    pub rss: f64,
    /// Gram-indexed coefficients (`[0]` is the intercept).
    pub beta: Vec<f64>,
}

impl Incumbent {
    /// Fit `subset` from scratch and score it.
    pub fn evaluate(g: &GramSystem, subset: VarSet) -> Self {
        let fit = solve_subset(g, subset);
        Incumbent {
            subset,
            objective: Objective::new(g).eval(fit.rss, subset.len()),
            rss: fit.rss,
            beta: fit.beta,
        }
    }

    pub fn value(&self) -> f64 {
        self.objective.value
    }

    pub fn k(&self) -> usize {
        self.subset.len()
    }
}
