//! Exact best-subset selection for linear regression under AIC.
//!
//! The objective is `n log(rss) + 2k`, which differs from the Gaussian AIC
//! only by a constant depending on `n` ([`ols::full_aic`] adds it back).
//! [`bnb::solve`] finds a global minimizer by branch-and-bound;
//! [`enumerate::enumerate_all`] is the brute-force reference for small `p`.
//!
//! ```
//! use subset_aic::{find_dependencies, solve, GramSystem, SolverConfig, SynthSpec};
//!
//! let data = SynthSpec::new(40, 8).seed(7).generate().standardize()?;
//! let gram = GramSystem::build(&data)?;
//! let deps = find_dependencies(&data);
//! let report = solve(&gram, &deps, &SolverConfig::default())?;
//! assert_eq!(report.status.name(), "optimal");
//! # Ok::<(), subset_aic::Error>(())
//! ```

pub mod bnb;
pub mod branching;
pub mod cardinality;
pub mod data;
pub mod dependencies;
pub mod enumerate;
pub mod error;
pub mod gram;
pub mod ols;
pub mod solution;
pub mod stepwise;
pub mod synth;
pub mod varset;

pub use bnb::{solve, NodeState, SearchOrder, SolveReport, SolverConfig, Status};
pub use branching::{BranchingRule, SolutionPool};
pub use cardinality::{best_subset_k, k_cap, sweep_fast, sweep_naive, CardinalityMode, SweepMode, SweepReport};
pub use data::{load_csv, read_csv, Dataset, ResponseColumn};
pub use dependencies::{find_dependencies, DependencyCollection, DependentSet};
pub use enumerate::{enumerate_all, Enumeration};
pub use error::{Error, Result};
pub use gram::GramSystem;
pub use ols::{full_aic, gap_percent, solve_subset, Objective, ObjectiveValue, OlsFit};
pub use solution::Incumbent;
pub use stepwise::{sw_backward, sw_forward, StepwiseReport};
pub use synth::SynthSpec;
pub use varset::VarSet;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/objective.md")]
    mod objective {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/dependencies.md")]
    mod dependencies {}
    #[doc = include_str!("../../../book/src/stepwise.md")]
    mod stepwise {}
    #[doc = include_str!("../../../book/src/branching.md")]
    mod branching {}
    #[doc = include_str!("../../../book/src/cardinality.md")]
    mod cardinality {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
