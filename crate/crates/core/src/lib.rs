//! Exact robust submodular maximization under a knapsack constraint.
//!
//! The solver maximizes `min_i f_i(x)/α_i` over placements `x` that fit a
//! budget, where every `f_i` is a monotone submodular set function. It
//! alternates between a relaxed master problem over submodular cuts and an
//! oracle-driven separation step.

pub mod cuts;
pub mod dcg;
pub mod error;
pub mod master;
pub mod report;
pub mod rsm3;
pub mod setfn;
pub mod subset;
pub mod water;

pub use cuts::{build_cut, dominates, empty_set_cuts, facet_check, FacetDiagnostic, SubmodularCut};
pub use dcg::{brute_force, find_set_routine, min_index, solve_rsm, solve_rsm_seeded, DcgConfig, SolveReport, SolveStatus};
pub use error::{Error, Result};
pub use master::{node_bound, Knapsack, MasterOptions, MasterSolution, MasterState, MasterStatus};
pub use rsm3::{early_exit_check, rescale_cuts, solve_rsm3, solve_single_submodmax, Rsm3Config, Rsm3Report, ScenarioBounds};
pub use setfn::{check_submodular, marginal, Memoized, Modular, SetFunction, WeightedCoverage};
pub use subset::Subset;
