//! Independent reference computations used by tests and the `verify`
//! command. Nothing on the solver path depends on this module.

mod bruteforce;
mod finite_difference;
mod ground_truth;
mod hardness;
pub mod instances;
mod monitor;
mod reference;
mod suites;

pub use bruteforce::{gradient_mapping_bruteforce, models_at, REFINEMENT_ROUNDS};
pub use finite_difference::{finite_difference_gradient, relative_error};
pub use ground_truth::min_norm_ground_truth;
pub use hardness::{hardness_stall, lower_bound_floor, lower_bound_floor_value, FloorReport, StallReport};
pub use monitor::{
    monitor_with_cap, monitor_zero_respecting, support, Query, QueryKind, Side, SupportLedger, Violation,
    DEFAULT_POINT_CAP,
};
pub use reference::{long_run_reference, psi_star_bounds, psi_star_reference, PsiReference, ELLIPSOID_MAX_DIM, REFERENCE_MAX_ITERATIONS};
pub use suites::{format_table, run_suite, CheckResult, Suite};
