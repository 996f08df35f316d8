//! Weighted-contrast shift estimation with adaptive filter-length selection.
//!
//! For each Pinsker length `K` the contrast is maximized over a shift grid
//! giving `M(K)` and `tau_hat(K)`. The concave hull of `K -> M(K)` yields the
//! penalty thresholds at which `argmin_K { -M(K) + alpha K }` jumps, and the
//! shift collecting the largest total jump in slope is returned.

mod baseline;
mod estimate;
mod filter;
mod grid;
mod hull;
mod profile;
mod select;

pub use baseline::baseline_crosscorr_shift;
pub use estimate::{
    estimate_shift, estimate_shift_fixed_filter, estimate_shifts_panel, parabolic_offset, EstimatorConfig,
    ShiftEstimate, ShiftEstimator, DEFAULT_BETA, DEFAULT_GRID_POINTS, DEFAULT_MAX_LENGTH,
};
pub use filter::{
    filter_condition_report, make_pinsker_filter, make_projection_filter, Filter, FilterConditionReport, FilterKind,
    TailCondition,
};
pub use grid::TauGrid;
pub use hull::{hull_path, khat_of_alpha, HullPath, HullTermination};
pub use profile::{criterion_profile, CriterionProfile, ProfilePlan};
pub use select::{select_shift, select_shift_with, FirstJump, ShiftSelection};
