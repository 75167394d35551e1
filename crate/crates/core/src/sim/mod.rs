//! Spatial Monte-Carlo simulation of NPRACH contention.

pub mod deployment;
pub mod estimate;
pub mod geometry;
pub mod trial;

pub use deployment::{thin_and_assign, Deployment};
pub use estimate::{
    count_outcomes, desk_scale, estimate_joint_symbol_success, estimate_success_prob,
    rescale_density, run_replication, RachEstimate, SamplingMode, SimConfig, TaggingPolicy,
    ASSOCIATION_WINDOW_CELLS, DESK_AREA_KM2, DESK_ENB_DENSITY, DESK_FIELD_INTERFERERS,
    DESK_MAX_AREA_KM2, REDRAW_BUDGET,
};
pub use geometry::{associate_nearest, sample_ppp, EnbIndex, Point, Region};
pub use trial::{simulate_trial, TrialOutcome};
