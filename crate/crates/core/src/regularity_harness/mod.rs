//! Weighted space-time norms, Monte-Carlo expectations and the experiments
//! behind the regularity estimates.

mod config;
mod data;
mod estimates;
mod experiments;
mod norms;
mod report;
pub mod suite;
mod weighted;

pub use config::{
    parse_config, CoefficientsConfig, DataConfig, ExperimentConfig, ExperimentParams, GridConfig,
    McConfig, NormsConfig, TimeConfig,
};
pub use data::{build_data, FieldSpec, DEGENERACY_FLOOR};
pub use estimates::{
    estimate_a_from_terms, estimate_b_from_terms, run_paths, verify_estimate_a, verify_estimate_b,
    NormPair, PathTerms, RunPlan,
};
pub use experiments::{
    estimate_b_envelope, fit_line, kappa_scaling_experiment, random_family, sharpness_experiment,
    timechange_check, EnvelopeLine, EnvelopeReport, FitStatus, KappaScalingReport, ScalingTerm,
    SharpnessReport, TimeChangeReport, ENVELOPE_STABILITY, FIT_RESIDUAL_LIMIT, IDENTITY_TOLERANCE,
    SLOPE_TOLERANCE, TIME_CHANGE_TOLERANCE,
};
pub use norms::{derivative_norm, weighted_time_sum, Derivative, SpatialNorm};
pub use report::{estimates_csv, report_json, write_estimates, EstimateReport, EstimateStatus};
pub use weighted::{
    forcing_weighted_integral, interval_weights, path_sup, path_weighted_integral,
    sup_norm_expectation, weighted_spacetime_norm, McValue, WeightedNormSpec,
};
