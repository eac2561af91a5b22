//! Experiment orchestration: convergence studies against an entropy-solution
//! oracle and the property checks built on particle trajectories.
//!
//! Independent particle counts run in parallel; results are collected in the
//! order of `n_values`, so reports are identical across runs and thread counts.

pub mod benchmarks;
mod checks;
mod config;
mod convergence;
pub mod oracles;

pub use checks::{
    check_contraction, check_density_cap, check_entropy, check_maximum_principle,
    check_sign_preservation, check_support, check_tv_uniform, check_w1_lipschitz,
    decreasing_with_slack, strictly_decreasing, EntropyCheck, EntropyRow, SignCheck, SupportCheck,
};
pub use config::{ContractionConfig, EntropyConfig, ExperimentConfig, ReferenceKind, Tolerances};
pub use convergence::{run_convergence, ConvergenceReport, NRow, ReportFlags};
pub use oracles::{run_metric_oracles, OracleReport};
