//! Monte Carlo verification harness.
//!
//! A verification run is described by an [`ExperimentConfig`], executed by
//! one of the `verify_*` / `estimate_*` functions (or [`run_experiment`] by
//! name), and summarized as an [`ExperimentReport`] whose estimates carry
//! explicit targets, bands, and decision rules. [`run_suite`] strings
//! configurations together and tolerates per-experiment failures.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{parse_x0_spec, ExperimentConfig};
pub use experiments::{
    default_suite, estimate_negativity, estimate_negativity_diagnostic, run_experiment, run_suite,
    verify_comparison, verify_laplace, verify_laplace_exact, verify_noncollision,
    verify_polynomial_dynamics, verify_psd_retention, EXPERIMENTS,
};
pub use report::{
    Estimate, ExperimentReport, PathSummary, Rule, SuiteOutcome, SuiteSummary, Verdict,
};
