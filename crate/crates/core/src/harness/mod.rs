//! Experiment runners: sweeps, grids, error injection, size scaling and the
//! entanglement scan, with deterministic per-task random streams and CSV output.

mod config;
mod experiments;
mod initial;
mod output;

pub use config::{ExperimentConfig, LawConfig, Setup};
pub use experiments::{
    entangle_run, linear_fit, optimize_p, robustness_scan, run_single, scaling_study, spectrum_table, steady_mean,
    sweep_initial_sites, sweep_random, sweep_theta, EntangleResult, ErrorChannel, ErrorModel, LinearFit, ScalingResult,
};
pub use initial::{
    draw_two_site, gaussian_state, mix_initial_error, random_initial_state, task_rng, two_site_state, InitialForm,
    TwoSiteDraw,
};
pub use output::{write_trajectory_csv, Param, SweepRow, SweepTable};
