//! Seeded Monte Carlo sweeps over data models and estimators, with CSV output.
//!
//! Trials CSV columns, in order: `cell, trial, estimator, seed, ambient_dim,
//! subspace_dim, n_in, n_out, snr, noise_eps, status, theta1, recovered,
//! iterations, energy, kappa_d, lower_bound`. Wall times go to a separate
//! `timing.csv` so that reruns produce byte-identical trial files.

mod config;
mod report;
mod seed;
mod sweep;

pub use config::{Cell, EstimatorSpec, ExperimentConfig, ModelConfig, ModelKind};
pub use report::{crossing, report_phase_transition, write_curves, Crossing, PhaseLine, PhaseReport};
pub use seed::{splitmix64, trial_seed};
pub use sweep::{
    generate, resolve_workers, run_sweep, run_trial, summarize, sweep, write_summary, write_timing, write_trials,
    SummaryRow, SweepOutput, TrialResult, SUMMARY_HEADER, TIMING_HEADER, TRIALS_HEADER, WORKERS_ENV,
};

/// Floats with 17 significant digits; `inf`, `-inf` and `nan` for the special values.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}
