//! Subspace estimators: SPCA, SGGD on the spherized LAD energy, RANSAC and the
//! affine variants.

mod affine;
mod lad;
mod median;
mod ransac;
mod sggd;
mod spca;

pub use affine::{affine_sggd_pipeline, AffineFit, AffinePipelineConfig};
pub use lad::{lad_energy, lad_energy_spherized, lad_gradient, lad_gradient_spherized};
pub use median::{geometric_median, MedianConfig};
pub use ransac::{
    consensus_count, ransac_affine, ransac_rsr, ransac_rsr_traced, RansacAffineFit, RansacConfig, RansacFit,
    MEMBERSHIP_SLACK,
};
pub use sggd::{sggd, sggd_traced, Schedule, SggdConfig, SggdFit};
pub use spca::{spca, SpcaFit, EIGEN_GAP_TOL};

use std::io::Write;

/// Why an iterative fit stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalReason {
    Consensus,
    MaxIter,
    Converged,
}

impl std::fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TerminalReason::Consensus => "consensus",
            TerminalReason::MaxIter => "max_iter",
            TerminalReason::Converged => "converged",
        })
    }
}

/// One iteration of SGGD or one RANSAC trial.
///
/// For RANSAC `energy` is the number of points outside the trial's consensus
/// set and `step`/`grad_norm` are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    pub theta1: Option<f64>,
    pub step: Option<f64>,
    pub grad_norm: Option<f64>,
    pub consensus: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitTrace {
    pub records: Vec<TraceRecord>,
    pub reason: TerminalReason,
}

impl FitTrace {
    pub(crate) fn new() -> Self {
        FitTrace {
            records: Vec::new(),
            reason: TerminalReason::MaxIter,
        }
    }

    /// CSV with header `iter,energy,theta1,step,gradnorm`; missing values are empty.
    pub fn write_csv<W: Write>(&self, w: W) -> crate::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "energy", "theta1", "step", "gradnorm"])?;
        let opt = |v: Option<f64>| v.map(crate::harness::fmt_float).unwrap_or_default();
        for r in &self.records {
            out.write_record([
                r.iteration.to_string(),
                crate::harness::fmt_float(r.energy),
                opt(r.theta1),
                opt(r.step),
                opt(r.grad_norm),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
