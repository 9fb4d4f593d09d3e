use nalgebra::DMatrix;

use super::lad::{lad_energy_spherized, lad_gradient_spherized};
use super::{FitTrace, TerminalReason, TraceRecord};
use crate::dataset::spherize;
use crate::error::{Result, RsrError};
use crate::grassmann::{geodesic_step, Subspace};

/// An iteration counts as progress for the piecewise schedule only when it lowers
/// the energy below the last progress point by at least this times
/// `step · ‖∇F‖₂` (gradient at that point). Smaller decreases come from iterates
/// bouncing across the minimizer and do not postpone shrinking.
pub const SUFFICIENT_DECREASE: f64 = 1e-2;

/// Step-size rule for SGGD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    /// `s_k = s0/√k`.
    Sqrt { s0: f64 },
    /// Constant steps, multiplied by `shrink_factor` after `patience`
    /// consecutive iterations without sufficient decrease
    /// (see [`SUFFICIENT_DECREASE`]).
    Piecewise {
        s0: f64,
        shrink_factor: f64,
        patience: usize,
    },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Piecewise {
            s0: 0.1,
            shrink_factor: 0.5,
            patience: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SggdConfig {
    pub max_iter: usize,
    pub schedule: Schedule,
    /// Stop once an iteration moves the subspace by less than this (radians).
    pub converge_tol: f64,
    /// Points with `‖Q x̃‖ ≤ subgradient_eps` are left out of the gradient.
    pub subgradient_eps: f64,
}

impl Default for SggdConfig {
    fn default() -> Self {
        SggdConfig {
            max_iter: 1000,
            schedule: Schedule::default(),
            converge_tol: 1e-11,
            subgradient_eps: 1e-12,
        }
    }
}

impl SggdConfig {
    pub fn validate(&self) -> Result<()> {
        match self.schedule {
            Schedule::Sqrt { s0 } if !(s0 > 0.0) => Err(RsrError::invalid("sqrt schedule", "s0 > 0")),
            Schedule::Piecewise {
                s0,
                shrink_factor,
                patience,
            } if !(s0 > 0.0) || !(shrink_factor > 0.0 && shrink_factor < 1.0) || patience < 1 => Err(
                RsrError::invalid("piecewise schedule", "s0 > 0, 0 < shrink_factor < 1, patience >= 1"),
            ),
            _ if !(self.subgradient_eps >= 0.0) => Err(RsrError::invalid("sggd", "subgradient_eps >= 0")),
            _ if !(self.converge_tol >= 0.0) => Err(RsrError::invalid("sggd", "converge_tol >= 0")),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SggdFit {
    /// The iterate with the lowest energy.
    pub subspace: Subspace,
    pub energy: f64,
    /// Number of geodesic steps taken.
    pub iterations: usize,
    pub trace: FitTrace,
}

/// Geodesic subgradient descent on the spherized LAD energy.
pub fn sggd(x: &DMatrix<f64>, d: usize, init: &Subspace, cfg: &SggdConfig) -> Result<SggdFit> {
    sggd_traced(x, d, init, cfg, None)
}

/// [`sggd`], also recording `θ₁` to `truth` in the trace.
pub fn sggd_traced(
    x: &DMatrix<f64>,
    d: usize,
    init: &Subspace,
    cfg: &SggdConfig,
    truth: Option<&Subspace>,
) -> Result<SggdFit> {
    cfg.validate()?;
    if init.dim() != d || init.ambient_dim() != x.nrows() {
        return Err(RsrError::DimensionMismatch(format!(
            "init in G({}, {}) for d = {d}, D = {}",
            init.ambient_dim(),
            init.dim(),
            x.nrows()
        )));
    }
    let xs = spherize(x)?;
    let theta = |s: &Subspace| truth.map(|t| t.distance(s)).transpose();

    let mut trace = FitTrace::new();
    let mut current = init.clone();
    let mut energy = lad_energy_spherized(&xs, &current);
    let mut gradient = lad_gradient_spherized(&xs, &current, cfg.subgradient_eps);
    let mut grad_norm = gradient.spectral_norm();
    trace.records.push(TraceRecord {
        iteration: 0,
        energy,
        theta1: theta(&current)?,
        step: None,
        grad_norm: Some(grad_norm),
        consensus: None,
    });
    if !energy.is_finite() {
        return Err(RsrError::NonFiniteEnergy {
            iteration: 0,
            trace: Box::new(trace),
        });
    }

    let mut best = (current.clone(), energy);
    let mut step = match cfg.schedule {
        Schedule::Sqrt { s0 } | Schedule::Piecewise { s0, .. } => s0,
    };
    let mut stale = 0usize;
    let mut progress_energy = energy;
    let mut progress_grad = grad_norm;
    let mut iterations = 0;
    trace.reason = TerminalReason::MaxIter;
    for k in 1..=cfg.max_iter {
        if grad_norm == 0.0 {
            trace.reason = TerminalReason::Converged;
            break;
        }
        if let Schedule::Sqrt { s0 } = cfg.schedule {
            step = s0 / (k as f64).sqrt();
        }
        let direction = gradient.scaled(-1.0 / grad_norm);
        let next = geodesic_step(&current, &direction, step)?;
        let movement = next.distance(&current)?;
        current = next;
        iterations = k;
        energy = lad_energy_spherized(&xs, &current);
        gradient = lad_gradient_spherized(&xs, &current, cfg.subgradient_eps);
        grad_norm = gradient.spectral_norm();
        trace.records.push(TraceRecord {
            iteration: k,
            energy,
            theta1: theta(&current)?,
            step: Some(step),
            grad_norm: Some(grad_norm),
            consensus: None,
        });
        if !energy.is_finite() {
            return Err(RsrError::NonFiniteEnergy {
                iteration: k,
                trace: Box::new(trace),
            });
        }
        let progressed = energy < progress_energy - SUFFICIENT_DECREASE * step * progress_grad;
        if energy < best.1 {
            best = (current.clone(), energy);
        }
        if progressed {
            progress_energy = energy;
            progress_grad = grad_norm;
            stale = 0;
        } else {
            stale += 1;
        }
        if let Schedule::Piecewise {
            shrink_factor,
            patience,
            ..
        } = cfg.schedule
        {
            if stale >= patience {
                step *= shrink_factor;
                stale = 0;
            }
        }
        if movement < cfg.converge_tol {
            trace.reason = TerminalReason::Converged;
            break;
        }
    }
    if grad_norm == 0.0 {
        trace.reason = TerminalReason::Converged;
    }
    Ok(SggdFit {
        subspace: best.0,
        energy: best.1,
        iterations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gen_adversarial;
    use crate::estimators::spca;
    use crate::grassmann::random_subspace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn data_on_subspace_stays_put() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = random_subspace(6, 2, &mut rng);
        let x = l.basis() * crate::grassmann::gaussian_matrix(2, 10, &mut rng);
        let fit = sggd(&x, 2, &l, &SggdConfig::default()).unwrap();
        assert_eq!(fit.iterations, 0);
        assert_eq!(fit.trace.reason, TerminalReason::Converged);
        assert!(fit.subspace.distance(&l).unwrap() < 1e-12);
    }

    #[test]
    fn recovers_from_spca_init() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = gen_adversarial(10, 2, 40, 5, 1e3, &mut rng).unwrap();
        let truth = ds.truth_subspace().unwrap();
        let init = spca(&ds.points, 2).unwrap().subspace;
        let fit = sggd_traced(&ds.points, 2, &init, &SggdConfig::default(), Some(truth)).unwrap();
        assert!(fit.subspace.distance(truth).unwrap() < 1e-6);
        assert!(fit.energy <= fit.trace.records[0].energy + 1e-12);
        assert!(fit.trace.records.len() <= SggdConfig::default().max_iter + 1);
    }

    #[test]
    fn sqrt_schedule_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = crate::grassmann::gaussian_matrix(5, 20, &mut rng);
        let init = random_subspace(5, 2, &mut rng);
        let cfg = SggdConfig {
            max_iter: 16,
            schedule: Schedule::Sqrt { s0: 0.2 },
            converge_tol: 0.0,
            ..Default::default()
        };
        let fit = sggd(&x, 2, &init, &cfg).unwrap();
        let steps: Vec<f64> = fit.trace.records[1..].iter().map(|r| r.step.unwrap()).collect();
        assert_eq!(steps.len(), 16);
        assert!((steps[3] - 0.1).abs() < 1e-15);
        assert!((steps[15] - 0.05).abs() < 1e-15);
        assert_eq!(fit.trace.reason, TerminalReason::MaxIter);
    }

    #[test]
    fn piecewise_schedule_halves_on_stalls() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = gen_adversarial(6, 2, 30, 4, 1.0, &mut rng).unwrap();
        let init = spca(&ds.points, 2).unwrap().subspace;
        let fit = sggd(&ds.points, 2, &init, &SggdConfig::default()).unwrap();
        let steps: Vec<f64> = fit.trace.records[1..].iter().map(|r| r.step.unwrap()).collect();
        assert!(steps.windows(2).all(|w| w[1] == w[0] || w[1] == 0.5 * w[0]));
        assert!(steps.last().unwrap() < &1e-6);
    }

    #[test]
    fn invalid_configs() {
        let bad = SggdConfig {
            schedule: Schedule::Piecewise {
                s0: 0.1,
                shrink_factor: 1.0,
                patience: 3,
            },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SggdConfig {
            schedule: Schedule::Sqrt { s0: 0.0 },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
