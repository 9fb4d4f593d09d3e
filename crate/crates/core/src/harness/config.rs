//! Experiment configuration, read from TOML.
//!
//! ```toml
//! base_seed = 7
//! trials_per_cell = 20
//! recovery_tol = 1e-6          # default
//! output_dir = "out"
//! workers = 4                  # optional; RSR_WORKERS overrides
//!
//! [model]
//! kind = "adversarial_line"    # or "haystack"
//! ambient_dim = [10]
//! subspace_dim = [2]
//! n_in = [40]                  # give two of n_in / n_out / n_total / snr
//! snr = [2.0, 4.0, 8.0]
//! noise_eps = [0.0]            # default [0.0]
//! noise_kind = "uniform-ball"  # default
//! magnitude = 1.0              # adversarial_line outlier norm
//! sigma_in = 1.0               # haystack scales
//! sigma_out = 1.0
//!
//! [[estimators]]
//! name = "sggd"
//! max_iter = 500
//! schedule = "piecewise"       # or "sqrt"
//! s0 = 0.1
//! shrink_factor = 0.5
//! patience = 10
//!
//! [[estimators]]
//! name = "ransac"
//! tau = 0.0
//! max_trials = 1000
//! ```
//!
//! Every axis is a list and the cells are their Cartesian product, ordered with
//! the last listed axis varying fastest: ambient_dim, subspace_dim, counts, noise_eps.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dataset::{NoiseKind, NoiseSpec};
use crate::error::{Result, RsrError};
use crate::estimators::{RansacConfig, Schedule, SggdConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Haystack,
    AdversarialLine,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Haystack => "haystack",
            ModelKind::AdversarialLine => "adversarial_line",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub ambient_dim: Vec<usize>,
    pub subspace_dim: Vec<usize>,
    /// `(n_in, n_out)` pairs.
    pub counts: Vec<(usize, usize)>,
    pub noise_eps: Vec<f64>,
    pub noise_kind: NoiseKind,
    pub magnitude: f64,
    pub sigma_in: f64,
    pub sigma_out: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EstimatorSpec {
    Spca,
    Sggd(SggdConfig),
    /// `seed` is replaced by the trial seed.
    Ransac(RansacConfig),
}

impl EstimatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::Spca => "spca",
            EstimatorSpec::Sggd(_) => "sggd",
            EstimatorSpec::Ransac(_) => "ransac",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub estimators: Vec<EstimatorSpec>,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub recovery_tol: f64,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
}

/// One point of the sweep grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub n_in: usize,
    pub n_out: usize,
    pub noise_eps: f64,
}

impl Cell {
    pub fn noise(&self, kind: NoiseKind) -> NoiseSpec {
        if self.noise_eps == 0.0 {
            NoiseSpec::none()
        } else {
            NoiseSpec {
                epsilon: self.noise_eps,
                kind,
            }
        }
    }
}

impl ExperimentConfig {
    pub fn cells(&self) -> Vec<Cell> {
        let m = &self.model;
        let mut out = Vec::new();
        for &ambient_dim in &m.ambient_dim {
            for &subspace_dim in &m.subspace_dim {
                for &(n_in, n_out) in &m.counts {
                    for &noise_eps in &m.noise_eps {
                        out.push(Cell {
                            index: out.len(),
                            ambient_dim,
                            subspace_dim,
                            n_in,
                            n_out,
                            noise_eps,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].lines().count().max(1);
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".into());
            RsrError::config(field, e.message().to_string())
        })?;
        raw.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RsrError::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&text)
    }
}

fn default_tol() -> f64 {
    1e-6
}

fn default_noise() -> Vec<f64> {
    vec![0.0]
}

fn default_noise_kind() -> String {
    "uniform-ball".into()
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    estimators: Vec<RawEstimator>,
    trials_per_cell: usize,
    base_seed: u64,
    #[serde(default = "default_tol")]
    recovery_tol: f64,
    output_dir: PathBuf,
    workers: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    ambient_dim: Vec<usize>,
    subspace_dim: Vec<usize>,
    n_in: Option<Vec<usize>>,
    n_out: Option<Vec<usize>>,
    n_total: Option<Vec<usize>>,
    snr: Option<Vec<f64>>,
    #[serde(default = "default_noise")]
    noise_eps: Vec<f64>,
    #[serde(default = "default_noise_kind")]
    noise_kind: String,
    #[serde(default = "one")]
    magnitude: f64,
    #[serde(default = "one")]
    sigma_in: f64,
    #[serde(default = "one")]
    sigma_out: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimator {
    name: String,
    max_iter: Option<usize>,
    schedule: Option<String>,
    s0: Option<f64>,
    shrink_factor: Option<f64>,
    patience: Option<usize>,
    converge_tol: Option<f64>,
    subgradient_eps: Option<f64>,
    tau: Option<f64>,
    m: Option<usize>,
    max_trials: Option<usize>,
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(RsrError::config(field, "sweep axis must not be empty"));
    }
    Ok(())
}

/// `(n_in, n_out)` with `n_in/n_out` closest to `snr` for a fixed total.
fn split_total(total: usize, snr: f64) -> (usize, usize) {
    if snr.is_infinite() {
        return (total, 0);
    }
    let n_out = (total as f64 / (1.0 + snr)).round() as usize;
    (total - n_out, n_out)
}

impl RawModel {
    fn counts(&self) -> Result<Vec<(usize, usize)>> {
        let snr_ok = |s: &[f64]| {
            if s.iter().any(|v| !(*v > 0.0)) {
                Err(RsrError::config("model.snr", "values must be positive"))
            } else {
                Ok(())
            }
        };
        let mut out = Vec::new();
        match (&self.n_in, &self.n_out, &self.n_total, &self.snr) {
            (Some(n_in), Some(n_out), None, None) => {
                nonempty("model.n_in", n_in)?;
                nonempty("model.n_out", n_out)?;
                for &a in n_in {
                    for &b in n_out {
                        out.push((a, b));
                    }
                }
            }
            (Some(n_in), None, None, Some(snr)) => {
                nonempty("model.n_in", n_in)?;
                nonempty("model.snr", snr)?;
                snr_ok(snr)?;
                for &a in n_in {
                    for &s in snr {
                        let b = if s.is_infinite() { 0 } else { (a as f64 / s).round() as usize };
                        out.push((a, b));
                    }
                }
            }
            (None, None, Some(total), Some(snr)) => {
                nonempty("model.n_total", total)?;
                nonempty("model.snr", snr)?;
                snr_ok(snr)?;
                for &t in total {
                    for &s in snr {
                        out.push(split_total(t, s));
                    }
                }
            }
            _ => {
                return Err(RsrError::config(
                    "model",
                    "give exactly one of: n_in + n_out, n_in + snr, n_total + snr",
                ))
            }
        }
        if out.iter().any(|&(a, _)| a == 0) {
            return Err(RsrError::config("model", "every cell needs at least one inlier"));
        }
        Ok(out)
    }
}

impl RawEstimator {
    fn into_spec(self, i: usize) -> Result<EstimatorSpec> {
        let field = |f: &str| format!("estimators[{i}].{f}");
        let spec = match self.name.as_str() {
            "spca" => EstimatorSpec::Spca,
            "sggd" => {
                let defaults = SggdConfig::default();
                let Schedule::Piecewise {
                    s0: ds0,
                    shrink_factor: dsh,
                    patience: dpat,
                } = defaults.schedule
                else {
                    unreachable!("default schedule is piecewise")
                };
                let schedule = match self.schedule.as_deref().unwrap_or("piecewise") {
                    "piecewise" => Schedule::Piecewise {
                        s0: self.s0.unwrap_or(ds0),
                        shrink_factor: self.shrink_factor.unwrap_or(dsh),
                        patience: self.patience.unwrap_or(dpat),
                    },
                    "sqrt" => Schedule::Sqrt {
                        s0: self.s0.unwrap_or(ds0),
                    },
                    other => {
                        return Err(RsrError::config(
                            field("schedule"),
                            format!("expected `piecewise` or `sqrt`, got `{other}`"),
                        ))
                    }
                };
                let cfg = SggdConfig {
                    max_iter: self.max_iter.unwrap_or(defaults.max_iter),
                    schedule,
                    converge_tol: self.converge_tol.unwrap_or(defaults.converge_tol),
                    subgradient_eps: self.subgradient_eps.unwrap_or(defaults.subgradient_eps),
                };
                cfg.validate()
                    .map_err(|e| RsrError::config(field("schedule"), e.to_string()))?;
                EstimatorSpec::Sggd(cfg)
            }
            "ransac" => {
                let defaults = RansacConfig::default();
                let tau = self.tau.unwrap_or(defaults.tau);
                if !(tau >= 0.0) {
                    return Err(RsrError::config(field("tau"), "must be >= 0"));
                }
                let max_trials = self.max_trials.unwrap_or(defaults.max_trials);
                if max_trials == 0 {
                    return Err(RsrError::config(field("max_trials"), "must be >= 1"));
                }
                EstimatorSpec::Ransac(RansacConfig {
                    tau,
                    m: self.m,
                    max_trials,
                    seed: 0,
                })
            }
            other => {
                return Err(RsrError::config(
                    field("name"),
                    format!("unknown estimator `{other}` (spca, sggd, ransac)"),
                ))
            }
        };
        Ok(spec)
    }
}

impl RawConfig {
    fn validate(self) -> Result<ExperimentConfig> {
        let kind = match self.model.kind.as_str() {
            "haystack" => ModelKind::Haystack,
            "adversarial_line" => ModelKind::AdversarialLine,
            other => {
                return Err(RsrError::config(
                    "model.kind",
                    format!("unknown model `{other}` (haystack, adversarial_line)"),
                ))
            }
        };
        nonempty("model.ambient_dim", &self.model.ambient_dim)?;
        nonempty("model.subspace_dim", &self.model.subspace_dim)?;
        nonempty("model.noise_eps", &self.model.noise_eps)?;
        for &dd in &self.model.ambient_dim {
            for &d in &self.model.subspace_dim {
                if d == 0 || d >= dd {
                    return Err(RsrError::config("model.subspace_dim", format!("need 0 < d < D, got d = {d}, D = {dd}")));
                }
            }
        }
        if self.model.noise_eps.iter().any(|e| !(*e >= 0.0)) {
            return Err(RsrError::config("model.noise_eps", "values must be >= 0"));
        }
        let noise_kind: NoiseKind = self
            .model
            .noise_kind
            .parse()
            .map_err(|e: RsrError| RsrError::config("model.noise_kind", e.to_string()))?;
        for (name, v) in [
            ("model.magnitude", self.model.magnitude),
            ("model.sigma_in", self.model.sigma_in),
            ("model.sigma_out", self.model.sigma_out),
        ] {
            if !(v > 0.0) {
                return Err(RsrError::config(name, "must be positive"));
            }
        }
        let counts = self.model.counts()?;
        if self.trials_per_cell < 1 {
            return Err(RsrError::config("trials_per_cell", "must be >= 1"));
        }
        if !(self.recovery_tol > 0.0) {
            return Err(RsrError::config("recovery_tol", "must be > 0"));
        }
        if self.estimators.is_empty() {
            return Err(RsrError::config("estimators", "list at least one estimator"));
        }
        if self.workers == Some(0) {
            return Err(RsrError::config("workers", "must be >= 1"));
        }
        let estimators = self
            .estimators
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.into_spec(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentConfig {
            model: ModelConfig {
                kind,
                ambient_dim: self.model.ambient_dim,
                subspace_dim: self.model.subspace_dim,
                counts,
                noise_eps: self.model.noise_eps,
                noise_kind,
                magnitude: self.model.magnitude,
                sigma_in: self.model.sigma_in,
                sigma_out: self.model.sigma_out,
            },
            estimators,
            trials_per_cell: self.trials_per_cell,
            base_seed: self.base_seed,
            recovery_tol: self.recovery_tol,
            output_dir: self.output_dir,
            workers: self.workers,
        })
    }
}
