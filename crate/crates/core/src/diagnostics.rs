//! Statistics and threshold formulas that govern the recovery guarantees.
//!
//! Everything is computed on spherized data. For inliers `X̃_in` on a
//! d-dimensional `L*`, the Gram `X̃_in X̃_inᵀ` has rank at most d and its top
//! eigenvalues `λ₁ ≥ … ≥ λ_d` give the spherical condition number
//! `κ_d = λ₁/λ_d`. Since the trace is `N_in`, `λ₁ ≥ N_in/d`.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{spherize, LabeledDataset};
use crate::error::{Result, RsrError};
use crate::estimators::lad_gradient_spherized;
use crate::grassmann::{orthonormalize, random_in_ball, Subspace, RANK_TOL};
use crate::linalg::{self, combinations, gram_eigen};
use crate::oracles::{count_members, L0_LIMIT, MEMBERSHIP_TOL};

/// `γ = arccos(1/√3)`, where the landscape and initialization conditions coincide.
pub fn default_gamma() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

/// Ball samples used by [`stability_sup_estimate`] unless told otherwise.
pub const DEFAULT_SUP_SAMPLES: usize = 512;

/// `λ_d ≤ DEGENERATE_RATIO · λ₁` means the inliers do not permeate L*.
pub const DEGENERATE_RATIO: f64 = 1e-12;

/// Top-d eigenvalues of the spherized Gram `X̃ X̃ᵀ`, descending.
pub fn spherized_spectrum(x: &DMatrix<f64>, d: usize) -> Result<Vec<f64>> {
    if x.ncols() == 0 {
        return Ok(vec![0.0; d]);
    }
    let (mut vals, _) = gram_eigen(&spherize(x)?);
    vals.resize(vals.len().max(d), 0.0);
    vals.truncate(d);
    Ok(vals.into_iter().map(|v| v.max(0.0)).collect())
}

/// `‖X̃‖₂`, zero for an empty block.
pub fn spherized_spectral_norm(x: &DMatrix<f64>) -> Result<f64> {
    if x.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(linalg::spectral_norm(&spherize(x)?))
}

fn kappa_from(spectrum: &[f64]) -> Result<f64> {
    let top = spectrum[0];
    let bottom = *spectrum.last().expect("d >= 1");
    if !(bottom > DEGENERATE_RATIO * top) {
        return Err(RsrError::DegenerateInliers {
            ratio: if top > 0.0 { bottom / top } else { 0.0 },
        });
    }
    Ok(top / bottom)
}

/// Spherical d-condition number `λ₁/λ_d` of inliers lying on `truth`.
pub fn kappa_d(x_in: &DMatrix<f64>, truth: &Subspace) -> Result<f64> {
    for j in 0..x_in.ncols() {
        let col = x_in.column(j).into_owned();
        if col.norm() > 0.0 && truth.angle_to(&col)? > MEMBERSHIP_TOL {
            return Err(RsrError::OffSubspace { index: j });
        }
    }
    kappa_from(&spherized_spectrum(x_in, truth.dim())?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub gamma: f64,
    pub d: usize,
    pub n_in: usize,
    pub n_out: usize,
    pub lambda_1_in: f64,
    pub lambda_d_in: f64,
    /// `λ_d` of the full spherized Gram, for comparison.
    pub lambda_d_full: f64,
    pub kappa_d: f64,
    /// `‖X̃_out‖₂`.
    pub out_spectral: f64,
    /// `cos γ · λ_d(X̃_in X̃_inᵀ) − √N_out · ‖X̃_out‖₂`.
    pub lower_bound: f64,
    /// `sin γ/√2 · λ_d(X̃_in X̃_inᵀ) − ‖X̃_out‖₂²`; positive means SPCA lands in the γ-ball.
    pub spca_condition_value: f64,
    /// `λ₁ ≥ N_in/d` held.
    pub pigeonhole_ok: bool,
    pub snr: f64,
    /// `√3 · d · κ_d`.
    pub snr_required_sggd: f64,
    /// `√2/sin γ · d · κ_d`.
    pub snr_required_spca: f64,
}

impl StabilityReport {
    /// `(key, value)` pairs in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("gamma", self.gamma),
            ("d", self.d as f64),
            ("n_in", self.n_in as f64),
            ("n_out", self.n_out as f64),
            ("lambda_1_in", self.lambda_1_in),
            ("lambda_d_in", self.lambda_d_in),
            ("lambda_d_full", self.lambda_d_full),
            ("kappa_d", self.kappa_d),
            ("out_spectral", self.out_spectral),
            ("lower_bound", self.lower_bound),
            ("spca_condition_value", self.spca_condition_value),
            ("pigeonhole_ok", if self.pigeonhole_ok { 1.0 } else { 0.0 }),
            ("snr", self.snr),
            ("snr_required_sggd", self.snr_required_sggd),
            ("snr_required_spca", self.snr_required_spca),
        ]
    }
}

pub fn stability_lower_bound(ds: &LabeledDataset, gamma: f64) -> Result<StabilityReport> {
    let truth = ds.truth_subspace().ok_or(RsrError::MissingTruth)?;
    let d = truth.dim();
    let x_in = ds.inliers();
    let x_out = ds.outliers();
    let spectrum = spherized_spectrum(&x_in, d)?;
    let kappa = kappa_from(&spectrum)?;
    let (lambda_1_in, lambda_d_in) = (spectrum[0], spectrum[d - 1]);
    let lambda_d_full = spherized_spectrum(&ds.points, d)?[d - 1];
    let out_spectral = spherized_spectral_norm(&x_out)?;
    let n_in = x_in.ncols();
    let n_out = x_out.ncols();
    let df = d as f64;
    Ok(StabilityReport {
        gamma,
        d,
        n_in,
        n_out,
        lambda_1_in,
        lambda_d_in,
        lambda_d_full,
        kappa_d: kappa,
        out_spectral,
        lower_bound: gamma.cos() * lambda_d_in - (n_out as f64).sqrt() * out_spectral,
        spca_condition_value: gamma.sin() / SQRT_2 * lambda_d_in - out_spectral * out_spectral,
        pigeonhole_ok: lambda_1_in >= n_in as f64 / df - 1e-9,
        snr: ds.snr(),
        snr_required_sggd: 3f64.sqrt() * df * kappa,
        snr_required_spca: SQRT_2 / gamma.sin() * df * kappa,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupEstimate {
    /// `cos γ · λ_d(Σ_{X̃∩L*} x̃x̃ᵀ) − max_sampled ‖∇F(L; X∖L*)‖₂`. Sampling
    /// under-estimates the sup, so this over-estimates the stability statistic.
    pub estimate: f64,
    pub first_term: f64,
    pub max_gradient_norm: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of the stability statistic over `B(L*, γ)`.
pub fn stability_sup_estimate<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    gamma: f64,
    samples: usize,
    rng: &mut R,
) -> Result<SupEstimate> {
    let truth = ds.truth_subspace().ok_or(RsrError::MissingTruth)?;
    let d = truth.dim();
    let on: Vec<usize> = (0..ds.len())
        .filter(|&j| {
            let c = ds.points.column(j).into_owned();
            c.norm() > 0.0 && truth.angle_to(&c).map(|a| a <= MEMBERSHIP_TOL).unwrap_or(false)
        })
        .collect();
    let off: Vec<usize> = (0..ds.len())
        .filter(|j| !on.contains(j) && ds.points.column(*j).norm() > 0.0)
        .collect();
    let lambda_d = spherized_spectrum(&ds.points.select_columns(&on), d)?[d - 1];
    let first_term = gamma.cos() * lambda_d;
    let off_sph = spherize(&ds.points.select_columns(&off))?;
    let balls: Vec<Subspace> = (0..samples).map(|_| random_in_ball(truth, gamma, rng)).collect();
    let max_gradient_norm = if off.is_empty() {
        0.0
    } else {
        balls
            .par_iter()
            .map(|l| {
                // points lying on L itself contribute nothing
                lad_gradient_spherized(&off_sph, l, (MEMBERSHIP_TOL).sin()).spectral_norm()
            })
            .reduce(|| 0.0, f64::max)
    };
    Ok(SupEstimate {
        estimate: first_term - max_gradient_norm,
        first_term,
        max_gradient_norm,
        samples,
    })
}

/// Inputs for [`threshold_table`]; rows whose inputs are missing are reported without a bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableInputs {
    pub d: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub mu: Option<f64>,
    pub rlg_epsilon: Option<f64>,
    pub ransac_c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRow {
    pub method: &'static str,
    pub bound: Option<f64>,
    pub missing: Option<&'static str>,
}

impl ThresholdRow {
    fn known(method: &'static str, bound: f64) -> Self {
        ThresholdRow {
            method,
            bound: Some(bound),
            missing: None,
        }
    }

    fn needs(method: &'static str, input: Option<f64>, what: &'static str, f: impl Fn(f64) -> f64) -> Self {
        match input {
            Some(v) => Self::known(method, f(v)),
            None => ThresholdRow {
                method,
                bound: None,
                missing: Some(what),
            },
        }
    }
}

/// Adversarial SNR thresholds of the compared methods.
pub fn threshold_table(inp: &TableInputs) -> Vec<ThresholdRow> {
    let d = inp.d as f64;
    let k = inp.kappa;
    vec![
        ThresholdRow::known("SPCA", d * k / (inp.gamma.sin() / SQRT_2)),
        ThresholdRow::needs("OP", inp.mu, "mu", |mu| 121.0 * mu * d / 9.0),
        ThresholdRow::needs("TORP", inp.mu, "mu", |mu| 128.0 * mu * mu * d - 1.0),
        ThresholdRow::known("RR", 2.0),
        ThresholdRow::needs("RLG", inp.rlg_epsilon, "rlg_epsilon", |e| (1.0 - e) / e),
        ThresholdRow::known("SGGD", 3f64.sqrt() * d * k),
        ThresholdRow::needs("RANSAC", inp.ransac_c, "ransac_c", |c| c * d),
    ]
}

/// Sample-size regimes of the Haystack model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaystackRegime {
    /// N = O(D).
    Small,
    /// N = O(D²).
    Medium,
    /// N → ∞.
    Large,
}

impl std::str::FromStr for HaystackRegime {
    type Err = RsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(HaystackRegime::Small),
            "medium" => Ok(HaystackRegime::Medium),
            "large" => Ok(HaystackRegime::Large),
            other => Err(RsrError::invalid(
                "haystack regime",
                format!("small, medium or large (got `{other}`)"),
            )),
        }
    }
}

/// SNR above which SGGD recovers L* w.h.p. under the Haystack model.
pub fn haystack_bound(ambient_dim: usize, d: usize, regime: HaystackRegime) -> f64 {
    let (dd, d) = (ambient_dim as f64, d as f64);
    match regime {
        HaystackRegime::Small => (8.0 * SQRT_2 * d / dd.sqrt()).max(2.0 * d / dd),
        HaystackRegime::Medium => (5.0 * SQRT_2 * d / (dd * (dd - d)).sqrt()).max(2.0 * d / dd),
        HaystackRegime::Large => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConvergence {
    /// The stability lower bound.
    pub lhs: f64,
    /// `8 · max |X ∩ L|`.
    pub rhs: f64,
    pub holds: bool,
    /// `max |X ∩ L|` over spans of data points in `B(L*, γ)` other than L*.
    pub max_in_ball: usize,
    /// `max |X ∩ L|` over all spans of data points other than L*.
    pub max_off_truth: usize,
    /// False when N is too large to enumerate and `N_out + d − 1` stands in.
    pub exact: bool,
    /// `(7 + 8(d−1)/N_out) · dκ/cos γ`, as stated for the general-position case.
    pub snr_required: f64,
    /// `(9 + 8(d−1)/N_out) · dκ/cos γ`, the direct rearrangement of
    /// `cos γ · N_in/(dκ) − N_out > 8(N_out + d − 1)`.
    pub snr_required_direct: f64,
}

pub fn linear_convergence_bound(ds: &LabeledDataset, gamma: f64) -> Result<LinearConvergence> {
    let report = stability_lower_bound(ds, gamma)?;
    let truth = ds.truth_subspace().ok_or(RsrError::MissingTruth)?;
    let d = report.d;
    let n_out = report.n_out;
    let surrogate = n_out + d - 1;
    let (max_in_ball, max_off_truth, exact) = if ds.len() <= L0_LIMIT {
        let (a, b) = enumerate_candidates(&ds.points, truth, gamma)?;
        (a, b, true)
    } else {
        (surrogate, surrogate, false)
    };
    let rhs = 8.0 * max_in_ball as f64;
    let tail = if d == 1 {
        0.0
    } else {
        8.0 * (d - 1) as f64 / n_out as f64
    };
    let scale = d as f64 * report.kappa_d / gamma.cos();
    Ok(LinearConvergence {
        lhs: report.lower_bound,
        rhs,
        holds: report.lower_bound > rhs,
        max_in_ball,
        max_off_truth,
        exact,
        snr_required: (7.0 + tail) * scale,
        snr_required_direct: (9.0 + tail) * scale,
    })
}

fn enumerate_candidates(x: &DMatrix<f64>, truth: &Subspace, gamma: f64) -> Result<(usize, usize)> {
    let d = truth.dim();
    let nonzero: Vec<usize> = (0..x.ncols()).filter(|&j| x.column(j).norm() > 0.0).collect();
    let mut in_ball = 0;
    let mut off = 0;
    for subset in combinations(nonzero.len(), d) {
        let cols: Vec<usize> = subset.iter().map(|&i| nonzero[i]).collect();
        let span = orthonormalize(&x.select_columns(&cols), RANK_TOL)?;
        if span.dim() < d || span.approx_eq(truth) {
            continue;
        }
        let count = count_members(&span, x);
        off = off.max(count);
        if span.distance(truth)? < gamma {
            in_ball = in_ball.max(count);
        }
    }
    Ok((in_ball, off))
}
