//! Exact exponential-time references for small instances.
//!
//! The ℓ0 estimator `argmax_L |X ∩ L|` is found by enumerating the spans of
//! d-subsets of the data. Any optimal subspace is spanned by the points it
//! contains once those are completed by further data points, so this candidate
//! set is exhaustive.

use nalgebra::DMatrix;

use crate::dataset::{self, LabeledDataset};
use crate::error::{Result, RsrError};
use crate::grassmann::{orthonormalize, Subspace, RANK_TOL};
use crate::linalg::{self, combinations};

/// Largest N accepted by [`l0_bruteforce`] and [`well_defined_check`].
pub const L0_LIMIT: usize = 25;
/// Largest N_in accepted by [`directional_l0_min`].
pub const DIRECTIONAL_LIMIT: usize = 30;
/// A point belongs to a subspace when its angle to it is below this.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// At most this many distinct co-maximizers are kept.
pub const CO_MAXIMIZER_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L0Status {
    Unique,
    Tie,
    /// The maximizing point set spans fewer than d dimensions.
    Degenerate,
}

impl std::fmt::Display for L0Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            L0Status::Unique => "unique",
            L0Status::Tie => "tie",
            L0Status::Degenerate => "degenerate",
        })
    }
}

#[derive(Clone, Debug)]
pub struct L0Result {
    pub best: Subspace,
    pub best_count: usize,
    pub status: L0Status,
    /// Distinct subspaces attaining `best_count`, in enumeration order.
    pub co_maximizers: Vec<Subspace>,
    /// More than [`CO_MAXIMIZER_CAP`] distinct co-maximizers exist.
    pub truncated: bool,
}

/// Whether a nonzero `x` lies on `s`; the zero vector lies on every subspace.
fn is_member(s: &Subspace, x: &DMatrix<f64>, j: usize) -> bool {
    let col = x.column(j);
    let norm = col.norm();
    if norm == 0.0 {
        return true;
    }
    let r = (col - s.basis() * (s.basis().transpose() * col)).norm();
    (r / norm).min(1.0).asin() < MEMBERSHIP_TOL
}

/// `|X ∩ S|` with multiplicity.
pub fn count_members(s: &Subspace, x: &DMatrix<f64>) -> usize {
    (0..x.ncols()).filter(|&j| is_member(s, x, j)).count()
}

/// One representative column per line through the origin; zero columns are dropped.
fn distinct_directions(x: &DMatrix<f64>) -> Vec<usize> {
    let mut reps: Vec<usize> = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j);
        let norm = col.norm();
        if norm == 0.0 {
            continue;
        }
        let u = col / norm;
        let parallel = reps.iter().any(|&r| {
            let v = x.column(r) / x.column(r).norm();
            let cos = u.dot(&v).abs().min(1.0);
            (1.0 - cos * cos).max(0.0).sqrt() < MEMBERSHIP_TOL
        });
        if !parallel {
            reps.push(j);
        }
    }
    reps
}

/// Exhaustive ℓ0 estimator over G(D, d).
pub fn l0_bruteforce(x: &DMatrix<f64>, d: usize) -> Result<L0Result> {
    let n = x.ncols();
    if n > L0_LIMIT {
        return Err(RsrError::TooLarge { n, limit: L0_LIMIT });
    }
    if d == 0 || d > x.nrows() {
        return Err(RsrError::invalid("l0 oracle", "1 <= d <= D"));
    }
    let rank = linalg::numerical_rank(x, RANK_TOL);
    if rank < d {
        return Err(RsrError::RankDeficientData { rank, d });
    }
    let reps = distinct_directions(x);
    let mut best_count = 0;
    let mut co_maximizers: Vec<Subspace> = Vec::new();
    let mut truncated = false;
    for subset in combinations(reps.len(), d) {
        let cols: Vec<usize> = subset.iter().map(|&i| reps[i]).collect();
        let span = orthonormalize(&x.select_columns(&cols), RANK_TOL)?;
        if span.dim() < d {
            continue;
        }
        let count = count_members(&span, x);
        if count > best_count {
            best_count = count;
            co_maximizers = vec![span];
            truncated = false;
        } else if count == best_count && !co_maximizers.iter().any(|s| s.approx_eq(&span)) {
            if co_maximizers.len() < CO_MAXIMIZER_CAP {
                co_maximizers.push(span);
            } else {
                truncated = true;
            }
        }
    }
    let best = co_maximizers[0].clone();
    let status = if co_maximizers.len() == 1 {
        L0Status::Unique
    } else {
        L0Status::Tie
    };
    Ok(L0Result {
        best,
        best_count,
        status,
        co_maximizers,
        truncated,
    })
}

/// `min over unit v ∈ L* of ‖X_inᵀ v‖₀`, computed as `N_in` minus the largest
/// number of inliers inside a subspace of L* of dimension at most d − 1.
pub fn directional_l0_min(x_in: &DMatrix<f64>, truth: &Subspace) -> Result<usize> {
    let n = x_in.ncols();
    if n > DIRECTIONAL_LIMIT {
        return Err(RsrError::TooLarge {
            n,
            limit: DIRECTIONAL_LIMIT,
        });
    }
    if x_in.nrows() != truth.ambient_dim() {
        return Err(RsrError::DimensionMismatch("inliers and subspace differ in D".into()));
    }
    if let Some(index) = (0..n).find(|&j| !is_member(truth, x_in, j)) {
        return Err(RsrError::OffSubspace { index });
    }
    let zeros = (0..n).filter(|&j| x_in.column(j).norm() == 0.0).count();
    let reps = distinct_directions(x_in);
    let k = (truth.dim() - 1).min(reps.len());
    let mut best = zeros;
    if k > 0 {
        for subset in combinations(reps.len(), k) {
            let cols: Vec<usize> = subset.iter().map(|&i| reps[i]).collect();
            let span = orthonormalize(&x_in.select_columns(&cols), RANK_TOL)?;
            best = best.max(count_members(&span, x_in));
        }
    }
    Ok(n - best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WellDefinedness {
    WellDefined,
    Tie,
    Beaten,
    Degenerate,
}

impl std::fmt::Display for WellDefinedness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WellDefinedness::WellDefined => "well_defined",
            WellDefinedness::Tie => "tie",
            WellDefinedness::Beaten => "beaten",
            WellDefinedness::Degenerate => "degenerate",
        })
    }
}

/// Whether the truth is the unique ℓ0 subspace of both X and X_in.
pub fn well_defined_check(ds: &LabeledDataset, d: usize) -> Result<WellDefinedness> {
    let truth = ds.truth_subspace().ok_or(RsrError::MissingTruth)?;
    if ds.len() > L0_LIMIT {
        return Err(RsrError::TooLarge {
            n: ds.len(),
            limit: L0_LIMIT,
        });
    }
    let x_in = ds.inliers();
    if linalg::numerical_rank(&x_in, RANK_TOL) < d {
        return Ok(WellDefinedness::Degenerate);
    }
    let on_inliers = l0_bruteforce(&x_in, d)?;
    if on_inliers.status != L0Status::Unique || !on_inliers.best.approx_eq(truth) {
        return Ok(WellDefinedness::Degenerate);
    }
    let full = l0_bruteforce(&ds.points, d)?;
    let truth_count = count_members(truth, &ds.points);
    Ok(if full.best_count > truth_count {
        WellDefinedness::Beaten
    } else if full.status == L0Status::Unique && full.best.approx_eq(truth) {
        WellDefinedness::WellDefined
    } else {
        WellDefinedness::Tie
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRecord {
    pub snr: f64,
    /// `(N + d − 1)/(N − d + 1)`.
    pub general_position_bound: f64,
    /// `N_in / c`; `None` without a truth or when N_in is too large to enumerate.
    pub directional_bound: Option<f64>,
    pub directional_c: Option<usize>,
    /// `c = 0`: no SNR makes the problem well-defined.
    pub ill_posed: bool,
    /// `d / (D − d)`.
    pub hardness_bound: f64,
}

pub fn general_position_bound(n: usize, d: usize) -> f64 {
    let (n, d) = (n as f64, d as f64);
    (n + d - 1.0) / (n - d + 1.0)
}

pub fn hardness_bound(ambient_dim: usize, d: usize) -> f64 {
    if ambient_dim <= d {
        f64::INFINITY
    } else {
        d as f64 / (ambient_dim - d) as f64
    }
}

pub fn snr_and_thresholds(ds: &LabeledDataset, d: usize) -> Result<ThresholdRecord> {
    let mut directional_c = None;
    if let Some(truth) = ds.truth_subspace() {
        if ds.n_in() <= DIRECTIONAL_LIMIT {
            directional_c = Some(directional_l0_min(&ds.inliers(), truth)?);
        }
    }
    let directional_bound = directional_c.map(|c| {
        if c == 0 {
            f64::INFINITY
        } else {
            ds.n_in() as f64 / c as f64
        }
    });
    Ok(ThresholdRecord {
        snr: dataset::snr(ds.n_in(), ds.n_out()),
        general_position_bound: general_position_bound(ds.len(), d),
        directional_bound,
        directional_c,
        ill_posed: directional_c == Some(0),
        hardness_bound: hardness_bound(ds.ambient_dim(), d),
    })
}
