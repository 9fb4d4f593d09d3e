use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FitTrace, TerminalReason, TraceRecord};
use crate::error::{Result, RsrError};
use crate::grassmann::{orthonormalize, AffineSubspace, Subspace, RANK_TOL};
use crate::linalg;

/// Added to `τ` in consensus tests to absorb roundoff.
pub const MEMBERSHIP_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RansacConfig {
    /// Consensus tolerance: an angle for [`ransac_rsr`], a distance for [`ransac_affine`].
    pub tau: f64,
    /// Return as soon as a consensus exceeds `m`; `None` means `N/2`.
    pub m: Option<usize>,
    /// Maximum number of trials.
    pub max_trials: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            tau: 0.0,
            m: None,
            max_trials: 1000,
            seed: 0,
        }
    }
}

impl RansacConfig {
    fn threshold(&self, n: usize) -> Result<usize> {
        if !(self.tau >= 0.0) {
            return Err(RsrError::invalid("ransac", "tau >= 0"));
        }
        if self.max_trials < 1 {
            return Err(RsrError::invalid("ransac", "at least one trial"));
        }
        let m = self.m.unwrap_or(n / 2);
        if m > n {
            return Err(RsrError::invalid("ransac", format!("m <= N = {n}")));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug)]
pub struct RansacFit {
    pub subspace: Subspace,
    pub consensus: usize,
    /// Trials run, including the returning one.
    pub trials: usize,
    /// Indices of the points whose span was returned.
    pub sample: Vec<usize>,
    pub trace: FitTrace,
}

#[derive(Clone, Debug)]
pub struct RansacAffineFit {
    pub subspace: AffineSubspace,
    pub consensus: usize,
    pub trials: usize,
    pub trace: FitTrace,
}

/// Draws indices without replacement and keeps those that raise the rank of the
/// drawn set (after subtracting `origin`), until the rank reaches `d`. Returns the
/// kept indices and an orthonormal basis of their span.
fn draw_spanning<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    pool: &mut [usize],
    d: usize,
    origin: Option<&DVector<f64>>,
    rng: &mut R,
) -> (Vec<usize>, Vec<DVector<f64>>) {
    let dd = x.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut kept = Vec::with_capacity(d);
    for drawn in 0..pool.len() {
        let pick = rng.random_range(drawn..pool.len());
        pool.swap(drawn, pick);
        let j = pool[drawn];
        let mut v: DVector<f64> = match origin {
            Some(o) => x.column(j) - o,
            None => x.column(j).into_owned(),
        };
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let r = v.norm();
        if r > RANK_TOL * norm && basis.len() < dd {
            basis.push(v / r);
            kept.push(j);
            if basis.len() == d {
                break;
            }
        }
    }
    (kept, basis)
}

/// Columns scaled to unit norm; zero columns stay zero.
fn directions(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut y = x.clone();
    for mut c in y.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
    y
}

fn check_rank(m: &DMatrix<f64>, d: usize) -> Result<()> {
    if d == 0 || d > m.nrows() {
        return Err(RsrError::invalid("ransac", "1 <= d <= D"));
    }
    let rank = linalg::numerical_rank(m, RANK_TOL);
    if rank < d {
        return Err(RsrError::RankDeficientData { rank, d });
    }
    Ok(())
}

/// Number of columns at angle `≤ τ` from `s` (zero columns count).
pub fn consensus_count(x: &DMatrix<f64>, s: &Subspace, tau: f64) -> usize {
    let residuals = s.residual_matrix(x);
    (0..x.ncols())
        .filter(|&j| {
            let norm = x.column(j).norm();
            norm == 0.0 || (residuals.column(j).norm() / norm).min(1.0).asin() <= tau + MEMBERSHIP_SLACK
        })
        .count()
}

/// RANSAC for linear subspaces: fit the span of random points until it has
/// dimension d, count the points within angle `τ`, keep the best.
pub fn ransac_rsr(x: &DMatrix<f64>, d: usize, cfg: &RansacConfig) -> Result<RansacFit> {
    ransac_rsr_traced(x, d, cfg, None)
}

pub fn ransac_rsr_traced(
    x: &DMatrix<f64>,
    d: usize,
    cfg: &RansacConfig,
    truth: Option<&Subspace>,
) -> Result<RansacFit> {
    let n = x.ncols();
    let m = cfg.threshold(n)?;
    check_rank(&directions(x), d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut trace = FitTrace::new();
    let mut best: Option<(Subspace, usize, Vec<usize>)> = None;
    for trial in 1..=cfg.max_trials {
        let (sample, basis) = draw_spanning(x, &mut pool, d, None, &mut rng);
        if sample.len() < d {
            return Err(RsrError::RankDeficientData { rank: sample.len(), d });
        }
        let span = Subspace::from_orthonormal(DMatrix::from_columns(&basis))?;
        let count = consensus_count(x, &span, cfg.tau);
        trace.records.push(TraceRecord {
            iteration: trial,
            energy: (n - count) as f64,
            theta1: truth.map(|t| t.distance(&span)).transpose()?,
            step: None,
            grad_norm: None,
            consensus: Some(count),
        });
        if best.as_ref().is_none_or(|b| count > b.1) {
            best = Some((span, count, sample));
        }
        let (subspace, consensus, sample) = best.as_ref().expect("set above");
        if *consensus > m {
            trace.reason = TerminalReason::Consensus;
            return Ok(RansacFit {
                subspace: subspace.clone(),
                consensus: *consensus,
                trials: trial,
                sample: sample.clone(),
                trace,
            });
        }
    }
    let (subspace, consensus, sample) = best.expect("at least one trial");
    trace.reason = TerminalReason::MaxIter;
    Ok(RansacFit {
        subspace,
        consensus,
        trials: cfg.max_trials,
        sample,
        trace,
    })
}

/// RANSAC for affine subspaces: an anchor point `y₀` plus points drawn until the
/// differences `y − y₀` span d dimensions; consensus counts points within
/// distance `τ` of the fitted affine set.
pub fn ransac_affine(x: &DMatrix<f64>, d: usize, cfg: &RansacConfig) -> Result<RansacAffineFit> {
    let n = x.ncols();
    let m = cfg.threshold(n)?;
    if n == 0 {
        return Err(RsrError::RankDeficientData { rank: 0, d });
    }
    let centered = DMatrix::from_fn(x.nrows(), n, |i, j| x[(i, j)] - x[(i, 0)]);
    check_rank(&centered, d)?;
    let scale = x.column_iter().map(|c| c.norm()).fold(1.0f64, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut trace = FitTrace::new();
    let mut best: Option<(AffineSubspace, usize)> = None;
    for trial in 1..=cfg.max_trials {
        let anchor_pos = rng.random_range(0..n);
        pool.swap(0, anchor_pos);
        let anchor = x.column(pool[0]).into_owned();
        let (sample, _) = draw_spanning(x, &mut pool[1..], d, Some(&anchor), &mut rng);
        let kept = if sample.len() < d {
            // This anchor sees fewer than d directions; try another.
            trace.records.push(TraceRecord {
                iteration: trial,
                energy: n as f64,
                theta1: None,
                step: None,
                grad_norm: None,
                consensus: Some(0),
            });
            continue;
        } else {
            sample
        };
        let diffs = DMatrix::from_fn(x.nrows(), kept.len(), |i, c| x[(i, kept[c])] - anchor[i]);
        let linear = orthonormalize(&diffs, RANK_TOL)?;
        let fitted = AffineSubspace::through(linear, &anchor)?;
        let tol = cfg.tau + MEMBERSHIP_SLACK * scale;
        let count = (0..n)
            .filter(|&j| fitted.distance_to(&x.column(j).into_owned()) <= tol)
            .count();
        trace.records.push(TraceRecord {
            iteration: trial,
            energy: (n - count) as f64,
            theta1: None,
            step: None,
            grad_norm: None,
            consensus: Some(count),
        });
        if best.as_ref().is_none_or(|b| count > b.1) {
            best = Some((fitted, count));
        }
        let (subspace, consensus) = best.as_ref().expect("set above");
        if *consensus > m {
            trace.reason = TerminalReason::Consensus;
            return Ok(RansacAffineFit {
                subspace: subspace.clone(),
                consensus: *consensus,
                trials: trial,
                trace,
            });
        }
    }
    trace.reason = TerminalReason::MaxIter;
    let (subspace, consensus) = best.ok_or(RsrError::RankDeficientData { rank: 0, d })?;
    Ok(RansacAffineFit {
        subspace,
        consensus,
        trials: cfg.max_trials,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_adversarial, gen_affine_adversarial, gen_haystack};
    use rand::SeedableRng;

    #[test]
    fn no_outliers_first_trial() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ds = gen_haystack(8, 3, 30, 0, 1.0, 1.0, &mut rng).unwrap();
        let fit = ransac_rsr(&ds.points, 3, &RansacConfig::default()).unwrap();
        assert_eq!(fit.trials, 1);
        assert_eq!(fit.consensus, 30);
        assert_eq!(fit.trace.reason, TerminalReason::Consensus);
        assert!(fit.subspace.approx_eq(ds.truth_subspace().unwrap()));
    }

    #[test]
    fn recovers_with_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = gen_adversarial(6, 2, 20, 8, 5.0, &mut rng).unwrap();
        for seed in 0..20 {
            let cfg = RansacConfig {
                seed,
                ..Default::default()
            };
            let fit = ransac_rsr(&ds.points, 2, &cfg).unwrap();
            assert!(fit.subspace.distance(ds.truth_subspace().unwrap()).unwrap() < 1e-9);
            let from_sample = orthonormalize(&ds.points.select_columns(&fit.sample), RANK_TOL).unwrap();
            assert!(from_sample.approx_eq(&fit.subspace));
        }
    }

    #[test]
    fn exhausts_trials_without_consensus() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = crate::grassmann::gaussian_matrix(5, 12, &mut rng);
        let cfg = RansacConfig {
            max_trials: 7,
            ..Default::default()
        };
        let fit = ransac_rsr(&x, 2, &cfg).unwrap();
        assert_eq!(fit.trials, 7);
        assert_eq!(fit.trace.records.len(), 7);
        assert_eq!(fit.trace.reason, TerminalReason::MaxIter);
        assert_eq!(fit.consensus, 2);
    }

    #[test]
    fn rank_deficient_rejected() {
        let x = DMatrix::from_fn(3, 4, |i, j| if i == 0 { j as f64 + 1.0 } else { 0.0 });
        assert!(matches!(
            ransac_rsr(&x, 2, &RansacConfig::default()),
            Err(RsrError::RankDeficientData { .. })
        ));
        let bad = RansacConfig {
            m: Some(10),
            ..Default::default()
        };
        assert!(ransac_rsr(&x, 1, &bad).is_err());
    }

    #[test]
    fn affine_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = gen_affine_adversarial(6, 2, 20, 0, 1.0, &mut rng).unwrap();
        let fit = ransac_affine(&ds.points, 2, &RansacConfig::default()).unwrap();
        assert_eq!(fit.trials, 1);
        let crate::dataset::Truth::Affine(truth) = ds.truth.as_ref().unwrap() else {
            panic!("affine truth")
        };
        assert!(fit.subspace.linear().distance(truth.linear()).unwrap() < 1e-9);
        assert!((fit.subspace.offset() - truth.offset()).norm() < 1e-9);
    }

    #[test]
    fn affine_on_linear_data_has_zero_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ds = gen_haystack(5, 2, 15, 0, 1.0, 1.0, &mut rng).unwrap();
        let fit = ransac_affine(&ds.points, 2, &RansacConfig::default()).unwrap();
        assert!(fit.subspace.offset().norm() < 1e-9);
    }
}
