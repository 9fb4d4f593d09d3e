use nalgebra::DMatrix;

use super::median::{geometric_median, MedianConfig};
use super::sggd::{sggd_traced, SggdConfig};
use super::spca::spca;
use super::FitTrace;
use crate::dataset::{symmetrize, symmetrized_pair};
use crate::error::{Result, RsrError};
use crate::grassmann::{AffineSubspace, Subspace};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AffinePipelineConfig {
    pub sggd: SggdConfig,
    pub median: MedianConfig,
}

#[derive(Clone, Debug)]
pub struct AffineFit {
    pub subspace: AffineSubspace,
    /// The SPCA initialization on the symmetrized data.
    pub init: Subspace,
    /// SGGD trace on the symmetrized data.
    pub trace: FitTrace,
    pub iterations: usize,
    pub energy: f64,
    /// `(inlier–inlier pairs, all pairs)` of the symmetrized set, given labels.
    pub inlier_pairs: Option<(usize, usize)>,
}

impl AffineFit {
    pub fn inlier_pair_fraction(&self) -> Option<f64> {
        self.inlier_pairs.map(|(p, t)| p as f64 / t as f64)
    }
}

/// Affine RSR through symmetrization: SGGD (SPCA init) on all pairwise
/// differences estimates the linear part L̂, then the geometric median of the
/// points projected onto L̂⊥ gives the minimal-norm offset.
pub fn affine_sggd_pipeline(
    x: &DMatrix<f64>,
    d: usize,
    cfg: &AffinePipelineConfig,
    inlier_mask: Option<&[bool]>,
    truth: Option<&Subspace>,
) -> Result<AffineFit> {
    let n = x.ncols();
    let sym = symmetrize(x)?;
    if let Some(k) = sym.column_iter().position(|c| c.iter().all(|&v| v == 0.0)) {
        let (i, j) = symmetrized_pair(n, k);
        return Err(RsrError::DuplicatePair { i, j });
    }
    let inlier_pairs = match inlier_mask {
        Some(mask) if mask.len() == n => {
            let pure = (0..sym.ncols())
                .filter(|&k| {
                    let (i, j) = symmetrized_pair(n, k);
                    mask[i] && mask[j]
                })
                .count();
            Some((pure, sym.ncols()))
        }
        Some(_) => return Err(RsrError::DimensionMismatch("inlier mask length".into())),
        None => None,
    };
    let init = spca(&sym, d)?.subspace;
    let fit = sggd_traced(&sym, d, &init, &cfg.sggd, truth)?;
    let projected = fit.subspace.residual_matrix(x);
    let median = geometric_median(&projected, &cfg.median);
    let subspace = AffineSubspace::through(fit.subspace, &median)?;
    Ok(AffineFit {
        subspace,
        init,
        trace: fit.trace,
        iterations: fit.iterations,
        energy: fit.energy,
        inlier_pairs,
    })
}
