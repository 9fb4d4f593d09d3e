use nalgebra::DMatrix;

use crate::dataset::spherize;
use crate::error::{Result, RsrError};
use crate::grassmann::Subspace;
use crate::linalg::{canonicalize_signs, gram_eigen};

/// Eigen-gaps `λ_d − λ_{d+1}` at or below this flag the output as ill-posed.
pub const EIGEN_GAP_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SpcaFit {
    pub subspace: Subspace,
    /// Eigenvalues of the spherized covariance, descending (length D).
    pub eigenvalues: Vec<f64>,
    /// `λ_d − λ_{d+1}`, or `λ_d` when d = D.
    pub eigen_gap: f64,
    pub gap_warning: bool,
}

/// Top-d eigenspace of `Σ̃ = (1/(N−1)) Σ x xᵀ/‖x‖²`.
pub fn spca(x: &DMatrix<f64>, d: usize) -> Result<SpcaFit> {
    let (dd, n) = x.shape();
    if d == 0 || d > dd {
        return Err(RsrError::invalid("spca", "1 <= d <= D"));
    }
    if n < 2 || n < d {
        return Err(RsrError::invalid("spca", "N >= max(d, 2)"));
    }
    let scaled = spherize(x)? / ((n - 1) as f64).sqrt();
    let (eigenvalues, vectors) = gram_eigen(&scaled);
    if vectors.ncols() < d {
        return Err(RsrError::RankDeficientData {
            rank: vectors.ncols(),
            d,
        });
    }
    let mut basis = vectors.columns(0, d).into_owned();
    canonicalize_signs(&mut basis);
    let subspace = Subspace::from_orthonormal(basis)?;
    let eigen_gap = eigenvalues[d - 1] - eigenvalues.get(d).copied().unwrap_or(0.0);
    Ok(SpcaFit {
        subspace,
        eigenvalues,
        eigen_gap,
        gap_warning: eigen_gap <= EIGEN_GAP_TOL,
    })
}
