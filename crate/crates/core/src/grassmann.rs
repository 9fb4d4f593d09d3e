//! Geometry of the Grassmannian G(D, d).
//!
//! A [`Subspace`] is a point of G(D, d) stored as a D×d matrix with orthonormal
//! columns. Two bases that differ by a d×d orthogonal factor describe the same
//! point, so comparisons go through principal angles ([`Subspace::approx_eq`])
//! and never through entries of the basis.
//!
//! Tangent vectors at `B` are D×d matrices `H` with `Bᵀ·H = 0`. The geodesic
//! leaving `B` in direction `H = U·Σ·Wᵀ` is
//!
//! ```text
//! Y(t) = B·W·cos(Σt)·Wᵀ + U·sin(Σt)·Wᵀ
//! ```
//!
//! and when `‖H‖₂ = 1` the largest principal angle between `Y(t)` and `B` is
//! exactly `t` for `0 ≤ t ≤ π/2`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, RsrError};
use crate::linalg::{self, canonicalize_signs, max_abs, sorted_svd};

/// Singular values below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Largest principal angle under which two subspaces are considered equal.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Allowed deviation of `BᵀB` from the identity.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Allowed `max |BᵀH|` for a direction to be accepted as tangent.
pub const TANGENCY_TOL: f64 = 1e-8;

const ZERO_ENTRY: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis after checking `BᵀB = I` to within [`ORTHONORMAL_TOL`].
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
            return Err(RsrError::invalid(
                "subspace basis",
                format!("1 <= d <= D, got {}x{}", basis.nrows(), basis.ncols()),
            ));
        }
        let gram = basis.transpose() * &basis;
        let deviation = max_abs(&(gram - DMatrix::identity(basis.ncols(), basis.ncols())));
        if !(deviation <= ORTHONORMAL_TOL) {
            return Err(RsrError::NotOrthonormal { deviation });
        }
        Ok(Subspace { basis })
    }

    /// `span(e_i : i ∈ axes)` in R^D.
    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Result<Self> {
        let mut basis = DMatrix::zeros(ambient_dim, axes.len());
        for (c, &i) in axes.iter().enumerate() {
            if i >= ambient_dim {
                return Err(RsrError::invalid("coordinate axis", format!("< {ambient_dim}")));
            }
            basis[(i, c)] = 1.0;
        }
        Subspace::from_orthonormal(basis)
    }

    /// The whole space R^D.
    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `P = B·Bᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * x)
    }

    /// `Q·x = x − B·(Bᵀ·x)`; its norm is the distance from `x` to the subspace.
    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        x - self.project(x)
    }

    /// Columnwise residuals `Q·X`.
    pub fn residual_matrix(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x - &self.basis * (self.basis.transpose() * x)
    }

    /// Angle in `[0, π/2]` between a nonzero vector and the subspace.
    pub fn angle_to(&self, x: &DVector<f64>) -> Result<f64> {
        let norm = x.norm();
        if norm == 0.0 {
            return Err(RsrError::ZeroVector);
        }
        let ratio = (self.residual(x).norm() / norm).clamp(0.0, 1.0);
        Ok(ratio.asin().clamp(0.0, std::f64::consts::FRAC_PI_2))
    }

    /// Largest principal angle to `other`.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        Ok(principal_angles(self, other)?.largest())
    }

    /// Subspace equality: `θ₁ < EQUALITY_TOL`. Different dimensions are unequal.
    pub fn approx_eq(&self, other: &Subspace) -> bool {
        self.approx_eq_tol(other, EQUALITY_TOL)
    }

    pub fn approx_eq_tol(&self, other: &Subspace, tol: f64) -> bool {
        match principal_angles(self, other) {
            Ok(a) => a.largest() < tol,
            Err(_) => false,
        }
    }

    /// The image `R·S` under an orthogonal D×D map.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Subspace> {
        Subspace::from_orthonormal(rotation * &self.basis)
    }
}

/// Principal angles, largest first.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalAngleVector {
    angles: Vec<f64>,
}

impl PrincipalAngleVector {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// θ₁.
    pub fn largest(&self) -> f64 {
        self.angles.first().copied().unwrap_or(0.0)
    }
}

/// A tangent vector `H` to G(D, d) at `at`, with `atᵀ·H = 0`.
#[derive(Clone, Debug)]
pub struct TangentDirection {
    at: Subspace,
    direction: DMatrix<f64>,
}

impl TangentDirection {
    pub fn new(at: Subspace, direction: DMatrix<f64>) -> Result<Self> {
        if direction.shape() != at.basis.shape() {
            return Err(RsrError::DimensionMismatch(format!(
                "tangent {:?} vs basis {:?}",
                direction.shape(),
                at.basis.shape()
            )));
        }
        let max_violation = max_abs(&(at.basis.transpose() * &direction));
        if !(max_violation <= TANGENCY_TOL) {
            return Err(RsrError::TangencyViolation { max_violation });
        }
        Ok(TangentDirection { at, direction })
    }

    /// Projects an arbitrary D×d matrix onto the tangent space: `Q·M`.
    pub fn project(at: Subspace, m: &DMatrix<f64>) -> Result<Self> {
        if m.shape() != at.basis.shape() {
            return Err(RsrError::DimensionMismatch(format!(
                "matrix {:?} vs basis {:?}",
                m.shape(),
                at.basis.shape()
            )));
        }
        let direction = at.residual_matrix(m);
        Ok(TangentDirection { at, direction })
    }

    pub(crate) fn from_parts_unchecked(at: Subspace, direction: DMatrix<f64>) -> Self {
        TangentDirection { at, direction }
    }

    pub fn at(&self) -> &Subspace {
        &self.at
    }

    pub fn direction(&self) -> &DMatrix<f64> {
        &self.direction
    }

    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.direction)
    }

    /// Frobenius inner product `⟨self, other⟩ = tr(selfᵀ·other)`.
    pub fn inner(&self, other: &DMatrix<f64>) -> f64 {
        self.direction.dot(other)
    }

    pub fn scaled(&self, factor: f64) -> TangentDirection {
        TangentDirection {
            at: self.at.clone(),
            direction: &self.direction * factor,
        }
    }
}

/// Orthonormal basis of the column span of `m`, dropping singular values
/// `≤ rank_tol · σ_max`. The basis is the leading left singular vectors with the
/// largest-magnitude entry of each column made positive.
pub fn orthonormalize(m: &DMatrix<f64>, rank_tol: f64) -> Result<Subspace> {
    if m.iter().all(|v| v.abs() < ZERO_ENTRY) {
        return Err(RsrError::AllZero);
    }
    let svd = sorted_svd(m, true, false);
    let top = svd.singular_values[0];
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > rank_tol * top)
        .count()
        .max(1);
    let u = svd.u.expect("requested U");
    let mut basis = u.columns(0, rank).into_owned();
    canonicalize_signs(&mut basis);
    Ok(Subspace { basis })
}

/// Principal angles between equal-dimensional subspaces, largest first.
///
/// Small angles come from the sines (singular values of `Q₁·B₂`) and large ones
/// from the cosines (singular values of `B₁ᵀ·B₂`), so both ends stay accurate.
/// In particular `sin θ₁ = ‖P₁ − P₂‖₂`.
pub fn principal_angles(s1: &Subspace, s2: &Subspace) -> Result<PrincipalAngleVector> {
    if s1.ambient_dim() != s2.ambient_dim() || s1.dim() != s2.dim() {
        return Err(RsrError::DimensionMismatch(format!(
            "G({}, {}) vs G({}, {})",
            s1.ambient_dim(),
            s1.dim(),
            s2.ambient_dim(),
            s2.dim()
        )));
    }
    let d = s1.dim();
    let cross = s1.basis.transpose() * &s2.basis;
    let cosines = linalg::singular_values_desc(&cross);
    let sines = linalg::singular_values_desc(&(&s2.basis - &s1.basis * &cross));
    let angles = (0..d)
        .map(|i| {
            // i-th largest angle: i-th largest sine, i-th smallest cosine.
            let s = sines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            if s * s < 0.5 {
                s.asin()
            } else {
                cosines[d - 1 - i].clamp(0.0, 1.0).acos()
            }
        })
        .collect();
    Ok(PrincipalAngleVector { angles })
}

/// `Q_S·x`.
pub fn residual(s: &Subspace, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_vector(s, x)?;
    Ok(s.residual(x))
}

/// Angle between `x` and `s`, via `arcsin(‖Q·x‖ / ‖x‖)`.
pub fn angle_to(s: &Subspace, x: &DVector<f64>) -> Result<f64> {
    check_vector(s, x)?;
    s.angle_to(x)
}

fn check_vector(s: &Subspace, x: &DVector<f64>) -> Result<()> {
    if x.len() != s.ambient_dim() {
        return Err(RsrError::DimensionMismatch(format!(
            "vector of length {} in R^{}",
            x.len(),
            s.ambient_dim()
        )));
    }
    Ok(())
}

/// Follows the geodesic from `s` in direction `h` for arclength `t`.
pub fn geodesic_step(s: &Subspace, h: &TangentDirection, t: f64) -> Result<Subspace> {
    if h.direction.shape() != s.basis.shape() {
        return Err(RsrError::DimensionMismatch(format!(
            "tangent {:?} vs basis {:?}",
            h.direction.shape(),
            s.basis.shape()
        )));
    }
    let max_violation = max_abs(&(s.basis.transpose() * &h.direction));
    if !(max_violation <= TANGENCY_TOL) {
        return Err(RsrError::TangencyViolation { max_violation });
    }
    if t == 0.0 {
        return Ok(s.clone());
    }
    let svd = sorted_svd(&h.direction, true, true);
    let u = svd.u.expect("requested U");
    let w_t = svd.v_t.expect("requested V");
    let k = svd.singular_values.len();
    let cos = DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        svd.singular_values.iter().map(|sv| (sv * t).cos()),
    ));
    let sin = DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        svd.singular_values.iter().map(|sv| (sv * t).sin()),
    ));
    let y = &s.basis * w_t.transpose() * cos * &w_t + u * sin * &w_t;
    Ok(Subspace {
        basis: reorthonormalize(y),
    })
}

/// Thin QR with a nonnegative diagonal in R; a basis that is already orthonormal
/// comes back unchanged up to roundoff.
fn reorthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    let qr = y.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// A subspace drawn from the orthogonally invariant distribution on G(D, d).
pub fn random_subspace<R: Rng + ?Sized>(ambient_dim: usize, dim: usize, rng: &mut R) -> Subspace {
    assert!(dim >= 1 && dim <= ambient_dim, "need 0 < d <= D");
    loop {
        let g = gaussian_matrix(ambient_dim, dim, rng);
        if let Ok(s) = orthonormalize(&g, RANK_TOL) {
            if s.dim() == dim {
                return s;
            }
        }
    }
}

/// A subspace with `θ₁(result, center) < radius`: a geodesic step from `center`
/// along a random unit-spectral-norm tangent for a random arclength in `[0, radius)`.
pub fn random_in_ball<R: Rng + ?Sized>(center: &Subspace, radius: f64, rng: &mut R) -> Subspace {
    assert!(
        radius > 0.0 && radius <= std::f64::consts::FRAC_PI_2,
        "need 0 < radius <= pi/2"
    );
    if center.dim() == center.ambient_dim() {
        return center.clone();
    }
    let direction = loop {
        let g = gaussian_matrix(center.ambient_dim(), center.dim(), rng);
        let h = center.residual_matrix(&g);
        let norm = linalg::spectral_norm(&h);
        if norm > 1e-12 {
            break h / norm;
        }
    };
    let t = rng.random::<f64>() * radius;
    let tangent = TangentDirection::from_parts_unchecked(center.clone(), direction);
    geodesic_step(center, &tangent, t).expect("projected direction is tangent")
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// A D×D orthogonal matrix drawn from the Haar measure.
pub fn random_rotation<R: Rng + ?Sized>(ambient_dim: usize, rng: &mut R) -> DMatrix<f64> {
    random_subspace(ambient_dim, ambient_dim, rng).basis
}

/// An affine subspace `offset + linear`, with `offset` the minimal-norm
/// representative (orthogonal to `linear`).
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    linear: Subspace,
    offset: DVector<f64>,
}

impl AffineSubspace {
    /// Builds from any point on the affine set; the offset is reduced to its
    /// minimal-norm representative `Q·point`.
    pub fn through(linear: Subspace, point: &DVector<f64>) -> Result<Self> {
        check_vector(&linear, point)?;
        let offset = linear.residual(point);
        Ok(AffineSubspace { linear, offset })
    }

    /// Takes `offset` as given after checking `Bᵀ·offset = 0` to within [`ORTHONORMAL_TOL`]
    /// relative to its norm.
    pub fn from_parts(linear: Subspace, offset: DVector<f64>) -> Result<Self> {
        check_vector(&linear, &offset)?;
        let along = (linear.basis.transpose() * &offset).amax();
        if along > ORTHONORMAL_TOL * offset.norm().max(1.0) {
            return Err(RsrError::invalid(
                "affine offset",
                format!("orthogonality to the linear part (|B^T b| = {along:e})"),
            ));
        }
        Ok(AffineSubspace { linear, offset })
    }

    pub fn linear(&self) -> &Subspace {
        &self.linear
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn distance_to(&self, x: &DVector<f64>) -> f64 {
        self.linear.residual(&(x - &self.offset)).norm()
    }

    /// Equal linear parts and offsets within `EQUALITY_TOL`.
    pub fn approx_eq(&self, other: &AffineSubspace) -> bool {
        self.linear.approx_eq(&other.linear) && (&self.offset - &other.offset).norm() < EQUALITY_TOL
    }
}
