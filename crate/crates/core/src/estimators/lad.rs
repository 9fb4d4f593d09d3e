use nalgebra::DMatrix;

use crate::dataset::spherize;
use crate::error::Result;
use crate::grassmann::{Subspace, TangentDirection};

/// `F(S) = Σ ‖Q_S x‖/‖x‖`, the sum of sines of the point-to-subspace angles.
pub fn lad_energy(x: &DMatrix<f64>, s: &Subspace) -> Result<f64> {
    Ok(lad_energy_spherized(&spherize(x)?, s))
}

/// [`lad_energy`] for columns already of unit norm.
pub fn lad_energy_spherized(xs: &DMatrix<f64>, s: &Subspace) -> f64 {
    s.residual_matrix(xs).column_iter().map(|c| c.norm()).sum()
}

/// Tangent-space subgradient `∇F = −Σ (Q x̃/‖Q x̃‖)(x̃ᵀB)` over the points with
/// `‖Q x̃‖ > eps`.
pub fn lad_gradient(x: &DMatrix<f64>, s: &Subspace, subgradient_eps: f64) -> Result<TangentDirection> {
    Ok(lad_gradient_spherized(&spherize(x)?, s, subgradient_eps))
}

/// [`lad_gradient`] for columns already of unit norm.
pub fn lad_gradient_spherized(xs: &DMatrix<f64>, s: &Subspace, subgradient_eps: f64) -> TangentDirection {
    let mut residuals = s.residual_matrix(xs);
    for mut col in residuals.column_iter_mut() {
        let norm = col.norm();
        if norm > subgradient_eps && norm > 0.0 {
            col /= -norm;
        } else {
            col.fill(0.0);
        }
    }
    let coords = xs.transpose() * s.basis();
    let mut g = residuals * coords;
    // Roundoff can leave a component along B of order 1e-16; remove it.
    let drift = s.basis().transpose() * &g;
    g -= s.basis() * drift;
    TangentDirection::from_parts_unchecked(s.clone(), g)
}
