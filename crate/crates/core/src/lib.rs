//! Robust subspace recovery under adversarial outliers.
//!
//! Given points in R^D, some of which (the inliers) lie on an unknown
//! d-dimensional subspace `L*`, the estimators here try to recover `L*` no matter
//! where the remaining points are placed:
//!
//! - [`estimators::spca`]: top eigenspace of the spherized covariance.
//! - [`estimators::sggd`]: geodesic subgradient descent on the Grassmannian for
//!   the least-absolute-deviations energy of the spherized points.
//! - [`estimators::ransac_rsr`]: RANSAC over spans of d data points.
//! - [`estimators::affine_sggd_pipeline`] and [`estimators::ransac_affine`] for
//!   affine subspaces.
//!
//! [`oracles`] computes exact answers on small instances and [`diagnostics`]
//! the quantities (condition numbers, stability bounds, SNR thresholds) that
//! decide when recovery is guaranteed. [`harness`] runs seeded sweeps.
//!
//! ```
//! use rand::SeedableRng;
//! use rsr::{dataset, estimators};
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let ds = dataset::gen_adversarial(10, 2, 40, 5, 1e3, &mut rng)?;
//! let init = estimators::spca(&ds.points, 2)?.subspace;
//! let fit = estimators::sggd(&ds.points, 2, &init, &Default::default())?;
//! assert!(fit.subspace.distance(ds.truth_subspace().unwrap())? < 1e-6);
//! # Ok::<(), rsr::RsrError>(())
//! ```

pub mod dataset;
pub mod diagnostics;
mod error;
pub mod estimators;
pub mod grassmann;
pub mod harness;
mod linalg;
pub mod oracles;

pub use error::{Result, RsrError};
pub use grassmann::{AffineSubspace, PrincipalAngleVector, Subspace, TangentDirection};
pub use linalg::{binomial, spectral_norm};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grassmannian.md")]
    mod grassmannian {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
