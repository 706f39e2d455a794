//! Fisher-Rao geometry of Dirichlet and beta distributions.
//!
//! The parameter space of the Dirichlet family is the open quadrant
//! `M = (0, ∞)ⁿ`. This crate works with the family of metrics
//!
//! ```text
//! ds² = Σᵢ dxᵢ² / f(xᵢ) − (Σᵢ dxᵢ)² / f(x₁ + … + xₙ)
//! ```
//!
//! parameterized by a [`MetricFunction`] `f`. The Fisher-Rao metric of the
//! Dirichlet family is recovered with `f = 1/ψ′` ([`TrigammaReciprocal`]);
//! [`RationalApprox`] is a cheap rational stand-in with the same qualitative
//! behavior.
//!
//! Modules:
//!
//! * [`specfun`]: polygamma functions and the metric-generating functions.
//! * [`geometry`]: metric tensor, inverse, Christoffel symbols, densities.
//! * [`embedding`]: isometric embedding into Minkowski space, normal field,
//!   shape operator.
//! * [`curvature`]: sectional curvature (Gauss equation, axis planes, the
//!   two-dimensional closed form), principal curvatures, grid scans.
//! * [`geodesics`]: exponential map, logarithm map by shooting, distance,
//!   diagonal geodesics by quadrature.
//! * [`frechet`]: Fréchet (Karcher) means.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use fisher_dirichlet::{curvature, specfun::Family};
//!
//! let k = curvature::gaussian_2d(&Family::Trigamma, 2.0, 5.0).unwrap();
//! assert!(k < 0.0);
//! ```

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;
pub mod linalg;
pub mod ode;
pub mod quad;

pub mod curvature;
pub mod embedding;
pub mod frechet;
pub mod geodesics;
pub mod geometry;
pub mod specfun;

pub use error::{Error, IntegrationFailure, IntegrationFailureKind, Result};
pub use geometry::{MetricMatrix, Point, Tangent};
pub use specfun::{Family, MetricFunction, RationalApprox, TrigammaReciprocal};
