//! Conservative density fusion for multi-sensor state estimation.
//!
//! The crate is organised bottom-up:
//!
//! - [`gaussian`]: Gaussian densities, finite Gaussian mixtures, simplex weights and
//!   the closed-form information quantities between them.
//! - [`quadrature`]: a grid-based numeric oracle for divergences between mixtures in
//!   one and two dimensions.
//! - [`fusion`]: naive, GA/CI, FFCC, CU and AA fusion rules plus the conservative
//!   chain verifier.
//! - [`weights`]: fusing-weight design (target fitting, diversity preference,
//!   Jensen bound) and the equal-divergence diagnostic.
//! - [`filters`]: Kalman, cubature Kalman and SIR particle filters, iterated-corrector
//!   updates and particle/Gaussian conversions.
//! - [`scenarios`]: the two-sensor Monte Carlo tracking harness.
//!
//! All numerical code is generic over a [`Real`] scalar (`f32` or `f64`). The
//! aliases at the crate root pin the common `f64` instantiations.

pub mod error;
pub mod filters;
pub mod fusion;
pub mod gaussian;
pub(crate) mod linalg;
pub mod quadrature;
pub mod scenarios;
pub mod simplex;
pub mod weights;

use nalgebra as na;
use num_traits as nt;

pub use error::{FusionError, Result};

/// Floating point scalar accepted by every numerical routine in the crate.
pub trait Real:
    Copy
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::ToPrimitive
    + na::RealField
    + na::Scalar
    + serde::Serialize
    + serde::de::DeserializeOwned
    + Send
    + Sync
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub type Gaussian = gaussian::GaussianDensity<f64>;
pub type Gaussian32 = gaussian::GaussianDensity<f32>;
pub type Mixture = gaussian::GaussianMixture<f64>;
pub type Mixture32 = gaussian::GaussianMixture<f32>;
pub type Weights = gaussian::SimplexWeights<f64>;
pub type Fused = fusion::FusedPair<f64>;
pub type Solution = weights::WeightSolution<f64>;
pub type Particles = filters::ParticleSet<f64>;
pub type LinearModel = filters::LinearGaussianModel<f64>;
