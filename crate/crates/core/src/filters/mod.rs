//! Base Bayesian filters and the conversions used by the fusion loops.
//!
//! All steps are pure: they take the prior by reference and return a new
//! posterior. Randomized steps take an explicit RNG stream.

mod corrector;
mod cubature;
mod kalman;
mod particle;

use nalgebra::{DMatrix, DVector};

use crate::Real;

pub use corrector::{ic_update_cubature, ic_update_kalman, ic_update_particles, stacked_update};
pub use cubature::{ckf_predict, ckf_step, ckf_update};
pub use kalman::{kf_predict, kf_step, kf_update, LinearGaussianModel};
pub use particle::{
    gaussian_to_particles, particles_to_gaussian, sir_predict, sir_step, sir_update,
    systematic_resample, ParticleMoments, ParticleSet,
};

/// State transition and measurement maps with additive Gaussian noise.
pub trait NonlinearModel<T: Real>: Send + Sync {
    fn state_dim(&self) -> usize;

    fn measurement_dim(&self) -> usize;

    fn transition(&self, x: &DVector<T>) -> DVector<T>;

    /// Additive process-noise covariance `Q`.
    fn process_cov(&self) -> &DMatrix<T>;

    /// A factor `L` with `L L' = Q`, used to sample process noise. It may have
    /// fewer columns than rows when `Q` is rank deficient.
    fn process_factor(&self) -> &DMatrix<T>;

    fn measure(&self, x: &DVector<T>) -> DVector<T>;

    /// Additive measurement-noise covariance `R`.
    fn measurement_cov(&self) -> &DMatrix<T>;

    /// Indices of measurement coordinates that are angles (wrapped to (-pi, pi]).
    fn angle_components(&self) -> &[usize] {
        &[]
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let pi = T::pi();
    let two_pi = T::two_pi();
    let mut r = a % two_pi;
    if r > pi {
        r -= two_pi;
    } else if r <= -pi {
        r += two_pi;
    }
    r
}

/// Wraps the angle components of a measurement-space difference.
pub(crate) fn wrap_components<T: Real>(mut d: DVector<T>, angles: &[usize]) -> DVector<T> {
    for &i in angles {
        d[i] = wrap_angle(d[i]);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_half_open_interval() {
        let pi = std::f64::consts::PI;
        assert!((wrap_angle(3.0 * pi) - pi).abs() < 1e-12);
        assert!((wrap_angle(-pi) - pi).abs() < 1e-12);
        assert!((wrap_angle(0.25f64) - 0.25).abs() < 1e-15);
        let d = wrap_angle((-179.0f64).to_radians() - 179.0f64.to_radians());
        assert!((d.abs() - 2.0f64.to_radians()).abs() < 1e-12);
    }
}
