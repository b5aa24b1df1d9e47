//! Iterated-corrector updates: both sensors' likelihoods applied within one
//! Bayes step.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::particle::{log_likelihoods, reweight_and_resample};
use super::{ckf_update, kf_update, LinearGaussianModel, NonlinearModel, ParticleSet};
use crate::gaussian::GaussianDensity;
use crate::{FusionError, Real, Result};

/// Sequential Kalman updates, one per `(sensor, measurement)` pair.
pub fn ic_update_kalman<T: Real>(
    pred: &GaussianDensity<T>,
    sensors: &[(&LinearGaussianModel<T>, &DVector<T>)],
) -> Result<GaussianDensity<T>> {
    let mut post = pred.clone();
    for (m, y) in sensors {
        post = kf_update(&post, m, y)?;
    }
    Ok(post)
}

/// Sequential cubature updates, one per `(sensor, measurement)` pair.
pub fn ic_update_cubature<T: Real>(
    pred: &GaussianDensity<T>,
    sensors: &[(&dyn NonlinearModel<T>, &DVector<T>)],
) -> Result<GaussianDensity<T>> {
    let mut post = pred.clone();
    for (m, y) in sensors {
        post = ckf_update(&post, *m, y)?;
    }
    Ok(post)
}

/// Weights each particle by the product of all sensors' likelihoods, then
/// resamples once.
pub fn ic_update_particles<T: Real, R: Rng + ?Sized>(
    pred: &ParticleSet<T>,
    sensors: &[(&dyn NonlinearModel<T>, &DVector<T>)],
    rng: &mut R,
) -> Result<ParticleSet<T>> {
    let mut total = vec![T::zero(); pred.len()];
    for (m, y) in sensors {
        for (acc, l) in total.iter_mut().zip(log_likelihoods(pred.particles(), *m, y)?) {
            *acc += l;
        }
    }
    reweight_and_resample(pred, &total, rng)
}

/// Single Kalman update with all measurements stacked into one vector.
pub fn stacked_update<T: Real>(
    pred: &GaussianDensity<T>,
    sensors: &[(&LinearGaussianModel<T>, &DVector<T>)],
) -> Result<GaussianDensity<T>> {
    let first = sensors
        .first()
        .ok_or(FusionError::TooFewSources { needed: 1, got: 0 })?
        .0;
    let rows: usize = sensors.iter().map(|(m, _)| m.h().nrows()).sum();
    let n = pred.dim();
    let mut h = DMatrix::zeros(rows, n);
    let mut r = DMatrix::zeros(rows, rows);
    let mut y = DVector::zeros(rows);
    let mut at = 0;
    for (m, yi) in sensors {
        let k = m.h().nrows();
        h.view_mut((at, 0), (k, n)).copy_from(m.h());
        r.view_mut((at, at), (k, k)).copy_from(m.r());
        y.rows_mut(at, k).copy_from(yi);
        at += k;
    }
    let stacked = first.with_sensor(h, r)?;
    kf_update(pred, &stacked, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::particles_to_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sensors() -> (LinearGaussianModel<f64>, LinearGaussianModel<f64>) {
        let f = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let g = DMatrix::from_row_slice(2, 1, &[0.5, 1.0]);
        let q = DMatrix::from_element(1, 1, 2.0);
        let a = LinearGaussianModel::new(
            f.clone(),
            g.clone(),
            q.clone(),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::from_element(1, 1, 4.0),
        )
        .unwrap();
        let b = LinearGaussianModel::new(
            f,
            g,
            q,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.3, 1.0]),
            DMatrix::from_row_slice(2, 2, &[9.0, 1.0, 1.0, 3.0]),
        )
        .unwrap();
        (a, b)
    }

    fn prior() -> GaussianDensity<f64> {
        GaussianDensity::from_slices(&[1.0, -0.5], &[5.0, 1.0, 1.0, 2.0]).unwrap()
    }

    fn close(a: &GaussianDensity<f64>, b: &GaussianDensity<f64>, tol: f64) -> bool {
        (a.mean() - b.mean()).norm() < tol && (a.cov() - b.cov()).norm() < tol
    }

    #[test]
    fn sequential_equals_stacked() {
        let (a, b) = sensors();
        let y1 = DVector::from_vec(vec![2.0]);
        let y2 = DVector::from_vec(vec![0.5, 1.5]);
        let seq = ic_update_kalman(&prior(), &[(&a, &y1), (&b, &y2)]).unwrap();
        let batch = stacked_update(&prior(), &[(&a, &y1), (&b, &y2)]).unwrap();
        assert!(close(&seq, &batch, 1e-10));
        let rev = ic_update_kalman(&prior(), &[(&b, &y2), (&a, &y1)]).unwrap();
        assert!(close(&seq, &rev, 1e-10));
    }

    #[test]
    fn duplicate_sensor_halves_noise() {
        let (a, _) = sensors();
        let y = DVector::from_vec(vec![2.0]);
        let twice = ic_update_kalman(&prior(), &[(&a, &y), (&a, &y)]).unwrap();
        let half = a.with_sensor(a.h().clone(), a.r() * 0.5).unwrap();
        let once = kf_update(&prior(), &half, &y).unwrap();
        assert!(close(&twice, &once, 1e-10));
    }

    #[test]
    fn cubature_corrector_matches_kalman_on_linear_sensors() {
        let (a, b) = sensors();
        let y1 = DVector::from_vec(vec![2.0]);
        let y2 = DVector::from_vec(vec![0.5, 1.5]);
        let kf = ic_update_kalman(&prior(), &[(&a, &y1), (&b, &y2)]).unwrap();
        let ckf = ic_update_cubature(&prior(), &[(&a, &y1), (&b, &y2)]).unwrap();
        assert!(close(&kf, &ckf, 1e-9));
    }

    #[test]
    fn particle_corrector_approaches_stacked_update() {
        let (a, b) = sensors();
        let y1 = DVector::from_vec(vec![2.0]);
        let y2 = DVector::from_vec(vec![0.5, 1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cloud = crate::filters::gaussian_to_particles(&prior(), 50_000, &mut rng).unwrap();
        let post = ic_update_particles(&cloud, &[(&a, &y1), (&b, &y2)], &mut rng).unwrap();
        let fit = particles_to_gaussian(&post).unwrap().density;
        let exact = stacked_update(&prior(), &[(&a, &y1), (&b, &y2)]).unwrap();
        for i in 0..2 {
            let sd = exact.cov()[(i, i)].sqrt();
            assert!((fit.mean()[i] - exact.mean()[i]).abs() < 5.0 * sd / (50_000f64).sqrt());
        }
    }
}
