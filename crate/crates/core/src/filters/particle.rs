use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{wrap_components, NonlinearModel};
use crate::gaussian::{weight_sum_tol, GaussianDensity};
use crate::linalg::{floor_ratio, sqrt_spd, symmetrize};
use crate::{lit, FusionError, Real, Result};

/// Weighted particle approximation of a density.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<T: Real> {
    particles: Vec<DVector<T>>,
    weights: Vec<T>,
}

impl<T: Real> ParticleSet<T> {
    pub fn new(particles: Vec<DVector<T>>, weights: Vec<T>) -> Result<Self> {
        if particles.is_empty() {
            return Err(FusionError::InvalidConfig("particle set is empty".into()));
        }
        if weights.len() != particles.len() {
            return Err(FusionError::DimensionMismatch {
                expected: particles.len(),
                got: weights.len(),
            });
        }
        let dim = particles[0].len();
        if let Some(p) = particles.iter().find(|p| p.len() != dim) {
            return Err(FusionError::DimensionMismatch { expected: dim, got: p.len() });
        }
        if particles.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(FusionError::NonFinite("particle"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(FusionError::InvalidWeights("particle weights must be finite and non-negative".into()));
        }
        let sum = weights.iter().fold(T::zero(), |a, &w| a + w);
        if (sum - T::one()).abs() > weight_sum_tol(weights.len()) {
            return Err(FusionError::InvalidWeights(format!(
                "particle weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { particles, weights })
    }

    /// Equally weighted set.
    pub fn uniform(particles: Vec<DVector<T>>) -> Result<Self> {
        let n = particles.len().max(1);
        Self::new(particles, vec![lit(1.0 / n as f64); n])
    }

    pub fn particles(&self) -> &[DVector<T>] {
        &self.particles
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.particles[0].len()
    }

    /// Weighted mean.
    pub fn mean(&self) -> DVector<T> {
        let mut acc = DVector::zeros(self.dim());
        for (p, &w) in self.particles.iter().zip(&self.weights) {
            acc += p * w;
        }
        acc
    }
}

fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<T> {
    DVector::from_fn(n, |_, _| lit(rng.sample::<f64, _>(StandardNormal)))
}

/// Indices drawn by systematic resampling: one uniform offset, `n` evenly
/// spaced pointers into the cumulative weights.
pub fn systematic_resample<T: Real, R: Rng + ?Sized>(weights: &[T], n: usize, rng: &mut R) -> Vec<usize> {
    let total: f64 = weights.iter().map(|w| crate::to_f64(*w)).sum();
    let step = total / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut idx = Vec::with_capacity(n);
    let mut cum = 0.0;
    let mut j = 0;
    let last = weights.len() - 1;
    for _ in 0..n {
        while j < last && cum + crate::to_f64(weights[j]) <= u {
            cum += crate::to_f64(weights[j]);
            j += 1;
        }
        idx.push(j);
        u += step;
    }
    idx
}

/// Propagates every particle through the transition and adds sampled process noise.
pub fn sir_predict<T: Real, M: NonlinearModel<T> + ?Sized, R: Rng + ?Sized>(
    prior: &ParticleSet<T>,
    model: &M,
    rng: &mut R,
) -> Result<ParticleSet<T>> {
    let l = model.process_factor();
    let particles = prior
        .particles
        .iter()
        .map(|x| model.transition(x) + l * standard_normal::<T, R>(rng, l.ncols()))
        .collect();
    ParticleSet::new(particles, prior.weights.clone())
}

/// Measurement log-likelihoods up to a shared constant.
pub(crate) fn log_likelihoods<T: Real, M: NonlinearModel<T> + ?Sized>(
    particles: &[DVector<T>],
    model: &M,
    y: &DVector<T>,
) -> Result<Vec<T>> {
    if y.len() != model.measurement_dim() {
        return Err(FusionError::DimensionMismatch {
            expected: model.measurement_dim(),
            got: y.len(),
        });
    }
    let chol = Cholesky::new(model.measurement_cov().clone())
        .ok_or(FusionError::NotPositiveDefinite(f64::NAN))?;
    let half: T = lit(0.5);
    Ok(particles
        .iter()
        .map(|x| {
            let d = wrap_components(y - model.measure(x), model.angle_components());
            -(d.dot(&chol.solve(&d)) * half)
        })
        .collect())
}

/// Multiplies the prior weights by `exp(loglik)` and resamples back to the same count.
pub(crate) fn reweight_and_resample<T: Real, R: Rng + ?Sized>(
    prior: &ParticleSet<T>,
    loglik: &[T],
    rng: &mut R,
) -> Result<ParticleSet<T>> {
    let logw: Vec<f64> = prior
        .weights
        .iter()
        .zip(loglik)
        .map(|(&w, &l)| crate::to_f64(w).ln() + crate::to_f64(l))
        .collect();
    if logw.iter().any(|l| l.is_nan()) {
        return Err(FusionError::DegenerateUpdate("NaN particle likelihood".into()));
    }
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(FusionError::DegenerateUpdate(format!(
            "all {} particle likelihoods are zero",
            logw.len()
        )));
    }
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let idx = systematic_resample(&w, prior.len(), rng);
    ParticleSet::uniform(idx.into_iter().map(|i| prior.particles[i].clone()).collect())
}

/// Weights by the measurement likelihood and resamples systematically.
pub fn sir_update<T: Real, M: NonlinearModel<T> + ?Sized, R: Rng + ?Sized>(
    pred: &ParticleSet<T>,
    model: &M,
    y: &DVector<T>,
    rng: &mut R,
) -> Result<ParticleSet<T>> {
    let ll = log_likelihoods(&pred.particles, model, y)?;
    reweight_and_resample(pred, &ll, rng)
}

pub fn sir_step<T: Real, M: NonlinearModel<T> + ?Sized, R: Rng + ?Sized>(
    prior: &ParticleSet<T>,
    model: &M,
    y: &DVector<T>,
    rng: &mut R,
) -> Result<ParticleSet<T>> {
    let pred = sir_predict(prior, model, rng)?;
    sir_update(&pred, model, y, rng)
}

/// Gaussian moment fit of a particle set.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleMoments<T: Real> {
    pub density: GaussianDensity<T>,
    /// Set when the particles had no spread and the covariance was replaced by a floor.
    pub degenerate: bool,
}

/// Weighted mean and population covariance of the particles.
pub fn particles_to_gaussian<T: Real>(p: &ParticleSet<T>) -> Result<ParticleMoments<T>> {
    let mean = p.mean();
    let n = p.dim();
    let mut cov = DMatrix::zeros(n, n);
    for (x, &w) in p.particles.iter().zip(&p.weights) {
        let d = x - &mean;
        cov += &d * d.transpose() * w;
    }
    let cov = symmetrize(&cov);
    let spread = cov.diagonal().max();
    let scale = T::one().max(mean.norm_squared());
    if spread <= floor_ratio::<T>() * scale {
        let floor = DMatrix::identity(n, n) * (floor_ratio::<T>() * scale);
        return Ok(ParticleMoments {
            density: GaussianDensity::new(mean, floor)?,
            degenerate: true,
        });
    }
    Ok(ParticleMoments {
        density: GaussianDensity::new(mean, cov)?,
        degenerate: false,
    })
}

/// `n` independent draws from `g` with uniform weights.
pub fn gaussian_to_particles<T: Real, R: Rng + ?Sized>(
    g: &GaussianDensity<T>,
    n: usize,
    rng: &mut R,
) -> Result<ParticleSet<T>> {
    if n == 0 {
        return Err(FusionError::InvalidConfig("particle count must be at least 1".into()));
    }
    let l = match Cholesky::new(g.cov().clone()) {
        Some(c) => c.unpack(),
        None => sqrt_spd(g.cov())?,
    };
    let particles = (0..n)
        .map(|_| g.mean() + &l * standard_normal::<T, R>(rng, g.dim()))
        .collect();
    ParticleSet::uniform(particles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{kf_step, LinearGaussianModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn two_particle_moments() {
        let p = ParticleSet::uniform(vec![scalar(0.0), scalar(2.0)]).unwrap();
        let m = particles_to_gaussian(&p).unwrap();
        assert!((m.density.mean()[0] - 1.0).abs() < 1e-15);
        assert!((m.density.cov()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(!m.degenerate);
    }

    #[test]
    fn repeated_particle_is_flagged() {
        let p = ParticleSet::uniform(vec![scalar(3.0); 5]).unwrap();
        let m = particles_to_gaussian(&p).unwrap();
        assert!(m.degenerate);
        assert!(m.density.cov()[(0, 0)] > 0.0 && m.density.cov()[(0, 0)] < 1e-9);
    }

    #[test]
    fn moments_ignore_particle_order() {
        let xs: Vec<_> = (0..7).map(|i| DVector::from_vec(vec![i as f64, (i * i) as f64])).collect();
        let w: Vec<f64> = (1..=7).map(|i| i as f64 / 28.0).collect();
        let a = particles_to_gaussian(&ParticleSet::new(xs.clone(), w.clone()).unwrap()).unwrap();
        let mut xr = xs;
        let mut wr = w;
        xr.reverse();
        wr.reverse();
        let b = particles_to_gaussian(&ParticleSet::new(xr, wr).unwrap()).unwrap();
        assert!((a.density.mean() - b.density.mean()).norm() < 1e-12);
        assert!((a.density.cov() - b.density.cov()).norm() < 1e-12);
    }

    #[test]
    fn draws_match_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = GaussianDensity::<f64>::scalar(0.0, 1.0).unwrap();
        let p = gaussian_to_particles(&g, 100_000, &mut rng).unwrap();
        assert!(p.weights().iter().all(|&w| w == 1.0 / 100_000.0));
        let m = particles_to_gaussian(&p).unwrap().density;
        assert!(m.mean()[0].abs() < 0.02);
        assert!((m.cov()[(0, 0)] - 1.0).abs() < 0.05);
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let g = GaussianDensity::from_slices(&[1.0, -2.0], &[2.0, 0.3, 0.3, 1.0]).unwrap();
        let a = gaussian_to_particles(&g, 50, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = gaussian_to_particles(&g, 50, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn systematic_resample_follows_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let idx = systematic_resample(&[0.0, 0.25, 0.75], 8, &mut rng);
        assert_eq!(idx.len(), 8);
        assert_eq!(idx.iter().filter(|&&i| i == 0).count(), 0);
        assert_eq!(idx.iter().filter(|&&i| i == 1).count(), 2);
        assert_eq!(idx.iter().filter(|&&i| i == 2).count(), 6);
    }

    fn scalar_model(q: f64, r: f64) -> LinearGaussianModel<f64> {
        let m = |v: f64| DMatrix::from_element(1, 1, v);
        LinearGaussianModel::new(m(1.0), m(1.0), m(q), m(1.0), m(r)).unwrap()
    }

    #[test]
    fn sir_tracks_kalman_mean() {
        let model = scalar_model(1.0, 4.0);
        let n = 20_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut kf = GaussianDensity::scalar(0.0, 9.0).unwrap();
        let mut pf = gaussian_to_particles(&kf, n, &mut rng).unwrap();
        for y in [1.0, 2.5, 2.0] {
            kf = kf_step(&kf, &model, &scalar(y)).unwrap();
            pf = sir_step(&pf, &model, &scalar(y), &mut rng).unwrap();
            assert_eq!(pf.len(), n);
            assert!(pf.weights().iter().all(|&w| w == 1.0 / n as f64));
            let tol = 3.0 * kf.cov()[(0, 0)].sqrt() / (n as f64).sqrt();
            assert!((pf.mean()[0] - kf.mean()[0]).abs() < tol);
        }
    }

    #[test]
    fn sir_is_seed_deterministic_and_pure() {
        let model = scalar_model(1.0, 1.0);
        let prior = ParticleSet::uniform((0..100).map(|i| scalar(i as f64 / 10.0)).collect()).unwrap();
        let snapshot = prior.clone();
        let a = sir_step(&prior, &model, &scalar(4.0), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = sir_step(&prior, &model, &scalar(4.0), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(prior, snapshot);
    }

    #[test]
    fn all_zero_likelihood_is_reported() {
        let prior = ParticleSet::uniform(vec![scalar(0.0), scalar(1.0)]).unwrap();
        let err = reweight_and_resample(&prior, &[f64::NEG_INFINITY; 2], &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(FusionError::DegenerateUpdate(_))));
    }
}
