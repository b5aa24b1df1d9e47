use nalgebra::{DMatrix, DVector};

use super::{wrap_components, NonlinearModel};
use crate::gaussian::GaussianDensity;
use crate::linalg::{spd_inverse, sqrt_spd, symmetrize};
use crate::{lit, FusionError, Real, Result};

/// Third-degree spherical-radial cubature points `x +- sqrt(n) S e_i`.
fn cubature_points<T: Real>(g: &GaussianDensity<T>) -> Result<Vec<DVector<T>>> {
    let n = g.dim();
    let s = sqrt_spd(g.cov())? * lit::<T>(n as f64).sqrt();
    let mut pts = Vec::with_capacity(2 * n);
    for i in 0..n {
        let col = s.column(i);
        pts.push(g.mean() + col);
        pts.push(g.mean() - col);
    }
    Ok(pts)
}

fn mean_of<T: Real>(pts: &[DVector<T>]) -> DVector<T> {
    let scale = lit::<T>(1.0 / pts.len() as f64);
    let mut acc = DVector::zeros(pts[0].len());
    for p in pts {
        acc += p;
    }
    acc * scale
}

fn cross_cov<T: Real>(a: &[DVector<T>], b: &[DVector<T>]) -> DMatrix<T> {
    let scale = lit::<T>(1.0 / a.len() as f64);
    let mut acc = DMatrix::zeros(a[0].len(), b[0].len());
    for (x, y) in a.iter().zip(b) {
        acc += x * y.transpose();
    }
    acc * scale
}

pub fn ckf_predict<T: Real, M: NonlinearModel<T> + ?Sized>(
    prior: &GaussianDensity<T>,
    model: &M,
) -> Result<GaussianDensity<T>> {
    let pts: Vec<_> = cubature_points(prior)?.iter().map(|x| model.transition(x)).collect();
    let mean = mean_of(&pts);
    let dev: Vec<_> = pts.iter().map(|p| p - &mean).collect();
    let cov = cross_cov(&dev, &dev) + model.process_cov();
    GaussianDensity::new(mean, symmetrize(&cov))
}

/// Cubature measurement update. Angle components of the innovation and of
/// the predicted-measurement spread are wrapped to `(-pi, pi]`.
pub fn ckf_update<T: Real, M: NonlinearModel<T> + ?Sized>(
    pred: &GaussianDensity<T>,
    model: &M,
    y: &DVector<T>,
) -> Result<GaussianDensity<T>> {
    if y.len() != model.measurement_dim() {
        return Err(FusionError::DimensionMismatch {
            expected: model.measurement_dim(),
            got: y.len(),
        });
    }
    let angles = model.angle_components();
    let xs = cubature_points(pred)?;
    let zs: Vec<_> = xs.iter().map(|x| model.measure(x)).collect();
    // average angles as offsets from a reference so the mean does not jump
    // across the branch cut
    let reference = model.measure(pred.mean());
    let offsets: Vec<_> = zs
        .iter()
        .map(|z| wrap_components(z - &reference, angles))
        .collect();
    let z_mean = &reference + mean_of(&offsets);
    let dz: Vec<_> = zs
        .iter()
        .map(|z| wrap_components(z - &z_mean, angles))
        .collect();
    let dx: Vec<_> = xs.iter().map(|x| x - pred.mean()).collect();
    let pzz = symmetrize(&(cross_cov(&dz, &dz) + model.measurement_cov()));
    let pxz = cross_cov(&dx, &dz);
    let k = &pxz * spd_inverse(&pzz)?;
    let innovation = wrap_components(y - &z_mean, angles);
    let mean = pred.mean() + &k * innovation;
    let cov = pred.cov() - &k * &pzz * k.transpose();
    GaussianDensity::new(mean, symmetrize(&cov))
}

pub fn ckf_step<T: Real, M: NonlinearModel<T> + ?Sized>(
    prior: &GaussianDensity<T>,
    model: &M,
    y: &DVector<T>,
) -> Result<GaussianDensity<T>> {
    ckf_update(&ckf_predict(prior, model)?, model, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{kf_step, LinearGaussianModel};

    fn cv_model() -> LinearGaussianModel<f64> {
        let dt = 1.0;
        let f = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, dt, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, dt, 0.0, 0.0, 0.0, 1.0],
        );
        let g = DMatrix::from_row_slice(4, 2, &[0.5, 0.0, 1.0, 0.0, 0.0, 0.5, 0.0, 1.0]);
        let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        LinearGaussianModel::new(
            f,
            g,
            DMatrix::identity(2, 2) * 25.0,
            h,
            DMatrix::identity(2, 2) * 400.0,
        )
        .unwrap()
    }

    #[test]
    fn reduces_to_kalman_on_linear_model() {
        let model = cv_model();
        let mut kf = GaussianDensity::from_slices(
            &[1000.0, 20.0, 1000.0, 0.0],
            &[
                500.0, 0.0, 0.0, 0.0, 0.0, 50.0, 0.0, 0.0, 0.0, 0.0, 500.0, 0.0, 0.0, 0.0, 0.0, 50.0,
            ],
        )
        .unwrap();
        let mut ckf = kf.clone();
        for k in 0..100 {
            let t = k as f64;
            let y = DVector::from_vec(vec![1000.0 + 20.0 * t + (t * 0.7).sin() * 15.0, (t * 1.3).cos() * 25.0]);
            kf = kf_step(&kf, &model, &y).unwrap();
            ckf = ckf_step(&ckf, &model, &y).unwrap();
            let dm = (kf.mean() - ckf.mean()).norm() / kf.mean().norm();
            let dp = (kf.cov() - ckf.cov()).norm() / kf.cov().norm();
            assert!(dm < 1e-8 && dp < 1e-8, "step {k}: {dm} {dp}");
        }
    }

    struct Bearing {
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    }

    impl NonlinearModel<f64> for Bearing {
        fn state_dim(&self) -> usize {
            2
        }
        fn measurement_dim(&self) -> usize {
            1
        }
        fn transition(&self, x: &DVector<f64>) -> DVector<f64> {
            x.clone()
        }
        fn process_cov(&self) -> &DMatrix<f64> {
            &self.q
        }
        fn process_factor(&self) -> &DMatrix<f64> {
            &self.q
        }
        fn measure(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_element(1, x[1].atan2(x[0]))
        }
        fn measurement_cov(&self) -> &DMatrix<f64> {
            &self.r
        }
        fn angle_components(&self) -> &[usize] {
            &[0]
        }
    }

    #[test]
    fn identity_dynamics_keep_the_mean() {
        let model = Bearing {
            q: DMatrix::identity(2, 2) * 0.1,
            r: DMatrix::from_element(1, 1, 1e-4),
        };
        let prior = GaussianDensity::from_slices(&[3.0, -7.0], &[4.0, 1.5, 1.5, 2.0]).unwrap();
        let pred = ckf_predict(&prior, &model).unwrap();
        assert!((pred.mean() - prior.mean()).norm() < 1e-12);
        assert!((pred.cov() - (prior.cov() + &model.q)).norm() < 1e-12);
    }

    #[test]
    fn innovation_wraps_across_branch_cut() {
        let model = Bearing {
            q: DMatrix::identity(2, 2) * 1e-6,
            r: DMatrix::from_element(1, 1, 1e-4),
        };
        // target just below the negative x axis, measured just above it
        let prior = GaussianDensity::from_slices(&[-100.0, -0.5], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let y = DVector::from_element(1, std::f64::consts::PI - 0.001);
        let post = ckf_update(&prior, &model, &y).unwrap();
        // small correction, not a jump of 2 pi worth of gain
        assert!((post.mean() - prior.mean()).norm() < 1.0);
        assert!(post.mean()[1] > -0.5);
    }
}
