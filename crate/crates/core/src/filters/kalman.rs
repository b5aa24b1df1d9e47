use nalgebra::{DMatrix, DVector};

use super::NonlinearModel;
use crate::gaussian::GaussianDensity;
use crate::linalg::{spd_inverse, symmetrize};
use crate::{FusionError, Real, Result};

/// `x' = F x + G u`, `u ~ N(0, Q_u)`; `y = H x + v`, `v ~ N(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianModel<T: Real> {
    f: DMatrix<T>,
    g: DMatrix<T>,
    q_u: DMatrix<T>,
    h: DMatrix<T>,
    r: DMatrix<T>,
    q: DMatrix<T>,
    q_factor: DMatrix<T>,
}

impl<T: Real> LinearGaussianModel<T> {
    pub fn new(f: DMatrix<T>, g: DMatrix<T>, q_u: DMatrix<T>, h: DMatrix<T>, r: DMatrix<T>) -> Result<Self> {
        let n = f.nrows();
        let mismatch = |expected, got| Err(FusionError::DimensionMismatch { expected, got });
        if f.ncols() != n {
            return Err(FusionError::NotSquare { rows: n, cols: f.ncols() });
        }
        if g.nrows() != n {
            return mismatch(n, g.nrows());
        }
        if q_u.nrows() != g.ncols() || q_u.ncols() != g.ncols() {
            return mismatch(g.ncols(), q_u.nrows());
        }
        if h.ncols() != n {
            return mismatch(n, h.ncols());
        }
        if r.nrows() != h.nrows() || r.ncols() != h.nrows() {
            return mismatch(h.nrows(), r.nrows());
        }
        let q_u_chol = q_u
            .clone()
            .cholesky()
            .ok_or(FusionError::NotPositiveDefinite(f64::NAN))?;
        r.clone().cholesky().ok_or(FusionError::NotPositiveDefinite(f64::NAN))?;
        let q = symmetrize(&(&g * &q_u * g.transpose()));
        let q_factor = &g * q_u_chol.l();
        Ok(Self { f, g, q_u, h, r, q, q_factor })
    }

    pub fn f(&self) -> &DMatrix<T> {
        &self.f
    }

    pub fn g(&self) -> &DMatrix<T> {
        &self.g
    }

    pub fn q_u(&self) -> &DMatrix<T> {
        &self.q_u
    }

    pub fn h(&self) -> &DMatrix<T> {
        &self.h
    }

    pub fn r(&self) -> &DMatrix<T> {
        &self.r
    }

    /// Same dynamics with a different sensor.
    pub fn with_sensor(&self, h: DMatrix<T>, r: DMatrix<T>) -> Result<Self> {
        Self::new(self.f.clone(), self.g.clone(), self.q_u.clone(), h, r)
    }
}

impl<T: Real> NonlinearModel<T> for LinearGaussianModel<T> {
    fn state_dim(&self) -> usize {
        self.f.nrows()
    }

    fn measurement_dim(&self) -> usize {
        self.h.nrows()
    }

    fn transition(&self, x: &DVector<T>) -> DVector<T> {
        &self.f * x
    }

    fn process_cov(&self) -> &DMatrix<T> {
        &self.q
    }

    fn process_factor(&self) -> &DMatrix<T> {
        &self.q_factor
    }

    fn measure(&self, x: &DVector<T>) -> DVector<T> {
        &self.h * x
    }

    fn measurement_cov(&self) -> &DMatrix<T> {
        &self.r
    }
}

pub fn kf_predict<T: Real>(prior: &GaussianDensity<T>, model: &LinearGaussianModel<T>) -> Result<GaussianDensity<T>> {
    let mean = &model.f * prior.mean();
    let cov = &model.f * prior.cov() * model.f.transpose() + &model.q;
    GaussianDensity::new(mean, symmetrize(&cov))
}

/// Measurement update in Joseph form.
pub fn kf_update<T: Real>(
    pred: &GaussianDensity<T>,
    model: &LinearGaussianModel<T>,
    y: &DVector<T>,
) -> Result<GaussianDensity<T>> {
    if y.len() != model.h.nrows() {
        return Err(FusionError::DimensionMismatch {
            expected: model.h.nrows(),
            got: y.len(),
        });
    }
    let p = pred.cov();
    let h = &model.h;
    let s = symmetrize(&(h * p * h.transpose() + &model.r));
    let s_inv = spd_inverse(&s)?;
    let k = p * h.transpose() * s_inv;
    let innovation = y - h * pred.mean();
    let mean = pred.mean() + &k * innovation;
    let n = p.nrows();
    let a = DMatrix::identity(n, n) - &k * h;
    let cov = &a * p * a.transpose() + &k * &model.r * k.transpose();
    GaussianDensity::new(mean, symmetrize(&cov))
}

pub fn kf_step<T: Real>(
    prior: &GaussianDensity<T>,
    model: &LinearGaussianModel<T>,
    y: &DVector<T>,
) -> Result<GaussianDensity<T>> {
    kf_update(&kf_predict(prior, model)?, model, y)
}
