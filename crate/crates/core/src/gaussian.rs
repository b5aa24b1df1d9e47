//! Gaussian densities, finite Gaussian mixtures and simplex weights.
//!
//! Covariances are symmetrized on ingestion and eigenvalues are floored at
//! `1e-12` times the largest eigenvalue; matrices with an eigenvalue below
//! `-1e-10` times the largest are rejected.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{
    log_det_spd, mahalanobis_sq, min_eigen_with_scale, outer, regularize_covariance,
    relative_asymmetry, reject_ratio, spd_inverse, symmetry_tol,
};
use crate::{lit, to_f64, FusionError, Real, Result};

/// A mean vector paired with a positive-definite covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "GaussianWire<T>",
    into = "GaussianWire<T>",
    bound = "T: Real"
)]
pub struct GaussianDensity<T: Real> {
    mean: DVector<T>,
    cov: DMatrix<T>,
}

impl<T: Real> GaussianDensity<T> {
    pub fn new(mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        if !cov.is_square() {
            return Err(FusionError::NotSquare {
                rows: cov.nrows(),
                cols: cov.ncols(),
            });
        }
        if cov.nrows() != mean.len() {
            return Err(FusionError::DimensionMismatch {
                expected: mean.len(),
                got: cov.nrows(),
            });
        }
        if mean.is_empty() {
            return Err(FusionError::DimensionMismatch { expected: 1, got: 0 });
        }
        if !mean.iter().all(|x| x.is_finite()) {
            return Err(FusionError::NonFinite("mean"));
        }
        let asym = relative_asymmetry(&cov);
        if asym > symmetry_tol::<T>() {
            return Err(FusionError::NotSymmetric(to_f64(asym)));
        }
        let cov = regularize_covariance(&cov)?;
        Ok(Self { mean, cov })
    }

    /// Builds a density from a mean slice and a row-major covariance slice.
    pub fn from_slices(mean: &[T], cov_row_major: &[T]) -> Result<Self> {
        let n = mean.len();
        if cov_row_major.len() != n * n {
            return Err(FusionError::DimensionMismatch {
                expected: n * n,
                got: cov_row_major.len(),
            });
        }
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_row_slice(n, n, cov_row_major),
        )
    }

    pub fn scalar(mean: T, variance: T) -> Result<Self> {
        Self::from_slices(&[mean], &[variance])
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn into_parts(self) -> (DVector<T>, DMatrix<T>) {
        (self.mean, self.cov)
    }

    pub fn log_pdf(&self, x: &DVector<T>) -> Result<T> {
        ensure_dim(self.dim(), x.len())?;
        log_normal_pdf(x, &self.mean, &self.cov)
    }

    pub fn pdf(&self, x: &DVector<T>) -> Result<T> {
        Ok(self.log_pdf(x)?.exp())
    }
}

/// `log N(x; mean, cov)` for an already validated covariance.
pub(crate) fn log_normal_pdf<T: Real>(x: &DVector<T>, mean: &DVector<T>, cov: &DMatrix<T>) -> Result<T> {
    let n: T = lit(mean.len() as f64);
    let d = x - mean;
    let maha = mahalanobis_sq(&d, cov)?;
    let log_det = log_det_spd(cov)?;
    Ok(-(maha + log_det + n * (T::two_pi()).ln()) * lit(0.5))
}

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(FusionError::DimensionMismatch { expected, got })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct GaussianWire<T: Real> {
    mean: Vec<T>,
    cov: Vec<Vec<T>>,
}

fn matrix_from_rows<T: Real>(rows: &[Vec<T>]) -> Result<DMatrix<T>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(FusionError::NotSquare { rows: n, cols: m });
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn matrix_to_rows<T: Real>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl<T: Real> TryFrom<GaussianWire<T>> for GaussianDensity<T> {
    type Error = FusionError;

    fn try_from(w: GaussianWire<T>) -> Result<Self> {
        let cov = matrix_from_rows(&w.cov)?;
        GaussianDensity::new(DVector::from_vec(w.mean), cov)
    }
}

impl<T: Real> From<GaussianDensity<T>> for GaussianWire<T> {
    fn from(g: GaussianDensity<T>) -> Self {
        GaussianWire {
            mean: g.mean.iter().copied().collect(),
            cov: matrix_to_rows(&g.cov),
        }
    }
}

/// Tolerance on the sum of probability weights.
pub(crate) fn weight_sum_tol<T: Real>(n: usize) -> T {
    let base: T = lit(1e-12);
    base.max(T::default_epsilon() * lit(4.0 * n.max(1) as f64))
}

/// A finite Gaussian mixture with strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "MixtureWire<T>",
    into = "MixtureWire<T>",
    bound = "T: Real"
)]
pub struct GaussianMixture<T: Real> {
    components: Vec<(T, GaussianDensity<T>)>,
}

impl<T: Real> GaussianMixture<T> {
    pub fn new(components: Vec<(T, GaussianDensity<T>)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| FusionError::InvalidMixture("no components".into()))?;
        let dim = first.1.dim();
        let mut sum = T::zero();
        for (w, g) in &components {
            if !(*w > T::zero()) || !w.is_finite() {
                return Err(FusionError::InvalidMixture(format!(
                    "component weight {} is not positive",
                    to_f64(*w)
                )));
            }
            ensure_dim(dim, g.dim())?;
            sum += *w;
        }
        if (sum - T::one()).abs() > weight_sum_tol::<T>(components.len()) {
            return Err(FusionError::InvalidMixture(format!(
                "weights sum to {}",
                to_f64(sum)
            )));
        }
        Ok(Self { components })
    }

    /// Builds a mixture from nonnegative weights, dropping zero-weight
    /// components and renormalizing only when the sum is off by more than the
    /// mixture tolerance.
    pub fn from_unnormalized(components: Vec<(T, GaussianDensity<T>)>) -> Result<Self> {
        if components.iter().any(|(w, _)| *w < T::zero() || !w.is_finite()) {
            return Err(FusionError::InvalidMixture("negative weight".into()));
        }
        let kept: Vec<_> = components.into_iter().filter(|(w, _)| *w > T::zero()).collect();
        let sum = kept.iter().fold(T::zero(), |acc, (w, _)| acc + *w);
        if sum <= T::zero() {
            return Err(FusionError::InvalidMixture("all weights are zero".into()));
        }
        if (sum - T::one()).abs() <= weight_sum_tol::<T>(kept.len()) {
            return Self::new(kept);
        }
        Self::new(kept.into_iter().map(|(w, g)| (w / sum, g)).collect())
    }

    pub fn single(g: GaussianDensity<T>) -> Self {
        Self {
            components: vec![(T::one(), g)],
        }
    }

    pub fn components(&self) -> &[(T, GaussianDensity<T>)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].1.dim()
    }

    pub fn weights(&self) -> Vec<T> {
        self.components.iter().map(|(w, _)| *w).collect()
    }

    pub fn pdf(&self, x: &DVector<T>) -> Result<T> {
        let mut acc = T::zero();
        for (w, g) in &self.components {
            acc += *w * g.pdf(x)?;
        }
        Ok(acc)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct ComponentWire<T: Real> {
    w: T,
    mean: Vec<T>,
    cov: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct MixtureWire<T: Real> {
    components: Vec<ComponentWire<T>>,
}

impl<T: Real> TryFrom<MixtureWire<T>> for GaussianMixture<T> {
    type Error = FusionError;

    fn try_from(w: MixtureWire<T>) -> Result<Self> {
        let comps = w
            .components
            .into_iter()
            .map(|c| {
                let g = GaussianDensity::try_from(GaussianWire {
                    mean: c.mean,
                    cov: c.cov,
                })?;
                Ok((c.w, g))
            })
            .collect::<Result<Vec<_>>>()?;
        GaussianMixture::new(comps)
    }
}

impl<T: Real> From<GaussianMixture<T>> for MixtureWire<T> {
    fn from(m: GaussianMixture<T>) -> Self {
        MixtureWire {
            components: m
                .components
                .into_iter()
                .map(|(w, g)| {
                    let wire = GaussianWire::from(g);
                    ComponentWire {
                        w,
                        mean: wire.mean,
                        cov: wire.cov,
                    }
                })
                .collect(),
        }
    }
}

/// Nonnegative fusing weights summing to `total` (one, except for FFCC).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SimplexWeights<T: Real> {
    w: Vec<T>,
    total: T,
}

impl<T: Real> SimplexWeights<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        Self::with_total(w, T::one())
    }

    pub fn with_total(w: Vec<T>, total: T) -> Result<Self> {
        if !(total > T::zero()) || total > T::one() {
            return Err(FusionError::InvalidWeights(format!(
                "total {} outside (0, 1]",
                to_f64(total)
            )));
        }
        if w.is_empty() {
            return Err(FusionError::InvalidWeights("empty weight vector".into()));
        }
        if w.iter().any(|x| !x.is_finite() || *x < T::zero()) {
            return Err(FusionError::InvalidWeights("negative or non-finite entry".into()));
        }
        let sum = w.iter().fold(T::zero(), |acc, x| acc + *x);
        if (sum - total).abs() > weight_sum_tol::<T>(w.len()) {
            return Err(FusionError::InvalidWeights(format!(
                "entries sum to {}, expected {}",
                to_f64(sum),
                to_f64(total)
            )));
        }
        Ok(Self { w, total })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(FusionError::InvalidWeights("empty weight vector".into()));
        }
        let v = T::one() / lit(n as f64);
        Self::new(vec![v; n])
    }

    /// Scales arbitrary nonnegative entries onto the unit simplex.
    pub fn normalized(raw: Vec<T>) -> Result<Self> {
        let sum = raw.iter().fold(T::zero(), |acc, x| acc + *x);
        if !(sum > T::zero()) || !sum.is_finite() {
            return Err(FusionError::InvalidWeights("entries do not have a positive sum".into()));
        }
        Self::new(raw.into_iter().map(|x| x / sum).collect())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.w
    }

    pub fn total(&self) -> T {
        self.total
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

impl<T: Real> std::ops::Index<usize> for SimplexWeights<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.w[i]
    }
}

/// `D_KL(f1 || f2)` between two Gaussians in closed form.
pub fn kl_gaussian<T: Real>(f1: &GaussianDensity<T>, f2: &GaussianDensity<T>) -> Result<T> {
    ensure_dim(f1.dim(), f2.dim())?;
    kl_gaussian_raw(f1.mean(), f1.cov(), f2.mean(), f2.cov())
}

pub(crate) fn kl_gaussian_raw<T: Real>(
    m1: &DVector<T>,
    p1: &DMatrix<T>,
    m2: &DVector<T>,
    p2: &DMatrix<T>,
) -> Result<T> {
    let n: T = lit(m1.len() as f64);
    let p2_inv = spd_inverse(p2)?;
    let trace = (&p2_inv * p1).trace();
    let log_ratio = log_det_spd(p2)? - log_det_spd(p1)?;
    let d = m1 - m2;
    let maha = d.dot(&(&p2_inv * &d));
    let kl = (trace - n + log_ratio + maha) * lit(0.5);
    Ok(kl.max(T::zero()))
}

/// `integral f1(x) f2(x) dx = N(mu1; mu2, P1 + P2)`.
pub fn gaussian_product_integral<T: Real>(
    f1: &GaussianDensity<T>,
    f2: &GaussianDensity<T>,
) -> Result<T> {
    ensure_dim(f1.dim(), f2.dim())?;
    let s = f1.cov() + f2.cov();
    Ok(log_normal_pdf(f1.mean(), f2.mean(), &s)?.exp())
}

/// Differential entropy `0.5 log((2 pi e)^n det P)`.
pub fn differential_entropy<T: Real>(f: &GaussianDensity<T>) -> Result<T> {
    let n: T = lit(f.dim() as f64);
    let two_pi_e = T::two_pi() * T::e();
    Ok((n * two_pi_e.ln() + log_det_spd(f.cov())?) * lit(0.5))
}

/// First two moments of a weighted set of Gaussians:
/// `mean = sum w_i mu_i`, `cov = sum w_i (P_i + (mean - mu_i)(.)')`.
pub(crate) fn merged_moments<'a, T, I>(parts: I, dim: usize) -> (DVector<T>, DMatrix<T>)
where
    T: Real,
    I: Iterator<Item = (T, &'a DVector<T>, &'a DMatrix<T>)> + Clone,
{
    let mut mean = DVector::zeros(dim);
    for (w, m, _) in parts.clone() {
        mean += m * w;
    }
    let mut cov = DMatrix::zeros(dim, dim);
    for (w, m, p) in parts {
        let d = &mean - m;
        cov += (p + outer(&d)) * w;
    }
    (mean, cov)
}

/// The single Gaussian sharing the mixture's first two moments.
pub fn moment_match<T: Real>(mix: &GaussianMixture<T>) -> Result<GaussianDensity<T>> {
    let parts = mix.components.iter().map(|(w, g)| (*w, g.mean(), g.cov()));
    let (mean, cov) = merged_moments(parts, mix.dim());
    GaussianDensity::new(mean, cov)
}

/// Posterior-mean state extraction: `sum w_i mu_i`.
pub fn eap_estimate<T: Real>(mix: &GaussianMixture<T>) -> DVector<T> {
    let mut mean = DVector::zeros(mix.dim());
    for (w, g) in &mix.components {
        mean += g.mean() * *w;
    }
    mean
}

/// Mean of the heaviest component; ties go to the lowest index.
pub fn map_estimate_approx<T: Real>(mix: &GaussianMixture<T>) -> DVector<T> {
    let mut best = 0;
    for (i, (w, _)) in mix.components.iter().enumerate().skip(1) {
        if *w > mix.components[best].0 {
            best = i;
        }
    }
    mix.components[best].1.mean().clone()
}

/// True when `pair.cov - true_mse` is positive semidefinite.
pub fn is_conservative<T: Real>(pair: &GaussianDensity<T>, true_mse: &DMatrix<T>) -> Result<bool> {
    if !true_mse.is_square() {
        return Err(FusionError::NotSquare {
            rows: true_mse.nrows(),
            cols: true_mse.ncols(),
        });
    }
    ensure_dim(pair.dim(), true_mse.nrows())?;
    let diff = pair.cov() - true_mse;
    let (min, _) = min_eigen_with_scale(&diff);
    let scale = pair.cov().norm().max(true_mse.norm());
    Ok(min >= -(reject_ratio::<T>() * scale))
}

/// Orders two square matrices by trace.
pub fn trace_compare<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<Ordering> {
    if !a.is_square() {
        return Err(FusionError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    ensure_dim(a.nrows(), b.nrows())?;
    ensure_dim(a.ncols(), b.ncols())?;
    a.trace()
        .partial_cmp(&b.trace())
        .ok_or(FusionError::NonFinite("trace"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn g(m: f64, v: f64) -> GaussianDensity<f64> {
        GaussianDensity::scalar(m, v).unwrap()
    }

    #[test]
    fn kl_closed_form_values() {
        assert_eq!(kl_gaussian(&g(0.0, 1.0), &g(0.0, 1.0)).unwrap(), 0.0);
        assert_relative_eq!(kl_gaussian(&g(1.0, 1.0), &g(0.0, 1.0)).unwrap(), 0.5, epsilon = 1e-15);
        // 0.5 * (2 - 1 - ln 2)
        let expected = 0.5 * (1.0 - 2f64.ln());
        assert_relative_eq!(kl_gaussian(&g(0.0, 2.0), &g(0.0, 1.0)).unwrap(), expected, epsilon = 1e-15);
        assert_relative_eq!(expected, 0.153426, epsilon = 1e-6);
    }

    #[test]
    fn kl_rejects_dimension_mismatch() {
        let two = GaussianDensity::from_slices(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            kl_gaussian(&g(0.0, 1.0), &two),
            Err(FusionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn product_integral_values() {
        let z = gaussian_product_integral(&g(0.0, 1.0), &g(0.0, 1.0)).unwrap();
        assert_relative_eq!(z, 1.0 / (4.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(z, 0.282095, epsilon = 1e-6);
        let z = gaussian_product_integral(&g(3.0, 2.0), &g(3.0, 5.0)).unwrap();
        assert_relative_eq!(z, 1.0 / (14.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn entropy_values() {
        let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
        assert_relative_eq!(differential_entropy(&g(0.0, 1.0)).unwrap(), 0.5 * two_pi_e.ln(), epsilon = 1e-15);
        assert_relative_eq!(differential_entropy(&g(0.0, 1.0)).unwrap(), 1.418939, epsilon = 1e-6);
        assert!(differential_entropy(&g(0.0, 1.0 / two_pi_e)).unwrap().abs() < 1e-15);
        assert_eq!(
            differential_entropy(&g(-7.0, 3.0)).unwrap(),
            differential_entropy(&g(12.0, 3.0)).unwrap()
        );
    }

    #[test]
    fn moment_match_examples() {
        let single = GaussianMixture::single(g(4.0, 9.0));
        assert_eq!(moment_match(&single).unwrap(), g(4.0, 9.0));

        let mix = GaussianMixture::new(vec![(0.5, g(0.0, 1.0)), (0.5, g(2.0, 1.0))]).unwrap();
        let m = moment_match(&mix).unwrap();
        assert_relative_eq!(m.mean()[0], 1.0);
        assert_relative_eq!(m.cov()[(0, 0)], 2.0);
    }

    #[test]
    fn moment_match_merging_benchmark_first_case() {
        let w = [0.0256, 0.0855, 0.8547, 0.0342];
        let comps = [(40.0, 400.0), (50.0, 200.0), (60.0, 100.0), (100.0, 400.0)];
        let mix = GaussianMixture::from_unnormalized(
            w.iter().zip(comps).map(|(w, (m, v))| (*w, g(m, v))).collect(),
        )
        .unwrap();
        let m = moment_match(&mix).unwrap();
        assert!((m.mean()[0] - 60.0).abs() < 0.01);
        assert!((m.cov()[(0, 0)] - 200.0).abs() < 0.5);
    }

    #[test]
    fn estimates() {
        let mix = GaussianMixture::new(vec![(0.5, g(0.0, 1.0)), (0.5, g(2.0, 1.0))]).unwrap();
        assert_eq!(eap_estimate(&mix)[0], 1.0);
        assert_eq!(map_estimate_approx(&mix)[0], 0.0);

        let mix = GaussianMixture::new(vec![(0.3, g(0.0, 1.0)), (0.7, g(5.0, 1.0))]).unwrap();
        assert_eq!(map_estimate_approx(&mix)[0], 5.0);
        let mix = GaussianMixture::new(vec![(0.9, g(1.0, 1.0)), (0.1, g(5.0, 1.0))]).unwrap();
        assert_eq!(map_estimate_approx(&mix)[0], 1.0);
    }

    #[test]
    fn conservative_and_trace_order() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let two = DMatrix::from_element(1, 1, 2.0);
        assert!(is_conservative(&g(0.0, 2.0), &one).unwrap());
        assert!(!is_conservative(&g(0.0, 1.0), &two).unwrap());
        assert!(is_conservative(&g(0.0, 1.0), &one).unwrap());

        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let b = DMatrix::identity(2, 2);
        assert_eq!(trace_compare(&a, &b).unwrap(), Ordering::Greater);
        assert_eq!(trace_compare(&a, &a).unwrap(), Ordering::Equal);
    }

    #[test]
    fn rejects_bad_covariances() {
        assert!(matches!(
            GaussianDensity::from_slices(&[0.0, 0.0], &[1.0, 0.5, 0.0, 1.0]),
            Err(FusionError::NotSymmetric(_))
        ));
        assert!(matches!(
            GaussianDensity::from_slices(&[0.0, 0.0], &[1.0, 0.0, 0.0, -1.0]),
            Err(FusionError::NotPositiveDefinite(_))
        ));
        assert!(GaussianDensity::from_slices(&[0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn mixture_invariants() {
        assert!(GaussianMixture::new(vec![(0.5, g(0.0, 1.0)), (0.6, g(1.0, 1.0))]).is_err());
        assert!(GaussianMixture::new(vec![(0.0, g(0.0, 1.0)), (1.0, g(1.0, 1.0))]).is_err());
        assert!(SimplexWeights::<f64>::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::<f64>::with_total(vec![0.25, 0.25], 0.5).is_ok());
        assert!(SimplexWeights::<f64>::with_total(vec![0.75, 0.75], 1.5).is_err());
    }

    #[test]
    fn json_round_trip_shape() {
        let d = GaussianDensity::from_slices(&[1.0, 2.0], &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"mean":[1.0,2.0],"cov":[[2.0,0.5],[0.5,1.0]]}"#);
        let back: GaussianDensity<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);

        let mix: GaussianMixture<f64> = serde_json::from_str(
            r#"{"components":[{"w":0.25,"mean":[0.0],"cov":[[1.0]]},{"w":0.75,"mean":[3.0],"cov":[[2.0]]}]}"#,
        )
        .unwrap();
        assert_eq!(mix.len(), 2);
        assert!(serde_json::from_str::<GaussianDensity<f64>>(r#"{"mean":[0.0],"cov":[[-1.0]]}"#).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = GaussianDensity::<f32>::scalar(1.0, 1.0).unwrap();
        let b = GaussianDensity::<f32>::scalar(0.0, 1.0).unwrap();
        assert!((kl_gaussian(&a, &b).unwrap() - 0.5).abs() < 1e-6);
    }
}
