//! Grid quadrature for divergences between Gaussian mixtures.
//!
//! There is no closed form for the KL divergence between mixtures, so this
//! module provides a deterministic numeric reference: the trapezoidal rule on
//! a uniform grid (1-D) or a tensor grid (2-D). The grid spans the union of
//! all component means of both arguments, padded by `span_sigmas` standard
//! deviations of the widest component along each axis. Evaluation is carried
//! out in `f64` regardless of the scalar type of the inputs.

use crate::gaussian::{GaussianDensity, GaussianMixture};
use crate::{lit, to_f64, FusionError, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Grid points in one dimension.
    pub points_1d: usize,
    /// Grid points per axis in two dimensions.
    pub points_2d: usize,
    /// Padding around the outermost means, in standard deviations of the widest component.
    pub span_sigmas: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            points_1d: 20001,
            points_2d: 501,
            span_sigmas: 8.0,
        }
    }
}

/// Log-density evaluator for one component, precomputed in f64.
#[derive(Debug, Clone)]
struct Component {
    log_w: f64,
    mean: [f64; 2],
    // inverse covariance, row major (only [0] used in 1-D)
    inv: [f64; 4],
    log_norm: f64,
}

impl Component {
    fn new<T: Real>(w: T, g: &GaussianDensity<T>) -> Self {
        let dim = g.dim();
        let m = g.mean();
        let p = g.cov();
        if dim == 1 {
            let v = to_f64(p[(0, 0)]);
            Self {
                log_w: to_f64(w).ln(),
                mean: [to_f64(m[0]), 0.0],
                inv: [1.0 / v, 0.0, 0.0, 0.0],
                log_norm: -0.5 * (2.0 * std::f64::consts::PI * v).ln(),
            }
        } else {
            let (a, b, c, d) = (
                to_f64(p[(0, 0)]),
                to_f64(p[(0, 1)]),
                to_f64(p[(1, 0)]),
                to_f64(p[(1, 1)]),
            );
            let det = a * d - b * c;
            Self {
                log_w: to_f64(w).ln(),
                mean: [to_f64(m[0]), to_f64(m[1])],
                inv: [d / det, -b / det, -c / det, a / det],
                log_norm: -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln(),
            }
        }
    }

    fn log_pdf_1d(&self, x: f64) -> f64 {
        let d = x - self.mean[0];
        self.log_w + self.log_norm - 0.5 * d * d * self.inv[0]
    }

    fn log_pdf_2d(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.mean[0];
        let dy = y - self.mean[1];
        let q = dx * (self.inv[0] * dx + self.inv[1] * dy) + dy * (self.inv[2] * dx + self.inv[3] * dy);
        self.log_w + self.log_norm - 0.5 * q
    }
}

struct LogMixture {
    comps: Vec<Component>,
}

impl LogMixture {
    fn new<T: Real>(mix: &GaussianMixture<T>) -> Self {
        Self {
            comps: mix.components().iter().map(|(w, g)| Component::new(*w, g)).collect(),
        }
    }

    fn eval(&self, f: impl Fn(&Component) -> f64) -> f64 {
        let terms: Vec<f64> = self.comps.iter().map(f).collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    fn log_pdf_1d(&self, x: f64) -> f64 {
        self.eval(|c| c.log_pdf_1d(x))
    }

    fn log_pdf_2d(&self, x: f64, y: f64) -> f64 {
        self.eval(|c| c.log_pdf_2d(x, y))
    }
}

fn axis_range<T: Real>(mixes: &[&GaussianMixture<T>], axis: usize, span: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut widest: f64 = 0.0;
    for mix in mixes {
        for (_, g) in mix.components() {
            let m = to_f64(g.mean()[axis]);
            lo = lo.min(m);
            hi = hi.max(m);
            widest = widest.max(to_f64(g.cov()[(axis, axis)]).sqrt());
        }
    }
    (lo - span * widest, hi + span * widest)
}

fn trapezoid_weights(n: usize) -> impl Fn(usize) -> f64 {
    move |i| if i == 0 || i + 1 == n { 0.5 } else { 1.0 }
}

/// Integrates `integrand(log f(x), log g(x))` over the grid spanned by `f` and `g`.
fn integrate_pair<T: Real>(
    f: &GaussianMixture<T>,
    g: &GaussianMixture<T>,
    spec: &QuadratureSpec,
    integrand: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    if f.dim() != g.dim() {
        return Err(FusionError::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    let lf = LogMixture::new(f);
    let lg = LogMixture::new(g);
    match f.dim() {
        1 => {
            let n = spec.points_1d.max(3);
            let (lo, hi) = axis_range(&[f, g], 0, spec.span_sigmas);
            let h = (hi - lo) / (n - 1) as f64;
            let tw = trapezoid_weights(n);
            let mut acc = 0.0;
            for i in 0..n {
                let x = lo + h * i as f64;
                acc += tw(i) * integrand(lf.log_pdf_1d(x), lg.log_pdf_1d(x));
            }
            Ok(acc * h)
        }
        2 => {
            let n = spec.points_2d.max(3);
            let (x0, x1) = axis_range(&[f, g], 0, spec.span_sigmas);
            let (y0, y1) = axis_range(&[f, g], 1, spec.span_sigmas);
            let hx = (x1 - x0) / (n - 1) as f64;
            let hy = (y1 - y0) / (n - 1) as f64;
            let tw = trapezoid_weights(n);
            let mut acc = 0.0;
            for i in 0..n {
                let x = x0 + hx * i as f64;
                let mut row = 0.0;
                for j in 0..n {
                    let y = y0 + hy * j as f64;
                    row += tw(j) * integrand(lf.log_pdf_2d(x, y), lg.log_pdf_2d(x, y));
                }
                acc += tw(i) * row;
            }
            Ok(acc * hx * hy)
        }
        d => Err(FusionError::UnsupportedDimension(d)),
    }
}

/// Numeric `D_KL(f || g)` between two mixtures of dimension 1 or 2.
pub fn kl_mixture_quadrature<T: Real>(
    f: &GaussianMixture<T>,
    g: &GaussianMixture<T>,
    spec: &QuadratureSpec,
) -> Result<T> {
    let kl = integrate_pair(f, g, spec, |lf, lg| {
        if lf == f64::NEG_INFINITY {
            0.0
        } else {
            lf.exp() * (lf - lg)
        }
    })?;
    Ok(lit(kl))
}

/// Numeric cross-entropy `H(f, g) = -integral f log g`.
pub fn cross_entropy_quadrature<T: Real>(
    f: &GaussianMixture<T>,
    g: &GaussianMixture<T>,
    spec: &QuadratureSpec,
) -> Result<T> {
    let h = integrate_pair(f, g, spec, |lf, lg| {
        if lf == f64::NEG_INFINITY {
            0.0
        } else {
            -lf.exp() * lg
        }
    })?;
    Ok(lit(h))
}

/// Numeric total mass of `f` on the grid it would use against itself.
pub fn mass_quadrature<T: Real>(f: &GaussianMixture<T>, spec: &QuadratureSpec) -> Result<T> {
    Ok(lit(integrate_pair(f, f, spec, |lf, _| lf.exp())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::kl_gaussian;

    fn g(m: f64, v: f64) -> GaussianDensity<f64> {
        GaussianDensity::scalar(m, v).unwrap()
    }

    #[test]
    fn identical_mixtures_have_zero_divergence() {
        let mix = GaussianMixture::new(vec![(0.3, g(-2.0, 1.5)), (0.7, g(4.0, 0.5))]).unwrap();
        let kl = kl_mixture_quadrature(&mix, &mix, &QuadratureSpec::default()).unwrap();
        assert!(kl.abs() < 1e-8);
    }

    #[test]
    fn matches_closed_form_for_single_components() {
        let spec = QuadratureSpec::default();
        for (a, b) in [(g(0.0, 1.0), g(1.0, 2.0)), (g(3.0, 0.2), g(-1.0, 5.0)), (g(0.0, 2.0), g(0.0, 1.0))] {
            let exact = kl_gaussian(&a, &b).unwrap();
            let num = kl_mixture_quadrature(
                &GaussianMixture::single(a),
                &GaussianMixture::single(b),
                &spec,
            )
            .unwrap();
            assert!((exact - num).abs() < 1e-6, "{exact} vs {num}");
        }
    }

    #[test]
    fn two_dimensional_matches_closed_form() {
        let a = GaussianDensity::from_slices(&[0.0, 1.0], &[2.0, 0.3, 0.3, 1.0]).unwrap();
        let b = GaussianDensity::from_slices(&[0.5, -0.5], &[1.0, -0.2, -0.2, 1.5]).unwrap();
        let exact: f64 = kl_gaussian(&a, &b).unwrap();
        let num: f64 = kl_mixture_quadrature(
            &GaussianMixture::single(a.clone()),
            &GaussianMixture::single(b),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((exact - num).abs() < 1e-6, "{exact} vs {num}");
        let mass: f64 = mass_quadrature(&GaussianMixture::single(a), &QuadratureSpec::default()).unwrap();
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_three_dimensions() {
        let a = GaussianDensity::from_slices(&[0.0; 3], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let m = GaussianMixture::single(a);
        assert_eq!(
            kl_mixture_quadrature(&m, &m, &QuadratureSpec::default()),
            Err(FusionError::UnsupportedDimension(3))
        );
    }
}
