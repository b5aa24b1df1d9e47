//! Fusing-weight design for arithmetic-average fusion.
//!
//! The production objectives replace the mixture by its moment-matched Gaussian
//! (`x_AA`, `P_AA`) so every evaluation is closed form:
//!
//! - [`optimal_weights_gaussian`] fits the merged Gaussian to a known target.
//! - [`suboptimal_weights_diversity`] maximizes the weighted divergence of each
//!   source from the merged Gaussian (diversity preference).
//! - [`bound_weights`] minimizes the Jensen lower-bound surrogate built from
//!   pairwise product integrals.
//!
//! The exact mixture objective is only available through quadrature, see
//! [`equal_divergence_check`] and [`exact_diversity_weights`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gaussian::{
    ensure_dim, gaussian_product_integral, kl_gaussian_raw, merged_moments, GaussianDensity,
    GaussianMixture, SimplexWeights,
};
use crate::linalg::{log_det_spd, spd_inverse};
use crate::quadrature::{kl_mixture_quadrature, QuadratureSpec};
use crate::simplex::{SearchOutcome, SimplexSearch};
use crate::{lit, to_f64, FusionError, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    OptKl,
    SuboptDiversity,
    Bound,
    /// Quadrature-evaluated diversity objective on the unmerged mixture.
    ExactDiversity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WeightSolution<T: Real> {
    pub w: SimplexWeights<T>,
    pub objective_value: T,
    pub objective_kind: ObjectiveKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solver_trace: Option<Vec<(Vec<T>, T)>>,
}

fn check_sources<T: Real>(sources: &[GaussianDensity<T>], needed: usize) -> Result<usize> {
    if sources.len() < needed {
        return Err(FusionError::TooFewSources {
            needed,
            got: sources.len(),
        });
    }
    let dim = sources[0].dim();
    for s in sources {
        ensure_dim(dim, s.dim())?;
    }
    Ok(dim)
}

fn merged<T: Real>(sources: &[GaussianDensity<T>], w: &[T]) -> (DVector<T>, DMatrix<T>) {
    let parts = sources.iter().zip(w).map(|(s, wi)| (*wi, s.mean(), s.cov()));
    merged_moments(parts, sources[0].dim())
}

fn cast<T: Real>(w: &[f64]) -> Vec<T> {
    w.iter().map(|x| lit::<T>(*x)).collect()
}

fn finish<T: Real>(out: SearchOutcome, kind: ObjectiveKind) -> Result<WeightSolution<T>> {
    if !out.value.is_finite() {
        return Err(FusionError::Solver("objective is not finite".into()));
    }
    Ok(WeightSolution {
        w: SimplexWeights::normalized(cast(&out.w))?,
        objective_value: lit(out.value),
        objective_kind: kind,
        solver_trace: Some(
            out.trace
                .into_iter()
                .map(|(w, v)| (cast(&w), lit(v)))
                .collect(),
        ),
    })
}

/// `tr(P^-1 P_AA) + log(det P / det P_AA) + ||x_AA - mu||^2_P`.
pub fn opt_kl_objective<T: Real>(
    sources: &[GaussianDensity<T>],
    target: &GaussianDensity<T>,
    w: &[T],
) -> Result<T> {
    let (mean, cov) = merged(sources, w);
    let p_inv = spd_inverse(target.cov())?;
    let d = &mean - target.mean();
    let log_ratio = log_det_spd(target.cov())? - log_det_spd(&cov)?;
    Ok((&p_inv * &cov).trace() + log_ratio + d.dot(&(&p_inv * &d)))
}

/// `sum_i w_i [tr(P_AA^-1 P_i) + log(det P_AA / det P_i) + ||x_i - x_AA||^2_{P_AA}]`.
pub fn diversity_objective<T: Real>(sources: &[GaussianDensity<T>], w: &[T]) -> Result<T> {
    let (mean, cov) = merged(sources, w);
    let inv = spd_inverse(&cov)?;
    let log_det_aa = log_det_spd(&cov)?;
    let mut acc = T::zero();
    for (s, wi) in sources.iter().zip(w) {
        let d = s.mean() - &mean;
        let term = (&inv * s.cov()).trace() + log_det_aa - log_det_spd(s.cov())? + d.dot(&(&inv * &d));
        acc += *wi * term;
    }
    Ok(acc)
}

struct BoundTerms<T: Real> {
    half_log_det: Vec<T>,
    z: DMatrix<T>,
}

impl<T: Real> BoundTerms<T> {
    fn new(sources: &[GaussianDensity<T>]) -> Result<Self> {
        let n = sources.len();
        let mut z = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = gaussian_product_integral(&sources[i], &sources[j])?;
                z[(i, j)] = v;
                z[(j, i)] = v;
            }
        }
        let half_log_det = sources
            .iter()
            .map(|s| Ok(log_det_spd(s.cov())? * lit(0.5)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { half_log_det, z })
    }

    fn eval(&self, w: &[T]) -> Option<T> {
        let mut acc = T::zero();
        for (i, wi) in w.iter().enumerate() {
            let mut mix = T::zero();
            for (j, wj) in w.iter().enumerate() {
                mix += *wj * self.z[(i, j)];
            }
            if mix <= T::zero() {
                return None;
            }
            acc += *wi * (self.half_log_det[i] + mix.ln());
        }
        Some(acc)
    }
}

/// `sum_i w_i log(|P_i|^(1/2) sum_j w_j z_ij)` with `z_ij = N(mu_i; mu_j, P_i + P_j)`.
pub fn bound_objective<T: Real>(sources: &[GaussianDensity<T>], w: &[T]) -> Result<T> {
    BoundTerms::new(sources)?
        .eval(w)
        .ok_or_else(|| FusionError::Solver("bound objective undefined".into()))
}

/// Weights whose merged Gaussian best fits `target` in KL divergence.
pub fn optimal_weights_gaussian<T: Real>(
    sources: &[GaussianDensity<T>],
    target: &GaussianDensity<T>,
) -> Result<WeightSolution<T>> {
    let dim = check_sources(sources, 1)?;
    ensure_dim(dim, target.dim())?;
    spd_inverse(target.cov())?;
    let n = sources.len();
    let out = SimplexSearch::for_sources(n)
        .minimize(n, |w| {
            opt_kl_objective(sources, target, &cast::<T>(w)).ok().map(to_f64)
        })
        .ok_or_else(|| FusionError::Solver("no feasible weights".into()))?;
    finish(out, ObjectiveKind::OptKl)
}

/// Diversity-preference weights maximizing the merged-Gaussian divergence objective.
pub fn suboptimal_weights_diversity<T: Real>(sources: &[GaussianDensity<T>]) -> Result<WeightSolution<T>> {
    check_sources(sources, 2)?;
    let n = sources.len();
    let out = SimplexSearch::for_sources(n)
        .maximize(n, |w| diversity_objective(sources, &cast::<T>(w)).ok().map(to_f64))
        .ok_or_else(|| FusionError::Solver("no feasible weights".into()))?;
    finish(out, ObjectiveKind::SuboptDiversity)
}

/// Weights minimizing the Jensen lower-bound surrogate.
pub fn bound_weights<T: Real>(sources: &[GaussianDensity<T>]) -> Result<WeightSolution<T>> {
    check_sources(sources, 2)?;
    let n = sources.len();
    let terms = BoundTerms::new(sources)?;
    let out = SimplexSearch::for_sources(n)
        .minimize(n, |w| terms.eval(&cast::<T>(w)).map(to_f64))
        .ok_or_else(|| FusionError::Solver("no feasible weights".into()))?;
    finish(out, ObjectiveKind::Bound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EqualDivergenceReport<T: Real> {
    /// `D_KL(f_i || f_AA(w))` against the unmerged mixture, per source.
    pub divergences: Vec<T>,
    /// `max - min` of the divergences.
    pub spread: T,
}

fn aa_mixture<T: Real>(sources: &[GaussianDensity<T>], w: &[T]) -> Result<GaussianMixture<T>> {
    GaussianMixture::from_unnormalized(sources.iter().cloned().zip(w.iter().copied()).map(|(g, w)| (w, g)).collect())
}

fn divergences_to_mixture<T: Real>(
    sources: &[GaussianDensity<T>],
    w: &[T],
    spec: &QuadratureSpec,
) -> Result<Vec<T>> {
    let mix = aa_mixture(sources, w)?;
    sources
        .iter()
        .map(|s| kl_mixture_quadrature(&GaussianMixture::single(s.clone()), &mix, spec))
        .collect()
}

/// Spread of the per-source divergences from the AA mixture at `w`.
pub fn equal_divergence_check<T: Real>(
    sources: &[GaussianDensity<T>],
    w: &SimplexWeights<T>,
    spec: &QuadratureSpec,
) -> Result<EqualDivergenceReport<T>> {
    check_sources(sources, 1)?;
    if w.len() != sources.len() {
        return Err(FusionError::InvalidWeights(format!(
            "{} weights for {} sources",
            w.len(),
            sources.len()
        )));
    }
    let divergences = divergences_to_mixture(sources, w.as_slice(), spec)?;
    let hi = divergences.iter().copied().fold(T::min_value().unwrap_or(-T::max_value().unwrap()), |a, b| a.max(b));
    let lo = divergences.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    Ok(EqualDivergenceReport {
        divergences,
        spread: hi - lo,
    })
}

/// `sum_i w_i D_KL(f_i || f_AA(w))` on the unmerged mixture, by quadrature.
pub fn exact_diversity_objective<T: Real>(
    sources: &[GaussianDensity<T>],
    w: &[T],
    spec: &QuadratureSpec,
) -> Result<T> {
    let d = divergences_to_mixture(sources, w, spec)?;
    Ok(d.iter().zip(w).fold(T::zero(), |acc, (d, w)| acc + *d * *w))
}

/// Max-min weights of the exact (quadrature) diversity objective.
///
/// The objective is concave in `w`; two sources are solved by golden-section
/// search to `1e-9` in the first weight, more sources by [`SimplexSearch`].
pub fn exact_diversity_weights<T: Real>(
    sources: &[GaussianDensity<T>],
    spec: &QuadratureSpec,
) -> Result<WeightSolution<T>> {
    check_sources(sources, 2)?;
    let n = sources.len();
    let eval = |w: &[f64]| exact_diversity_objective(sources, &cast::<T>(w), spec).ok().map(to_f64);
    if n == 2 {
        let f = |a: f64| eval(&[a, 1.0 - a]).unwrap_or(f64::NEG_INFINITY);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        while hi - lo > 1e-9 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = f(x1);
            }
        }
        let a = 0.5 * (lo + hi);
        let v = f(a);
        return finish(
            SearchOutcome {
                w: vec![a, 1.0 - a],
                value: v,
                trace: vec![(vec![a, 1.0 - a], v)],
                evaluations: 0,
            },
            ObjectiveKind::ExactDiversity,
        );
    }
    let out = SimplexSearch::for_sources(n)
        .with_resolution(20)
        .maximize(n, eval)
        .ok_or_else(|| FusionError::Solver("no feasible weights".into()))?;
    finish(out, ObjectiveKind::ExactDiversity)
}

/// Closed-form `D_KL(f_i || N(x_AA, P_AA))` for each source.
pub fn divergences_to_merged<T: Real>(sources: &[GaussianDensity<T>], w: &SimplexWeights<T>) -> Result<Vec<T>> {
    check_sources(sources, 1)?;
    let (mean, cov) = merged(sources, w.as_slice());
    sources
        .iter()
        .map(|s| kl_gaussian_raw(s.mean(), s.cov(), &mean, &cov))
        .collect()
}

/// The four-component merging benchmark: the sources `N(40,400)`, `N(50,200)`,
/// `N(60,100)`, `N(100,400)` and the targets `N(60,200)`, `N(70,100)`,
/// `N(85,150)`, `N(110,300)`.
pub fn merging_benchmark() -> (Vec<GaussianDensity<f64>>, Vec<GaussianDensity<f64>>) {
    let g = |m: f64, v: f64| GaussianDensity::scalar(m, v).expect("valid scalar density");
    (
        vec![g(40.0, 400.0), g(50.0, 200.0), g(60.0, 100.0), g(100.0, 400.0)],
        vec![g(60.0, 200.0), g(70.0, 100.0), g(85.0, 150.0), g(110.0, 300.0)],
    )
}
