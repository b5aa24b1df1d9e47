//! Pairwise and multi-source fusion rules for Gaussian estimate pairs.
//!
//! Incomparable covariances are ordered by trace throughout (see
//! [`trace_compare`]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gaussian::{
    ensure_dim, merged_moments, trace_compare, GaussianDensity, GaussianMixture, SimplexWeights,
};
use crate::linalg::{outer, spd_inverse};
use crate::simplex::SimplexSearch;
use crate::{lit, to_f64, FusionError, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Naive,
    Ga,
    Ci,
    Ffcc,
    CuMax,
    CuMin,
    AaMerged,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Naive => "naive",
            Rule::Ga => "ga",
            Rule::Ci => "ci",
            Rule::Ffcc => "ffcc",
            Rule::CuMax => "cu_max",
            Rule::CuMin => "cu_min",
            Rule::AaMerged => "aa_merged",
        }
    }
}

/// Which of the two covariance-union bounds to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CuBound {
    /// Largest adjusted covariance; conservative if any source is.
    Max,
    /// Smallest adjusted covariance; conservative if all sources are.
    Min,
}

/// A fused estimate together with the rule and weights that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FusedPair<T: Real> {
    pub estimate: GaussianDensity<T>,
    pub rule: Rule,
    pub weights_used: SimplexWeights<T>,
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

fn check_weights<T: Real>(sources: usize, w: &SimplexWeights<T>) -> Result<()> {
    if w.len() != sources {
        return Err(FusionError::InvalidWeights(format!(
            "{} weights for {} sources",
            w.len(),
            sources
        )));
    }
    Ok(())
}

fn check_unit_total<T: Real>(w: &SimplexWeights<T>) -> Result<()> {
    if w.total() != T::one() {
        return Err(FusionError::InvalidWeights(format!(
            "weights must sum to 1, total is {}",
            to_f64(w.total())
        )));
    }
    Ok(())
}

/// Weighted information-form combination; weights need not sum to one.
fn precision_combination<T: Real>(
    sources: &[GaussianDensity<T>],
    w: &[T],
) -> Result<(DVector<T>, DMatrix<T>)> {
    let dim = sources[0].dim();
    let mut info = DMatrix::zeros(dim, dim);
    let mut info_mean = DVector::zeros(dim);
    for (s, wi) in sources.iter().zip(w) {
        let inv = spd_inverse(s.cov())?;
        info_mean += &inv * s.mean() * *wi;
        info += inv * *wi;
    }
    let cov = spd_inverse(&info)?;
    let mean = &cov * info_mean;
    Ok((mean, cov))
}

/// Product of the source densities: `P = (sum P_i^-1)^-1`, precision-weighted mean.
///
/// `weights_used` is reported as uniform; the product itself carries unit
/// exponents on every source.
pub fn naive_fuse<T: Real>(sources: &[GaussianDensity<T>]) -> Result<FusedPair<T>> {
    check_sources(sources, 2)?;
    let ones = vec![T::one(); sources.len()];
    let (mean, cov) = precision_combination(sources, &ones)?;
    Ok(FusedPair {
        estimate: GaussianDensity::new(mean, cov)?,
        rule: Rule::Naive,
        weights_used: SimplexWeights::uniform(sources.len())?,
    })
}

/// Normalized geometric average of Gaussians.
pub fn ga_fuse<T: Real>(sources: &[GaussianDensity<T>], w: &SimplexWeights<T>) -> Result<FusedPair<T>> {
    check_sources(sources, 1)?;
    check_weights(sources.len(), w)?;
    check_unit_total(w)?;
    let (mean, cov) = precision_combination(sources, w.as_slice())?;
    Ok(FusedPair {
        estimate: GaussianDensity::new(mean, cov)?,
        rule: Rule::Ga,
        weights_used: w.clone(),
    })
}

/// Trace of `(sum w_i P_i^-1)^-1`, or `None` when the precision sum is not PD.
fn ga_trace<T: Real>(precisions: &[DMatrix<T>], w: &[f64]) -> Option<f64> {
    let dim = precisions[0].nrows();
    let mut info = DMatrix::<T>::zeros(dim, dim);
    for (p, wi) in precisions.iter().zip(w) {
        info += p * lit::<T>(*wi);
    }
    let chol = info.cholesky()?;
    Some(to_f64(chol.inverse().trace()))
}

/// Covariance intersection: GA fusion at the trace-minimizing weights on the closed simplex.
///
/// Two sources are searched on a `1e-3` lattice; more sources use the default
/// resolutions of [`SimplexSearch::for_sources`].
pub fn ci_fuse<T: Real>(sources: &[GaussianDensity<T>]) -> Result<FusedPair<T>> {
    check_sources(sources, 2)?;
    let precisions = sources
        .iter()
        .map(|s| spd_inverse(s.cov()))
        .collect::<Result<Vec<_>>>()?;
    let n = sources.len();
    let mut search = SimplexSearch::for_sources(n);
    if n == 2 {
        search = search.with_resolution(1000);
    }
    let out = search
        .minimize(n, |w| ga_trace(&precisions, w))
        .ok_or_else(|| FusionError::Solver("no feasible CI weight".into()))?;
    let w = SimplexWeights::normalized(out.w.iter().map(|x| lit::<T>(*x)).collect())?;
    let (mean, cov) = precision_combination(sources, w.as_slice())?;
    Ok(FusedPair {
        estimate: GaussianDensity::new(mean, cov)?,
        rule: Rule::Ci,
        weights_used: w,
    })
}

/// GA combination with weights summing to `delta <= 1`.
pub fn ffcc_fuse<T: Real>(sources: &[GaussianDensity<T>], w: &SimplexWeights<T>) -> Result<FusedPair<T>> {
    check_sources(sources, 1)?;
    check_weights(sources.len(), w)?;
    let delta = w.total();
    if !(delta > T::zero()) || delta > T::one() {
        return Err(FusionError::InvalidDelta(to_f64(delta)));
    }
    let (mean, cov) = precision_combination(sources, w.as_slice())?;
    Ok(FusedPair {
        estimate: GaussianDensity::new(mean, cov)?,
        rule: Rule::Ffcc,
        weights_used: w.clone(),
    })
}

/// AA mean and the adjusted covariances `P_i + (x_AA - x_i)(.)'`.
fn adjusted_covariances<T: Real>(
    sources: &[GaussianDensity<T>],
    w: &[T],
) -> (DVector<T>, Vec<DMatrix<T>>) {
    let dim = sources[0].dim();
    let mut mean = DVector::zeros(dim);
    for (s, wi) in sources.iter().zip(w) {
        mean += s.mean() * *wi;
    }
    let adjusted = sources
        .iter()
        .map(|s| s.cov() + outer(&(&mean - s.mean())))
        .collect();
    (mean, adjusted)
}

/// Covariance union: AA mean with the largest (or smallest) adjusted covariance.
pub fn cu_fuse<T: Real>(
    sources: &[GaussianDensity<T>],
    w: &SimplexWeights<T>,
    bound: CuBound,
) -> Result<FusedPair<T>> {
    check_sources(sources, 1)?;
    check_weights(sources.len(), w)?;
    check_unit_total(w)?;
    let (mean, adjusted) = adjusted_covariances(sources, w.as_slice());
    let mut pick = 0;
    for i in 1..adjusted.len() {
        let ord = trace_compare(&adjusted[i], &adjusted[pick])?;
        let better = match bound {
            CuBound::Max => ord.is_gt(),
            CuBound::Min => ord.is_lt(),
        };
        if better {
            pick = i;
        }
    }
    Ok(FusedPair {
        estimate: GaussianDensity::new(mean, adjusted[pick].clone())?,
        rule: match bound {
            CuBound::Max => Rule::CuMax,
            CuBound::Min => Rule::CuMin,
        },
        weights_used: w.clone(),
    })
}

/// Arithmetic average of mixtures: concatenated, reweighted components.
pub fn aa_fuse_mixture<T: Real>(
    sources: &[GaussianMixture<T>],
    w: &SimplexWeights<T>,
) -> Result<GaussianMixture<T>> {
    let first = sources.first().ok_or(FusionError::TooFewSources { needed: 1, got: 0 })?;
    check_weights(sources.len(), w)?;
    check_unit_total(w)?;
    let dim = first.dim();
    let mut comps = Vec::with_capacity(sources.iter().map(GaussianMixture::len).sum());
    for (mix, wi) in sources.iter().zip(w.as_slice()) {
        ensure_dim(dim, mix.dim())?;
        for (c, g) in mix.components() {
            comps.push((*wi * *c, g.clone()));
        }
    }
    GaussianMixture::from_unnormalized(comps)
}

/// AA fusion of estimate pairs merged to one Gaussian:
/// `x_AA = sum w_i x_i`, `P_AA = sum w_i (P_i + (x_AA - x_i)(.)')`.
pub fn aa_fuse_pairs<T: Real>(sources: &[GaussianDensity<T>], w: &SimplexWeights<T>) -> Result<FusedPair<T>> {
    let dim = check_sources(sources, 1)?;
    check_weights(sources.len(), w)?;
    check_unit_total(w)?;
    let parts = sources
        .iter()
        .zip(w.as_slice())
        .filter(|(_, wi)| **wi > T::zero())
        .map(|(s, wi)| (*wi, s.mean(), s.cov()));
    let (mean, cov) = merged_moments(parts, dim);
    Ok(FusedPair {
        estimate: GaussianDensity::new(mean, cov)?,
        rule: Rule::AaMerged,
        weights_used: w.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTraces {
    pub naive: f64,
    pub min_source: f64,
    pub cu_min: f64,
    pub aa: f64,
    pub cu_max: f64,
    pub ci: f64,
    pub ffcc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
}

/// Traces along both conservative chains and whether each link holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub traces: ChainTraces,
    pub links: Vec<ChainLink>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.links.iter().all(|l| l.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ChainLink> {
        self.links.iter().filter(|l| !l.holds)
    }
}

/// Names of the links in the order [`chain_check`] reports them.
pub const CHAIN_LINKS: [&str; 7] = [
    "naive < min_i P_i",
    "min_i P_i <= cu_min",
    "cu_min <= aa",
    "aa <= cu_max",
    "naive < ci",
    "ci <= aa",
    "ci <= ffcc",
];

/// Verifies both conservative fusion chains under trace ordering.
///
/// Non-strict links allow a relative slack of `1e-10` for round-off; the
/// FFCC link uses weights `delta * w`.
pub fn chain_check<T: Real>(
    sources: &[GaussianDensity<T>],
    w: &SimplexWeights<T>,
    delta: T,
) -> Result<ChainReport> {
    check_sources(sources, 2)?;
    check_weights(sources.len(), w)?;
    let tr = |g: &GaussianDensity<T>| to_f64(g.cov().trace());
    let naive = tr(&naive_fuse(sources)?.estimate);
    let min_source = sources.iter().map(tr).fold(f64::INFINITY, f64::min);
    let cu_min = tr(&cu_fuse(sources, w, CuBound::Min)?.estimate);
    let aa = tr(&aa_fuse_pairs(sources, w)?.estimate);
    let cu_max = tr(&cu_fuse(sources, w, CuBound::Max)?.estimate);
    let ci = tr(&ci_fuse(sources)?.estimate);
    let scaled = SimplexWeights::with_total(
        w.as_slice().iter().map(|x| *x * delta).collect(),
        delta,
    )?;
    let ffcc = tr(&ffcc_fuse(sources, &scaled)?.estimate);

    let link = |name: &'static str, lhs: f64, rhs: f64, strict: bool| {
        let holds = if strict {
            lhs < rhs
        } else {
            lhs <= rhs + 1e-10 * (1.0 + lhs.abs().max(rhs.abs()))
        };
        ChainLink { name: name.to_string(), lhs, rhs, strict, holds }
    };
    let links = vec![
        link(CHAIN_LINKS[0], naive, min_source, true),
        link(CHAIN_LINKS[1], min_source, cu_min, false),
        link(CHAIN_LINKS[2], cu_min, aa, false),
        link(CHAIN_LINKS[3], aa, cu_max, false),
        link(CHAIN_LINKS[4], naive, ci, true),
        link(CHAIN_LINKS[5], ci, aa, false),
        link(CHAIN_LINKS[6], ci, ffcc, false),
    ];
    Ok(ChainReport {
        traces: ChainTraces { naive, min_source, cu_min, aa, cu_max, ci, ffcc },
        links,
    })
}

/// A random fusion problem: `count` Gaussians of dimension `dim` with means
/// spread over a few units, well-conditioned random covariances and weights
/// drawn uniformly from the simplex.
pub fn random_instance<R: rand::Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    dim: usize,
) -> Result<(Vec<GaussianDensity<f64>>, SimplexWeights<f64>)> {
    use rand_distr::{Distribution, Exp1, StandardNormal};
    if count == 0 || dim == 0 {
        return Err(FusionError::TooFewSources { needed: 1, got: count.min(dim) });
    }
    let mut sources = Vec::with_capacity(count);
    for _ in 0..count {
        let mean = DVector::from_fn(dim, |_, _| 3.0 * rng.sample::<f64, _>(StandardNormal));
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let cov = &a * a.transpose() + DMatrix::identity(dim, dim) * 0.1;
        sources.push(GaussianDensity::new(mean, crate::linalg::symmetrize(&cov))?);
    }
    let raw: Vec<f64> = (0..count).map(|_| Exp1.sample(rng)).collect();
    Ok((sources, SimplexWeights::normalized(raw)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn g(m: f64, v: f64) -> GaussianDensity<f64> {
        GaussianDensity::scalar(m, v).unwrap()
    }

    fn w(v: &[f64]) -> SimplexWeights<f64> {
        SimplexWeights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn naive_examples() {
        let f = naive_fuse(&[g(0.0, 1.0), g(2.0, 1.0)]).unwrap();
        assert_relative_eq!(f.estimate.mean()[0], 1.0);
        assert_relative_eq!(f.estimate.cov()[(0, 0)], 0.5);
        let p = GaussianDensity::from_slices(&[1.0, -1.0], &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let f = naive_fuse(&[p.clone(), p.clone()]).unwrap();
        assert!((f.estimate.mean() - p.mean()).norm() < 1e-12);
        assert!((f.estimate.cov() - p.cov() * 0.5).norm() < 1e-12);
        assert!(naive_fuse(&[g(0.0, 1.0)]).is_err());
    }

    #[test]
    fn ga_examples() {
        let f = ga_fuse(&[g(0.0, 1.0), g(2.0, 4.0)], &w(&[0.5, 0.5])).unwrap();
        assert_relative_eq!(f.estimate.cov()[(0, 0)], 1.6, epsilon = 1e-12);
        assert_relative_eq!(f.estimate.mean()[0], 0.4, epsilon = 1e-12);
        let f = ga_fuse(&[g(0.0, 3.0), g(5.0, 3.0)], &w(&[0.2, 0.8])).unwrap();
        assert_relative_eq!(f.estimate.cov()[(0, 0)], 3.0, epsilon = 1e-12);
        assert!(ga_fuse(&[g(0.0, 3.0), g(5.0, 3.0)], &w(&[1.0])).is_err());
    }

    #[test]
    fn ci_scalar_goes_to_boundary() {
        let f = ci_fuse(&[g(0.0, 1.0), g(2.0, 4.0)]).unwrap();
        assert_eq!(f.weights_used.as_slice(), &[1.0, 0.0]);
        assert_relative_eq!(f.estimate.cov()[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ffcc_examples() {
        let half = SimplexWeights::with_total(vec![0.25, 0.25], 0.5).unwrap();
        let f = ffcc_fuse(&[g(0.0, 2.0), g(1.0, 2.0)], &half).unwrap();
        assert_relative_eq!(f.estimate.cov()[(0, 0)], 4.0, epsilon = 1e-12);
        let unit = w(&[0.3, 0.7]);
        let a = ffcc_fuse(&[g(0.0, 2.0), g(1.0, 5.0)], &unit).unwrap();
        let b = ga_fuse(&[g(0.0, 2.0), g(1.0, 5.0)], &unit).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn cu_examples() {
        let s = [g(0.0, 1.0), g(2.0, 1.0)];
        for bound in [CuBound::Max, CuBound::Min] {
            let f = cu_fuse(&s, &w(&[0.5, 0.5]), bound).unwrap();
            assert_relative_eq!(f.estimate.mean()[0], 1.0);
            assert_relative_eq!(f.estimate.cov()[(0, 0)], 2.0);
        }
        let s = [g(0.0, 1.0), g(2.0, 4.0)];
        let hi = cu_fuse(&s, &w(&[0.5, 0.5]), CuBound::Max).unwrap();
        let lo = cu_fuse(&s, &w(&[0.5, 0.5]), CuBound::Min).unwrap();
        assert_relative_eq!(hi.estimate.cov()[(0, 0)], 5.0);
        assert_relative_eq!(lo.estimate.cov()[(0, 0)], 2.0);
    }

    #[test]
    fn aa_examples() {
        let f = aa_fuse_pairs(&[g(0.0, 1.0), g(2.0, 1.0)], &w(&[0.5, 0.5])).unwrap();
        assert_relative_eq!(f.estimate.mean()[0], 1.0);
        assert_relative_eq!(f.estimate.cov()[(0, 0)], 2.0);

        let benchmark = [g(40.0, 400.0), g(50.0, 200.0), g(60.0, 100.0), g(100.0, 400.0)];
        let f = aa_fuse_pairs(&benchmark, &w(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(f.estimate, g(100.0, 400.0));

        let mixes = [GaussianMixture::single(g(0.0, 1.0)), GaussianMixture::single(g(3.0, 2.0))];
        let m = aa_fuse_mixture(&mixes, &w(&[0.5, 0.5])).unwrap();
        assert_eq!(m.weights(), vec![0.5, 0.5]);
        let one = aa_fuse_mixture(&mixes[..1], &w(&[1.0])).unwrap();
        assert_eq!(one, mixes[0]);
    }

    #[test]
    fn chain_identical_sources_collapse() {
        let s = [g(1.0, 2.0), g(1.0, 2.0)];
        let r = chain_check(&s, &w(&[0.4, 0.6]), 0.5).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_relative_eq!(r.traces.cu_min, r.traces.aa, epsilon = 1e-12);
        assert_relative_eq!(r.traces.aa, r.traces.cu_max, epsilon = 1e-12);
    }

    #[test]
    fn chain_min_equals_cu_min_for_coincident_mean() {
        // x_AA coincides with the mean of the tighter source
        let s = [g(0.0, 1.0), g(3.0, 4.0), g(-3.0, 4.0)];
        let r = chain_check(&s, &w(&[0.5, 0.25, 0.25]), 1.0).unwrap();
        assert!(r.passed());
        assert_eq!(r.traces.min_source, r.traces.cu_min);
    }
}
