//! Deterministic minimization over the closed probability simplex.
//!
//! Three stages:
//!
//! 1. Exhaustive lattice search with step `1/resolution` (boundary included,
//!    the uniform point is always evaluated first).
//! 2. Local pattern refinement: each round halves the step and moves along
//!    `e_i - e_j` directions while the objective strictly decreases.
//! 3. Central-path polish: a log-barrier continuation with damped Newton steps
//!    started from the incumbent. It converges to the same point as the lattice
//!    when the minimizer is unique, and to the analytic center of the optimal
//!    face when the minimizer is not unique.
//!
//! An objective that is constant on the lattice (up to round-off) returns the
//! uniform weights. Candidates are compared strictly, so evaluation order fixes
//! every tie and results are bitwise reproducible.

use nalgebra::{DMatrix, DVector};

/// Lattice step denominators: `1/200` for up to three sources, `1/50` for four.
pub fn default_resolution(n: usize) -> usize {
    match n {
        0..=3 => 200,
        4 => 50,
        5 => 20,
        _ => 10,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSearch {
    pub resolution: usize,
    pub refine_rounds: usize,
    pub polish: bool,
}

impl SimplexSearch {
    pub fn for_sources(n: usize) -> Self {
        Self {
            resolution: default_resolution(n),
            refine_rounds: 3,
            polish: true,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution.max(1);
        self
    }

    pub fn without_polish(mut self) -> Self {
        self.polish = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub w: Vec<f64>,
    pub value: f64,
    /// Incumbent after each stage and accepted move.
    pub trace: Vec<(Vec<f64>, f64)>,
    pub evaluations: usize,
}

struct Counted<F> {
    f: F,
    calls: usize,
}

impl<F: Fn(&[f64]) -> Option<f64>> Counted<F> {
    fn eval(&mut self, w: &[f64]) -> Option<f64> {
        self.calls += 1;
        (self.f)(w).filter(|v| v.is_finite())
    }
}

/// Visits every lattice point `k / resolution` of the `n`-simplex.
fn for_each_lattice_point(n: usize, resolution: usize, mut visit: impl FnMut(&[f64])) {
    let mut counts = vec![0usize; n];
    let mut w = vec![0.0; n];
    fn rec(
        pos: usize,
        left: usize,
        n: usize,
        res: usize,
        counts: &mut [usize],
        w: &mut [f64],
        visit: &mut dyn FnMut(&[f64]),
    ) {
        if pos + 1 == n {
            counts[pos] = left;
            for (wi, c) in w.iter_mut().zip(counts.iter()) {
                *wi = *c as f64 / res as f64;
            }
            visit(w);
            return;
        }
        for k in (0..=left).rev() {
            counts[pos] = k;
            rec(pos + 1, left - k, n, res, counts, w, visit);
        }
    }
    rec(0, resolution, n, resolution, &mut counts, &mut w, &mut visit);
}

impl SimplexSearch {
    /// Minimizes `f` over the closed simplex of dimension `n`.
    ///
    /// `f` returns `None` for points where it is undefined; such points are skipped.
    pub fn minimize<F>(&self, n: usize, f: F) -> Option<SearchOutcome>
    where
        F: Fn(&[f64]) -> Option<f64>,
    {
        assert!(n >= 1, "simplex dimension must be positive");
        let mut obj = Counted { f, calls: 0 };
        let uniform = vec![1.0 / n as f64; n];
        if n == 1 {
            let v = obj.eval(&uniform)?;
            return Some(SearchOutcome {
                w: uniform.clone(),
                value: v,
                trace: vec![(uniform, v)],
                evaluations: obj.calls,
            });
        }

        let uniform_value = obj.eval(&uniform);
        let mut best: Option<(Vec<f64>, f64)> = uniform_value.map(|v| (uniform.clone(), v));
        let mut lo = uniform_value.unwrap_or(f64::INFINITY);
        let mut hi = uniform_value.unwrap_or(f64::NEG_INFINITY);
        for_each_lattice_point(n, self.resolution, |w| {
            if let Some(v) = obj.eval(w) {
                lo = lo.min(v);
                hi = hi.max(v);
                if best.as_ref().is_none_or(|(_, b)| v < *b) {
                    best = Some((w.to_vec(), v));
                }
            }
        });
        let (mut w, mut value) = best?;
        let mut trace = vec![(w.clone(), value)];

        let scale = 1.0 + lo.abs().max(hi.abs());
        if let Some(u) = uniform_value {
            if hi - lo <= 1e-10 * scale {
                return Some(SearchOutcome {
                    w: uniform.clone(),
                    value: u,
                    trace: vec![(uniform, u)],
                    evaluations: obj.calls,
                });
            }
        }

        let mut step = 1.0 / self.resolution as f64;
        for _ in 0..self.refine_rounds {
            step *= 0.5;
            for _ in 0..1000 {
                let mut improved: Option<(Vec<f64>, f64)> = None;
                for i in 0..n {
                    for j in 0..n {
                        if i == j || w[j] < step - 1e-15 {
                            continue;
                        }
                        let mut cand = w.clone();
                        cand[i] += step;
                        cand[j] = (cand[j] - step).max(0.0);
                        if let Some(v) = obj.eval(&cand) {
                            let incumbent = improved.as_ref().map_or(value, |(_, b)| *b);
                            if v < incumbent {
                                improved = Some((cand, v));
                            }
                        }
                    }
                }
                match improved {
                    Some((c, v)) => {
                        w = c;
                        value = v;
                        trace.push((w.clone(), value));
                    }
                    None => break,
                }
            }
        }

        if self.polish {
            if let Some((pw, pv)) = central_path(&mut obj, &w, scale) {
                if pv <= value + 1e-9 * scale {
                    w = pw;
                    value = pv;
                    trace.push((w.clone(), value));
                }
            }
        }

        if let Some(u) = uniform_value {
            if value > u {
                w = uniform;
                value = u;
                trace.push((w.clone(), value));
            }
        }

        Some(SearchOutcome {
            w,
            value,
            trace,
            evaluations: obj.calls,
        })
    }

    pub fn maximize<F>(&self, n: usize, f: F) -> Option<SearchOutcome>
    where
        F: Fn(&[f64]) -> Option<f64>,
    {
        let mut out = self.minimize(n, |w| f(w).map(|v| -v))?;
        out.value = -out.value;
        for (_, v) in &mut out.trace {
            *v = -*v;
        }
        Some(out)
    }
}

const GRAD_STEP: f64 = 1e-5;
const HESS_STEP: f64 = 1e-3;
/// Weights below this after the polish are snapped to zero.
const SNAP: f64 = 1e-6;

fn expand(u: &[f64]) -> Vec<f64> {
    let mut w = u.to_vec();
    w.push(1.0 - u.iter().sum::<f64>());
    w
}

/// Log-barrier continuation in the reduced coordinates `u = w[..n-1]`.
fn central_path<F>(obj: &mut Counted<F>, start: &[f64], scale: f64) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let n = start.len();
    let m = n - 1;
    // pull the start strictly inside
    let inner = 1e-3;
    let mut w: Vec<f64> = start.iter().map(|x| (1.0 - inner) * x + inner / n as f64).collect();
    let mut u: Vec<f64> = w[..m].to_vec();

    let f_at = |obj: &mut Counted<F>, u: &[f64]| obj.eval(&expand(u));
    let barrier = |u: &[f64]| -> Option<f64> {
        let w = expand(u);
        if w.iter().any(|x| *x <= 0.0) {
            return None;
        }
        Some(w.iter().map(|x| x.ln()).sum())
    };

    let mut mu = 1e-1 * scale;
    let mu_end = 1e-8 * scale;
    while mu >= mu_end * 0.999 {
        for _ in 0..60 {
            let f0 = f_at(obj, &u)?;
            let b0 = barrier(&u)?;
            let phi0 = f0 - mu * b0;

            let mut grad = DVector::zeros(m);
            for k in 0..m {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[k] += GRAD_STEP;
                dn[k] -= GRAD_STEP;
                grad[k] = (f_at(obj, &up)? - f_at(obj, &dn)?) / (2.0 * GRAD_STEP);
            }
            let mut hess = DMatrix::zeros(m, m);
            for k in 0..m {
                for l in k..m {
                    let h = HESS_STEP;
                    let shifted = |dk: f64, dl: f64| {
                        let mut v = u.clone();
                        v[k] += dk;
                        v[l] += dl;
                        v
                    };
                    let val = if k == l {
                        (f_at(obj, &shifted(h, 0.0))? - 2.0 * f0 + f_at(obj, &shifted(-h, 0.0))?) / (h * h)
                    } else {
                        (f_at(obj, &shifted(h, h))? - f_at(obj, &shifted(h, -h))?
                            - f_at(obj, &shifted(-h, h))?
                            + f_at(obj, &shifted(-h, -h))?)
                            / (4.0 * h * h)
                    };
                    hess[(k, l)] = val;
                    hess[(l, k)] = val;
                }
            }
            // barrier terms, last weight is 1 - sum(u)
            let wl = 1.0 - u.iter().sum::<f64>();
            for k in 0..m {
                grad[k] -= mu * (1.0 / u[k] - 1.0 / wl);
                for l in 0..m {
                    let diag = if k == l { 1.0 / (u[k] * u[k]) } else { 0.0 };
                    hess[(k, l)] += mu * (diag + 1.0 / (wl * wl));
                }
            }

            let mut damping = 0.0;
            let dir = loop {
                let shifted = &hess + DMatrix::identity(m, m) * damping;
                if let Some(ch) = shifted.cholesky() {
                    let d = ch.solve(&(-&grad));
                    if d.dot(&grad) < 0.0 {
                        break d;
                    }
                }
                damping = if damping == 0.0 { 1e-10 * scale } else { damping * 10.0 };
                if damping > 1e12 * scale {
                    return None;
                }
            };
            let decrement = -dir.dot(&grad);
            if decrement < 1e-14 * scale {
                break;
            }

            // fraction-to-boundary then Armijo backtracking
            let mut alpha: f64 = 1.0;
            let wl_dir: f64 = -dir.iter().sum::<f64>();
            for (x, d) in u.iter().zip(dir.iter()).chain(std::iter::once((&wl, &wl_dir))) {
                if *d < 0.0 {
                    alpha = alpha.min(-0.99 * x / d);
                }
            }
            let mut accepted = false;
            for _ in 0..60 {
                let cand: Vec<f64> = u.iter().zip(dir.iter()).map(|(x, d)| x + alpha * d).collect();
                if let (Some(fc), Some(bc)) = (f_at(obj, &cand), barrier(&cand)) {
                    if fc - mu * bc <= phi0 - 1e-4 * alpha * decrement {
                        u = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        mu *= 0.1;
    }

    w.truncate(0);
    w.extend(expand(&u));
    for x in &mut w {
        if *x < SNAP {
            *x = 0.0;
        }
    }
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    let v = obj.eval(&w)?;
    Some((w, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts() {
        let mut c = 0;
        for_each_lattice_point(4, 50, |_| c += 1);
        assert_eq!(c, 23426);
        let mut c = 0;
        for_each_lattice_point(2, 1000, |w| {
            assert!((w[0] + w[1] - 1.0).abs() < 1e-12);
            c += 1
        });
        assert_eq!(c, 1001);
    }

    #[test]
    fn finds_interior_quadratic_minimum() {
        let target = [0.2, 0.3, 0.5];
        let out = SimplexSearch::for_sources(3)
            .minimize(3, |w| Some(w.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum()))
            .unwrap();
        for (a, b) in out.w.iter().zip(target) {
            assert!((a - b).abs() < 1e-6, "{:?}", out.w);
        }
    }

    #[test]
    fn finds_boundary_minimum() {
        let out = SimplexSearch::for_sources(2).minimize(2, |w| Some(w[1])).unwrap();
        assert_eq!(out.w, vec![1.0, 0.0]);
    }

    #[test]
    fn constant_objective_returns_uniform() {
        let out = SimplexSearch::for_sources(4).minimize(4, |_| Some(3.0)).unwrap();
        assert_eq!(out.w, vec![0.25; 4]);
    }

    #[test]
    fn flat_valley_resolves_to_analytic_center() {
        // minimizers: w0 = 0.5 with w1 + w2 = 0.5; the analytic center has w1 = w2
        let out = SimplexSearch::for_sources(3)
            .minimize(3, |w| Some((w[0] - 0.5).powi(2)))
            .unwrap();
        assert!((out.w[0] - 0.5).abs() < 1e-5, "{:?}", out.w);
        assert!((out.w[1] - out.w[2]).abs() < 1e-4, "{:?}", out.w);
    }

    #[test]
    fn maximize_negates() {
        let out = SimplexSearch::for_sources(2)
            .maximize(2, |w| Some(-(w[0] - 0.7).powi(2)))
            .unwrap();
        assert!((out.w[0] - 0.7).abs() < 1e-6);
        assert!(out.value <= 0.0);
    }

    #[test]
    fn deterministic() {
        let f = |w: &[f64]| Some((w[0] - 0.3).powi(2) + (w[1] * 3.0).sin());
        let a = SimplexSearch::for_sources(3).minimize(3, f).unwrap();
        let b = SimplexSearch::for_sources(3).minimize(3, f).unwrap();
        assert_eq!(a, b);
    }
}
