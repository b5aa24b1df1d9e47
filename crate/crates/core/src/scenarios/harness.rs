use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BaseFilter, FilterSpec, FusionMode, ScenarioConfig};
use super::generate::{generate, ScenarioData};
use super::models::{initial_prior, ScenarioModels};
use crate::filters::{
    ckf_predict, ckf_step, gaussian_to_particles, ic_update_cubature, ic_update_kalman,
    ic_update_particles, kf_predict, kf_step, particles_to_gaussian, sir_predict, sir_step,
    NonlinearModel, ParticleSet,
};
use crate::fusion::{aa_fuse_pairs, ci_fuse, cu_fuse, ffcc_fuse, naive_fuse, CuBound};
use crate::gaussian::{GaussianDensity, SimplexWeights};
use crate::weights::suboptimal_weights_diversity;
use crate::{FusionError, Result};

/// States with a larger norm mark the filter's trial as divergent.
const DIVERGENCE_NORM: f64 = 1e8;

/// Stream slots reserved per trial: slot 0 drives the data, the rest the filters.
const TRIAL_STREAM_STRIDE: u64 = 1 << 20;

/// One filter combination's output over one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterTrace {
    /// Estimate after each step; `None` once the filter has failed.
    pub estimates: Vec<Option<DVector<f64>>>,
    /// AA weight on sensor 1 per step (empty for other modes).
    pub sensor1_weight: Vec<f64>,
    /// Some estimate exceeded the divergence norm.
    pub divergent: bool,
    /// Numerical failure or non-finite state; the trial is excluded from RMSE.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// `truth[k]` for `k = 0..=horizon`; estimate `j` pairs with `truth[j + 1]`.
    pub truth: Vec<DVector<f64>>,
    pub filters: Vec<FilterTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEnsemble {
    pub config: ScenarioConfig,
    pub labels: Vec<String>,
    pub trials: Vec<TrialRecord>,
}

impl TrialEnsemble {
    pub fn filter_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone)]
enum Local {
    Gauss(GaussianDensity<f64>),
    Cloud(ParticleSet<f64>),
}

impl Local {
    fn estimate(&self) -> DVector<f64> {
        match self {
            Local::Gauss(g) => g.mean().clone(),
            Local::Cloud(p) => p.mean(),
        }
    }

    fn as_gaussian(&self) -> Result<GaussianDensity<f64>> {
        match self {
            Local::Gauss(g) => Ok(g.clone()),
            Local::Cloud(p) => Ok(particles_to_gaussian(p)?.density),
        }
    }
}

struct Runner<'a> {
    spec: FilterSpec,
    cfg: &'a ScenarioConfig,
    models: &'a ScenarioModels,
    locals: Vec<Local>,
    rngs: Vec<ChaCha8Rng>,
}

impl<'a> Runner<'a> {
    fn new(spec: FilterSpec, cfg: &'a ScenarioConfig, models: &'a ScenarioModels, trial: u64, slot: u64) -> Result<Self> {
        let prior = initial_prior(cfg)?;
        let count = if spec.mode.fuses_posteriors() { 2 } else { 1 };
        let mut rngs: Vec<_> = (0..count)
            .map(|l| stream(cfg.seed, trial * TRIAL_STREAM_STRIDE + 1 + 2 * slot + l as u64))
            .collect();
        let locals = rngs
            .iter_mut()
            .map(|rng| match spec.base {
                BaseFilter::Sir => Ok(Local::Cloud(gaussian_to_particles(&prior, cfg.particle_count, rng)?)),
                _ => Ok(Local::Gauss(prior.clone())),
            })
            .collect::<Result<_>>()?;
        Ok(Self { spec, cfg, models, locals, rngs })
    }

    fn local_step(&mut self, l: usize, sensor: usize, y: &DVector<f64>) -> Result<()> {
        let model = self.models.sensor(sensor);
        let next = match (&self.locals[l], self.spec.base) {
            (Local::Gauss(g), BaseFilter::Kf) => Local::Gauss(kf_step(g, self.linear(sensor)?, y)?),
            (Local::Gauss(g), _) => Local::Gauss(ckf_step(g, model, y)?),
            (Local::Cloud(p), _) => Local::Cloud(sir_step(p, model, y, &mut self.rngs[l])?),
        };
        self.locals[l] = next;
        Ok(())
    }

    fn linear(&self, sensor: usize) -> Result<&'a crate::filters::LinearGaussianModel<f64>> {
        self.models
            .linear(sensor)
            .ok_or_else(|| FusionError::InvalidConfig("the Kalman filter needs linear sensors".into()))
    }

    fn ic_step(&mut self, ys: [&DVector<f64>; 2]) -> Result<()> {
        let next = match (&self.locals[0], self.spec.base) {
            (Local::Gauss(g), BaseFilter::Kf) => {
                let (a, b) = (self.linear(0)?, self.linear(1)?);
                Local::Gauss(ic_update_kalman(&kf_predict(g, a)?, &[(a, ys[0]), (b, ys[1])])?)
            }
            (Local::Gauss(g), _) => {
                let pred = ckf_predict(g, self.models.sensor(0))?;
                Local::Gauss(ic_update_cubature(&pred, &self.sensor_pairs(ys))?)
            }
            (Local::Cloud(p), _) => {
                let pred = sir_predict(p, self.models.sensor(0), &mut self.rngs[0])?;
                Local::Cloud(ic_update_particles(&pred, &self.sensor_pairs(ys), &mut self.rngs[0])?)
            }
        };
        self.locals[0] = next;
        Ok(())
    }

    fn sensor_pairs<'y>(&self, ys: [&'y DVector<f64>; 2]) -> [(&'a dyn NonlinearModel<f64>, &'y DVector<f64>); 2] {
        [(self.models.sensor(0), ys[0]), (self.models.sensor(1), ys[1])]
    }

    /// Fuses the two local posteriors and feeds the result back to both.
    fn fuse(&mut self) -> Result<(DVector<f64>, Option<f64>)> {
        let posts = [self.locals[0].as_gaussian()?, self.locals[1].as_gaussian()?];
        let mut w1 = None;
        let fused = match self.spec.mode {
            FusionMode::Nf => naive_fuse(&posts)?,
            FusionMode::Aa => {
                let w = suboptimal_weights_diversity(&posts)?.w;
                w1 = Some(w[0]);
                aa_fuse_pairs(&posts, &w)?
            }
            FusionMode::Ci => ci_fuse(&posts)?,
            FusionMode::Cu => cu_fuse(&posts, &SimplexWeights::uniform(2)?, CuBound::Max)?,
            FusionMode::Ffcc => {
                let d = self.cfg.ffcc_delta;
                ffcc_fuse(&posts, &SimplexWeights::with_total(vec![d / 2.0; 2], d)?)?
            }
            FusionMode::Noncoop | FusionMode::Ic => unreachable!("not a fusion mode"),
        }
        .estimate;
        for (l, rng) in self.rngs.iter_mut().enumerate() {
            self.locals[l] = match self.locals[l] {
                Local::Gauss(_) => Local::Gauss(fused.clone()),
                Local::Cloud(_) => Local::Cloud(gaussian_to_particles(&fused, self.cfg.particle_count, rng)?),
            };
        }
        Ok((fused.mean().clone(), w1))
    }

    fn step(&mut self, ys: [&DVector<f64>; 2]) -> Result<(DVector<f64>, Option<f64>)> {
        match self.spec.mode {
            FusionMode::Noncoop => {
                self.local_step(0, 0, ys[0])?;
                Ok((self.locals[0].estimate(), None))
            }
            FusionMode::Ic => {
                self.ic_step(ys)?;
                Ok((self.locals[0].estimate(), None))
            }
            _ => {
                self.local_step(0, 0, ys[0])?;
                self.local_step(1, 1, ys[1])?;
                self.fuse()
            }
        }
    }
}

fn run_filter(
    spec: FilterSpec,
    slot: usize,
    cfg: &ScenarioConfig,
    models: &ScenarioModels,
    trial: usize,
    data: &ScenarioData,
) -> FilterTrace {
    let mut trace = FilterTrace {
        estimates: vec![None; cfg.horizon],
        sensor1_weight: Vec::new(),
        divergent: false,
        failure: None,
    };
    let mut runner = match Runner::new(spec, cfg, models, trial as u64, slot as u64) {
        Ok(r) => r,
        Err(e) => {
            trace.failure = Some(format!("initialisation: {e}"));
            return trace;
        }
    };
    for k in 0..cfg.horizon {
        let ys = [&data.measurements[0][k], &data.measurements[1][k]];
        match runner.step(ys) {
            Ok((est, w1)) => {
                if est.iter().any(|v| !v.is_finite()) {
                    trace.failure = Some(format!("non-finite estimate at step {}", k + 1));
                    trace.divergent = true;
                    break;
                }
                if est.norm() > DIVERGENCE_NORM {
                    trace.divergent = true;
                }
                if let Some(w) = w1 {
                    trace.sensor1_weight.push(w);
                }
                trace.estimates[k] = Some(est);
            }
            Err(e) => {
                trace.failure = Some(format!("step {}: {e}", k + 1));
                trace.divergent = true;
                break;
            }
        }
    }
    if let Some(f) = &trace.failure {
        log::warn!("{} trial {trial}: {f}", spec.label());
    }
    trace
}

fn run_trial(cfg: &ScenarioConfig, models: &ScenarioModels, trial: usize) -> Result<TrialRecord> {
    let mut rng = stream(cfg.seed, trial as u64 * TRIAL_STREAM_STRIDE);
    let data = generate(cfg, models, &mut rng)?;
    let filters = cfg
        .filter_set
        .iter()
        .enumerate()
        .map(|(slot, spec)| run_filter(*spec, slot, cfg, models, trial, &data))
        .collect();
    Ok(TrialRecord { trial, truth: data.truth, filters })
}

/// Runs every configured filter combination on every trial.
///
/// Trials run in parallel on `jobs` worker threads (all cores when `None`).
/// Each trial owns its RNG streams, so the ensemble does not depend on the
/// thread count.
pub fn run_experiment(cfg: &ScenarioConfig, jobs: Option<usize>) -> Result<TrialEnsemble> {
    cfg.validate()?;
    let models = ScenarioModels::from_config(cfg)?;
    let run = || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, &models, t))
            .collect::<Result<Vec<_>>>()
    };
    let trials = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| FusionError::InvalidConfig(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(TrialEnsemble {
        config: cfg.clone(),
        labels: cfg.filter_set.iter().map(FilterSpec::label).collect(),
        trials,
    })
}
