use serde::{Deserialize, Serialize};

use crate::{FusionError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Nearly constant velocity motion, position-only measurements.
    Linear,
    /// Coordinated turn with unknown turn rate, range-bearing measurements.
    CoordinatedTurn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFilter {
    Kf,
    Ckf,
    Sir,
}

impl BaseFilter {
    pub fn label(self) -> &'static str {
        match self {
            BaseFilter::Kf => "KF",
            BaseFilter::Ckf => "CKF",
            BaseFilter::Sir => "SIR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    /// Sensor 1 alone.
    Noncoop,
    /// One filter consuming both sensors' measurements.
    Ic,
    /// Naive product of the two local posteriors.
    Nf,
    /// Arithmetic average with diversity-preference weights, merged to one Gaussian.
    Aa,
    /// Covariance intersection with trace-optimal weights.
    Ci,
    /// Covariance union, max bound, uniform weights.
    Cu,
    /// Fast-and-fractional CI with uniform weights scaled to `ffcc_delta`.
    Ffcc,
}

impl FusionMode {
    pub fn label(self) -> &'static str {
        match self {
            FusionMode::Noncoop => "Noncoop1",
            FusionMode::Ic => "IC",
            FusionMode::Nf => "NF",
            FusionMode::Aa => "AA",
            FusionMode::Ci => "CI",
            FusionMode::Cu => "CU",
            FusionMode::Ffcc => "FFCC",
        }
    }

    pub fn fuses_posteriors(self) -> bool {
        !matches!(self, FusionMode::Noncoop | FusionMode::Ic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterSpec {
    pub base: BaseFilter,
    pub mode: FusionMode,
}

impl FilterSpec {
    pub fn new(base: BaseFilter, mode: FusionMode) -> Self {
        Self { base, mode }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.base.label(), self.mode.label())
    }
}

/// Sensor location and per-coordinate measurement noise standard deviations.
///
/// Linear sensors use `noise_std = [x, y]`; range-bearing sensors use
/// `noise_std = [range, bearing_rad]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    #[serde(default)]
    pub position: [f64; 2],
    pub noise_std: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessNoise {
    /// Acceleration variance per axis (linear scenario).
    #[serde(default = "default_accel_var")]
    pub accel_var: f64,
    /// Intensity of the position/velocity block (coordinated turn).
    #[serde(default = "default_q1")]
    pub q1: f64,
    /// Turn-rate random-walk variance (coordinated turn).
    #[serde(default = "default_turn_var")]
    pub turn_var: f64,
}

fn default_accel_var() -> f64 {
    25.0
}

fn default_q1() -> f64 {
    0.1
}

fn default_turn_var() -> f64 {
    1e-4
}

fn default_dt() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.9
}

impl Default for ProcessNoise {
    fn default() -> Self {
        Self {
            accel_var: default_accel_var(),
            q1: default_q1(),
            turn_var: default_turn_var(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub initial_mean: Vec<f64>,
    pub initial_cov_diag: Vec<f64>,
    #[serde(default)]
    pub process_noise: ProcessNoise,
    pub sensors: Vec<SensorParams>,
    pub filter_set: Vec<FilterSpec>,
    pub particle_count: usize,
    #[serde(default = "default_delta")]
    pub ffcc_delta: f64,
}

const MODES: [FusionMode; 6] = [
    FusionMode::Noncoop,
    FusionMode::Ic,
    FusionMode::Nf,
    FusionMode::Aa,
    FusionMode::Ci,
    FusionMode::Cu,
];

impl ScenarioConfig {
    /// 100 trials x 100 steps of the constant-velocity benchmark with KF and
    /// SIR (200 particles) under every fusion mode.
    pub fn linear() -> Self {
        let filter_set = [BaseFilter::Kf, BaseFilter::Sir]
            .into_iter()
            .flat_map(|b| MODES.map(|m| FilterSpec::new(b, m)))
            .collect();
        Self {
            kind: ScenarioKind::Linear,
            horizon: 100,
            trials: 100,
            seed: 1,
            dt: 1.0,
            initial_mean: vec![1000.0, 20.0, 1000.0, 0.0],
            initial_cov_diag: vec![500.0, 50.0, 500.0, 50.0],
            process_noise: ProcessNoise::default(),
            sensors: vec![
                SensorParams { position: [0.0, 0.0], noise_std: [20.0, 20.0] },
                SensorParams { position: [0.0, 0.0], noise_std: [40.0, 40.0] },
            ],
            filter_set,
            particle_count: 200,
            ffcc_delta: default_delta(),
        }
    }

    /// 100 trials x 100 steps of the coordinated-turn benchmark with CKF and
    /// SIR (500 particles) under every fusion mode.
    pub fn coordinated_turn() -> Self {
        let pi = std::f64::consts::PI;
        let filter_set = [BaseFilter::Ckf, BaseFilter::Sir]
            .into_iter()
            .flat_map(|b| MODES.map(|m| FilterSpec::new(b, m)))
            .collect();
        Self {
            kind: ScenarioKind::CoordinatedTurn,
            horizon: 100,
            trials: 100,
            seed: 1,
            dt: 1.0,
            initial_mean: vec![1000.0, 20.0, 1000.0, 0.0, -pi / 60.0],
            initial_cov_diag: vec![500.0, 50.0, 500.0, 50.0, 0.01],
            process_noise: ProcessNoise::default(),
            sensors: vec![
                SensorParams { position: [0.0, 0.0], noise_std: [10.0, pi / 180.0] },
                SensorParams { position: [500.0, 0.0], noise_std: [20.0, pi / 90.0] },
            ],
            filter_set,
            particle_count: 500,
            ffcc_delta: default_delta(),
        }
    }

    /// Same layout with every variance (initial, process, measurement) set to `tiny`.
    pub fn with_vanishing_noise(mut self, tiny: f64) -> Self {
        let sd = tiny.sqrt();
        self.initial_cov_diag.iter_mut().for_each(|v| *v = tiny);
        self.process_noise = ProcessNoise { accel_var: tiny, q1: tiny, turn_var: tiny };
        for s in &mut self.sensors {
            s.noise_std = [sd, sd];
        }
        self
    }

    pub fn state_dim(&self) -> usize {
        match self.kind {
            ScenarioKind::Linear => 4,
            ScenarioKind::CoordinatedTurn => 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FusionError::InvalidConfig(m));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.particle_count == 0 {
            return bad("particle_count must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.ffcc_delta > 0.0 && self.ffcc_delta <= 1.0) {
            return Err(FusionError::InvalidDelta(self.ffcc_delta));
        }
        let n = self.state_dim();
        if self.initial_mean.len() != n || self.initial_cov_diag.len() != n {
            return bad(format!("initial mean and covariance must have {n} entries"));
        }
        if self.initial_cov_diag.iter().any(|v| !(*v > 0.0)) {
            return bad("initial covariance entries must be positive".into());
        }
        let p = &self.process_noise;
        if [p.accel_var, p.q1, p.turn_var].iter().any(|v| !(*v > 0.0)) {
            return bad("process noise parameters must be positive".into());
        }
        if self.sensors.len() != 2 {
            return bad(format!("exactly two sensors are required, got {}", self.sensors.len()));
        }
        if self
            .sensors
            .iter()
            .any(|s| s.noise_std.iter().any(|v| !(*v > 0.0 && v.is_finite())))
        {
            return bad("sensor noise standard deviations must be positive".into());
        }
        if self.filter_set.is_empty() {
            return bad("filter_set is empty".into());
        }
        if self.kind == ScenarioKind::CoordinatedTurn
            && self.filter_set.iter().any(|f| f.base == BaseFilter::Kf)
        {
            return bad("the Kalman filter needs the linear scenario; use ckf".into());
        }
        Ok(())
    }
}
