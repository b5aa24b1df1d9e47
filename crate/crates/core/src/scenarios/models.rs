use nalgebra::{DMatrix, DVector};

use super::config::{ScenarioConfig, ScenarioKind};
use crate::filters::{LinearGaussianModel, NonlinearModel};
use crate::gaussian::GaussianDensity;
use crate::{FusionError, Result};

/// Coordinated-turn transition for state `[px, vx, py, vy, omega]`.
///
/// Turn rates with `|omega| < 1e-9` use the constant-velocity limit.
pub fn ct_transition_matrix(omega: f64, dt: f64) -> DMatrix<f64> {
    let (a, b, c, s) = if omega.abs() < 1e-9 {
        (dt, 0.0, 1.0, 0.0)
    } else {
        let (s, c) = (omega * dt).sin_cos();
        (s / omega, (1.0 - c) / omega, c, s)
    };
    #[rustfmt::skip]
    let f = DMatrix::from_row_slice(5, 5, &[
        1.0, a,   0.0, -b,  0.0,
        0.0, c,   0.0, -s,  0.0,
        0.0, b,   1.0, a,   0.0,
        0.0, s,   0.0, c,   0.0,
        0.0, 0.0, 0.0, 0.0, 1.0,
    ]);
    f
}

/// Coordinated-turn dynamics observed by a range-bearing sensor.
///
/// The bearing is measured clockwise from the +y axis, `atan2(dx, dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatedTurnModel {
    dt: f64,
    q: DMatrix<f64>,
    q_factor: DMatrix<f64>,
    sensor: [f64; 2],
    r: DMatrix<f64>,
}

impl CoordinatedTurnModel {
    pub fn new(dt: f64, q1: f64, turn_var: f64, sensor: [f64; 2], range_std: f64, bearing_std: f64) -> Result<Self> {
        let g = DMatrix::from_row_slice(
            2,
            2,
            &[dt.powi(3) / 3.0, dt.powi(2) / 2.0, dt.powi(2) / 2.0, dt],
        ) * q1;
        let mut q = DMatrix::zeros(5, 5);
        q.view_mut((0, 0), (2, 2)).copy_from(&g);
        q.view_mut((2, 2), (2, 2)).copy_from(&g);
        q[(4, 4)] = turn_var;
        let q_factor = q
            .clone()
            .cholesky()
            .ok_or(FusionError::NotPositiveDefinite(f64::NAN))?
            .unpack();
        let r = DMatrix::from_diagonal(&DVector::from_vec(vec![range_std.powi(2), bearing_std.powi(2)]));
        Ok(Self { dt, q, q_factor, sensor, r })
    }

    pub fn sensor_position(&self) -> [f64; 2] {
        self.sensor
    }
}

impl NonlinearModel<f64> for CoordinatedTurnModel {
    fn state_dim(&self) -> usize {
        5
    }

    fn measurement_dim(&self) -> usize {
        2
    }

    fn transition(&self, x: &DVector<f64>) -> DVector<f64> {
        ct_transition_matrix(x[4], self.dt) * x
    }

    fn process_cov(&self) -> &DMatrix<f64> {
        &self.q
    }

    fn process_factor(&self) -> &DMatrix<f64> {
        &self.q_factor
    }

    fn measure(&self, x: &DVector<f64>) -> DVector<f64> {
        let dx = x[0] - self.sensor[0];
        let dy = x[2] - self.sensor[1];
        DVector::from_vec(vec![dx.hypot(dy), dx.atan2(dy)])
    }

    fn measurement_cov(&self) -> &DMatrix<f64> {
        &self.r
    }

    fn angle_components(&self) -> &[usize] {
        &[1]
    }
}

/// Per-sensor models of a configured scenario.
#[derive(Debug, Clone)]
pub enum ScenarioModels {
    Linear([LinearGaussianModel<f64>; 2]),
    CoordinatedTurn([CoordinatedTurnModel; 2]),
}

impl ScenarioModels {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let dt = cfg.dt;
        let s = &cfg.sensors;
        if s.len() != 2 {
            return Err(FusionError::InvalidConfig("exactly two sensors are required".into()));
        }
        match cfg.kind {
            ScenarioKind::Linear => {
                #[rustfmt::skip]
                let f = DMatrix::from_row_slice(4, 4, &[
                    1.0, dt,  0.0, 0.0,
                    0.0, 1.0, 0.0, 0.0,
                    0.0, 0.0, 1.0, dt,
                    0.0, 0.0, 0.0, 1.0,
                ]);
                let half = dt * dt / 2.0;
                let g = DMatrix::from_row_slice(4, 2, &[half, 0.0, dt, 0.0, 0.0, half, 0.0, dt]);
                let q_u = DMatrix::identity(2, 2) * cfg.process_noise.accel_var;
                let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
                let sensor = |p: &super::SensorParams| {
                    let r = DMatrix::from_diagonal(&DVector::from_vec(vec![
                        p.noise_std[0].powi(2),
                        p.noise_std[1].powi(2),
                    ]));
                    LinearGaussianModel::new(f.clone(), g.clone(), q_u.clone(), h.clone(), r)
                };
                Ok(Self::Linear([sensor(&s[0])?, sensor(&s[1])?]))
            }
            ScenarioKind::CoordinatedTurn => {
                let p = &cfg.process_noise;
                let sensor = |sp: &super::SensorParams| {
                    CoordinatedTurnModel::new(dt, p.q1, p.turn_var, sp.position, sp.noise_std[0], sp.noise_std[1])
                };
                Ok(Self::CoordinatedTurn([sensor(&s[0])?, sensor(&s[1])?]))
            }
        }
    }

    pub fn sensor(&self, i: usize) -> &dyn NonlinearModel<f64> {
        match self {
            Self::Linear(m) => &m[i],
            Self::CoordinatedTurn(m) => &m[i],
        }
    }

    pub fn linear(&self, i: usize) -> Option<&LinearGaussianModel<f64>> {
        match self {
            Self::Linear(m) => Some(&m[i]),
            Self::CoordinatedTurn(_) => None,
        }
    }
}

pub(crate) fn initial_prior(cfg: &ScenarioConfig) -> Result<GaussianDensity<f64>> {
    GaussianDensity::new(
        DVector::from_column_slice(&cfg.initial_mean),
        DMatrix::from_diagonal(&DVector::from_column_slice(&cfg.initial_cov_diag)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_turn_rate_is_constant_velocity() {
        let f = ct_transition_matrix(0.0, 1.0);
        let g = ct_transition_matrix(1e-12, 1.0);
        let cv = ct_transition_matrix(1e-7, 1.0);
        assert_eq!(f, g);
        assert!((&f - cv).abs().max() < 1e-6);
        assert_eq!(f[(0, 1)], 1.0);
        assert_eq!(f[(2, 3)], 1.0);
        assert_eq!(f[(0, 3)], 0.0);
    }

    #[test]
    fn turning_preserves_speed() {
        let f = ct_transition_matrix(-std::f64::consts::PI / 60.0, 1.0);
        let mut x = DVector::from_vec(vec![1000.0, 20.0, 1000.0, 0.0, -std::f64::consts::PI / 60.0]);
        for _ in 0..50 {
            x = &f * x;
        }
        assert!((x[1].hypot(x[3]) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn bearing_north_is_zero_and_east_is_right_angle() {
        let m = CoordinatedTurnModel::new(1.0, 0.1, 1e-4, [0.0, 0.0], 10.0, 0.01).unwrap();
        let north = m.measure(&DVector::from_vec(vec![0.0, 0.0, 300.0, 0.0, 0.0]));
        assert!((north[0] - 300.0).abs() < 1e-12);
        assert_eq!(north[1], 0.0);
        let x = DVector::from_vec(vec![1000.0, 0.0, 1000.0, 0.0, 0.0]);
        let z = m.measure(&x);
        assert!((z[1] - (1000.0f64 / 1000.0).atan()).abs() < 1e-15);
        let shifted = CoordinatedTurnModel::new(1.0, 0.1, 1e-4, [500.0, 0.0], 20.0, 0.03).unwrap();
        assert!((shifted.measure(&x)[1] - (500.0f64 / 1000.0).atan()).abs() < 1e-15);
    }

    #[test]
    fn process_noise_blocks() {
        let m = CoordinatedTurnModel::new(1.0, 0.1, 1e-4, [0.0, 0.0], 10.0, 0.01).unwrap();
        let q = m.process_cov();
        assert!((q[(0, 0)] - 0.1 / 3.0).abs() < 1e-15);
        assert!((q[(2, 3)] - 0.05).abs() < 1e-15);
        assert_eq!(q[(0, 2)], 0.0);
        assert_eq!(q[(4, 4)], 1e-4);
        let l = m.process_factor();
        assert!((l * l.transpose() - q).abs().max() < 1e-15);
    }
}
