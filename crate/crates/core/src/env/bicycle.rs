//! Bicycle balancing at constant speed, after the Randlov-Alstrom model as
//! used in the Ernst and Lagoudakis-Parr benchmark suites.
//!
//! State is (omega, domega, alpha, dalpha): roll angle and rate of the frame,
//! angle and rate of the handlebar. The rider chooses one of five combined
//! (displacement, torque) actions every 0.01 s. The bicycle has fallen when
//! the roll angle leaves [-12, 12] degrees; the episode then ends with
//! reward -10, otherwise each step costs the squared roll angle.

use serde::{Deserialize, Serialize};

use super::rk4::rk4_step;
use super::{Environment, StepResult};
use crate::planner::Grid;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BicycleConstants {
    /// Riding speed, m/s (10 km/h in the reference setup).
    pub speed: f64,
    pub gravity: f64,
    /// Height of the combined center of mass over ground, m.
    pub com_height: f64,
    /// Distance between the tire contact points, m.
    pub wheelbase: f64,
    /// Horizontal distance from front contact point to center of mass, m.
    pub com_to_front: f64,
    /// Vertical distance between bicycle and cyclist centers of mass, m.
    pub com_offset: f64,
    pub mass_bicycle: f64,
    pub mass_tire: f64,
    pub mass_cyclist: f64,
    pub tire_radius: f64,
    /// Control/integration interval, seconds.
    pub dt: f64,
    pub gamma: f64,
    pub max_episode_len: usize,
}

impl Default for BicycleConstants {
    fn default() -> Self {
        Self {
            speed: 10.0 / 3.6,
            gravity: 9.82,
            com_height: 0.94,
            wheelbase: 1.11,
            com_to_front: 0.66,
            com_offset: 0.3,
            mass_bicycle: 15.0,
            mass_tire: 1.7,
            mass_cyclist: 60.0,
            tire_radius: 0.34,
            dt: 0.01,
            gamma: 0.98,
            max_episode_len: 500,
        }
    }
}

/// (rider displacement, handlebar torque) per action index.
pub const ACTIONS: [(f64, f64); 5] = [
    (0.0, 0.0),
    (-0.02, 0.0),
    (0.02, 0.0),
    (0.0, -2.0),
    (0.0, 2.0),
];

pub const OMEGA_MAX: f64 = 12.0 * std::f64::consts::PI / 180.0;
pub const ALPHA_MAX: f64 = 80.0 * std::f64::consts::PI / 180.0;
pub const RATE_MAX: f64 = 2.0 * std::f64::consts::PI;

/// Frame and handlebar accelerations under (displacement, torque).
pub fn dynamics(x: &[f64; 4], displacement: f64, torque: f64, c: &BicycleConstants) -> [f64; 4] {
    let (omega, domega, alpha, dalpha) = (x[0], x[1], x[2], x[3]);
    let total_mass = c.mass_bicycle + c.mass_cyclist;
    let inertia_frame = (13.0 / 3.0) * c.mass_bicycle * c.com_height * c.com_height
        + c.mass_cyclist * (c.com_height + c.com_offset).powi(2);
    let i_dc = c.mass_tire * c.tire_radius * c.tire_radius;
    let i_dv = 1.5 * c.mass_tire * c.tire_radius * c.tire_radius;
    let i_dl = 0.5 * c.mass_tire * c.tire_radius * c.tire_radius;
    let wheel_rate = c.speed / c.tire_radius;

    let phi = omega + (displacement / c.com_height).atan();
    let inv_r_front = alpha.sin().abs() / c.wheelbase;
    let inv_r_back = alpha.tan().abs() / c.wheelbase;
    let inv_r_cm = if alpha == 0.0 {
        0.0
    } else {
        let tan = alpha.tan();
        1.0 / ((c.wheelbase - c.com_to_front).powi(2)
            + (c.wheelbase * c.wheelbase) / (tan * tan))
            .sqrt()
    };

    let ddomega = (total_mass * c.com_height * c.gravity * phi.sin()
        - phi.cos()
            * (i_dc * wheel_rate * dalpha
                + alpha.signum()
                    * c.speed
                    * c.speed
                    * (c.mass_tire * c.tire_radius * (inv_r_front + inv_r_back)
                        + total_mass * c.com_height * inv_r_cm)))
        / inertia_frame;
    let ddalpha = (torque - i_dv * wheel_rate * domega) / i_dl;
    [domega, ddomega, dalpha, ddalpha]
}

#[derive(Debug, Clone)]
pub struct Bicycle {
    c: BicycleConstants,
    lower: [f64; 4],
    upper: [f64; 4],
    periodic: [bool; 4],
}

impl Bicycle {
    pub fn new(c: BicycleConstants) -> Self {
        Self {
            c,
            lower: [-OMEGA_MAX, -RATE_MAX, -ALPHA_MAX, -RATE_MAX],
            upper: [OMEGA_MAX, RATE_MAX, ALPHA_MAX, RATE_MAX],
            periodic: [false; 4],
        }
    }

    pub fn constants(&self) -> &BicycleConstants {
        &self.c
    }

    /// Raw (unclamped) roll angle after one control interval.
    fn integrate(&self, x: &[f64], action: usize) -> [f64; 4] {
        let (d, torque) = ACTIONS[action];
        let f = |s: &[f64; 4]| dynamics(s, d, torque, &self.c);
        let mut s = rk4_step(&f, &[x[0], x[1], x[2], x[3]], self.c.dt);
        // physical handlebar stop at +/-80 degrees
        if s[2].abs() > ALPHA_MAX {
            s[2] = s[2].clamp(-ALPHA_MAX, ALPHA_MAX);
            s[3] = 0.0;
        }
        s
    }
}

impl Default for Bicycle {
    fn default() -> Self {
        Self::new(BicycleConstants::default())
    }
}

impl Environment for Bicycle {
    fn name(&self) -> &'static str {
        "bicycle"
    }

    fn dim(&self) -> usize {
        4
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    fn n_actions(&self) -> usize {
        ACTIONS.len()
    }

    fn action_set(&self) -> Vec<Vec<f64>> {
        ACTIONS.iter().map(|&(d, t)| vec![d, t]).collect()
    }

    fn reward(&self, x: &[f64], action: usize) -> f64 {
        let raw = self.integrate(x, action);
        if raw[0].abs() > OMEGA_MAX {
            -10.0
        } else {
            -x[0] * x[0]
        }
    }

    fn is_terminal(&self, x: &[f64]) -> bool {
        x[0].abs() > OMEGA_MAX
    }

    fn start_state(&self, episode: usize) -> Vec<f64> {
        let tilt = 10.0 * std::f64::consts::PI / 180.0;
        if episode % 2 == 0 {
            vec![tilt, 0.0, 0.0, 0.0]
        } else {
            vec![-tilt, 0.0, 0.0, 0.0]
        }
    }

    fn gamma(&self) -> f64 {
        self.c.gamma
    }

    fn max_episode_len(&self) -> usize {
        self.c.max_episode_len
    }

    fn step(&self, x: &[f64], action: usize) -> StepResult {
        let raw = self.integrate(x, action);
        let fallen = raw[0].abs() > OMEGA_MAX;
        let mut next = raw.to_vec();
        for k in 0..4 {
            next[k] = next[k].clamp(self.lower[k], self.upper[k]);
        }
        StepResult {
            next_state: next,
            reward: if fallen { -10.0 } else { -x[0] * x[0] },
            terminal: fallen,
        }
    }

    fn r_max(&self, _grid: &Grid) -> f64 {
        10.0
    }

    fn default_grid_nodes(&self) -> Vec<usize> {
        vec![20, 20, 20, 20]
    }
}
