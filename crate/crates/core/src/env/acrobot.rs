//! Acrobot swing-up: an underactuated two-link robot with torque on the
//! second joint only, per the Sutton & Barto formulation.
//!
//! State is (theta1, dtheta1, theta2, dtheta2) with theta1 measured from the
//! downward vertical and theta2 relative to the first link. The goal is to
//! swing the tip one link length above the pivot. Reward is -1 per step with
//! gamma = 1; the optimistic value bound is therefore 0.

use serde::{Deserialize, Serialize};

use super::rk4::rk4_step;
use super::{clamp_wrap_state, Environment, StepResult};
use crate::planner::Grid;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AcrobotConstants {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    pub lc1: f64,
    pub lc2: f64,
    pub i1: f64,
    pub i2: f64,
    pub gravity: f64,
    pub control_interval: f64,
    pub substeps: usize,
    pub max_episode_len: usize,
}

impl Default for AcrobotConstants {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            l1: 1.0,
            l2: 1.0,
            lc1: 0.5,
            lc2: 0.5,
            i1: 1.0,
            i2: 1.0,
            gravity: 9.8,
            control_interval: 0.2,
            substeps: 4,
            max_episode_len: 500,
        }
    }
}

pub const TORQUES: [f64; 2] = [-1.0, 1.0];
pub const DTHETA1_MAX: f64 = 4.0 * std::f64::consts::PI;
pub const DTHETA2_MAX: f64 = 9.0 * std::f64::consts::PI;

/// Two-link manipulator dynamics with torque on the second joint.
pub fn dynamics(x: &[f64; 4], torque: f64, c: &AcrobotConstants) -> [f64; 4] {
    let (t1, dt1, t2, dt2) = (x[0], x[1], x[2], x[3]);
    let d1 = c.m1 * c.lc1 * c.lc1
        + c.m2 * (c.l1 * c.l1 + c.lc2 * c.lc2 + 2.0 * c.l1 * c.lc2 * t2.cos())
        + c.i1
        + c.i2;
    let d2 = c.m2 * (c.lc2 * c.lc2 + c.l1 * c.lc2 * t2.cos()) + c.i2;
    let phi2 = c.m2 * c.lc2 * c.gravity * (t1 + t2 - std::f64::consts::FRAC_PI_2).cos();
    let phi1 = -c.m2 * c.l1 * c.lc2 * dt2 * dt2 * t2.sin()
        - 2.0 * c.m2 * c.l1 * c.lc2 * dt2 * dt1 * t2.sin()
        + (c.m1 * c.lc1 + c.m2 * c.l1) * c.gravity * (t1 - std::f64::consts::FRAC_PI_2).cos()
        + phi2;
    let ddt2 = (torque + (d2 / d1) * phi1 - c.m2 * c.l1 * c.lc2 * dt1 * dt1 * t2.sin() - phi2)
        / (c.m2 * c.lc2 * c.lc2 + c.i2 - d2 * d2 / d1);
    let ddt1 = -(d2 * ddt2 + phi1) / d1;
    [dt1, ddt1, dt2, ddt2]
}

/// Kinetic plus potential energy; conserved under zero torque.
pub fn mechanical_energy(x: &[f64; 4], c: &AcrobotConstants) -> f64 {
    let (t1, dt1, t2, dt2) = (x[0], x[1], x[2], x[3]);
    let d1 = c.m1 * c.lc1 * c.lc1
        + c.m2 * (c.l1 * c.l1 + c.lc2 * c.lc2 + 2.0 * c.l1 * c.lc2 * t2.cos())
        + c.i1
        + c.i2;
    let d2 = c.m2 * (c.lc2 * c.lc2 + c.l1 * c.lc2 * t2.cos()) + c.i2;
    let kinetic = 0.5 * d1 * dt1 * dt1
        + d2 * dt1 * dt2
        + 0.5 * (c.m2 * c.lc2 * c.lc2 + c.i2) * dt2 * dt2;
    let y1 = -c.lc1 * t1.cos();
    let y2 = -c.l1 * t1.cos() - c.lc2 * (t1 + t2).cos();
    kinetic + c.gravity * (c.m1 * y1 + c.m2 * y2)
}

/// Height of the lower-link tip above the pivot, in units of link lengths.
pub fn tip_height(x: &[f64], c: &AcrobotConstants) -> f64 {
    -c.l1 * x[0].cos() - c.l2 * (x[0] + x[2]).cos()
}

#[derive(Debug, Clone)]
pub struct Acrobot {
    c: AcrobotConstants,
    lower: [f64; 4],
    upper: [f64; 4],
    periodic: [bool; 4],
}

impl Acrobot {
    pub fn new(c: AcrobotConstants) -> Self {
        let pi = std::f64::consts::PI;
        Self {
            c,
            lower: [-pi, -DTHETA1_MAX, -pi, -DTHETA2_MAX],
            upper: [pi, DTHETA1_MAX, pi, DTHETA2_MAX],
            periodic: [true, false, true, false],
        }
    }

    pub fn constants(&self) -> &AcrobotConstants {
        &self.c
    }
}

impl Default for Acrobot {
    fn default() -> Self {
        Self::new(AcrobotConstants::default())
    }
}

impl Environment for Acrobot {
    fn name(&self) -> &'static str {
        "acrobot"
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
        TORQUES.len()
    }

    fn action_set(&self) -> Vec<Vec<f64>> {
        TORQUES.iter().map(|&t| vec![t]).collect()
    }

    fn reward(&self, _x: &[f64], _action: usize) -> f64 {
        -1.0
    }

    fn is_terminal(&self, x: &[f64]) -> bool {
        tip_height(x, &self.c) > self.c.l1
    }

    fn start_state(&self, _episode: usize) -> Vec<f64> {
        vec![0.0; 4]
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn max_episode_len(&self) -> usize {
        self.c.max_episode_len
    }

    fn step(&self, x: &[f64], action: usize) -> StepResult {
        let torque = TORQUES[action];
        let f = |s: &[f64; 4]| dynamics(s, torque, &self.c);
        let dt = self.c.control_interval / self.c.substeps as f64;
        let mut s = [x[0], x[1], x[2], x[3]];
        for _ in 0..self.c.substeps {
            s = rk4_step(&f, &s, dt);
            // velocity bounds apply during integration, like the reference
            // Euler treatment
            s[1] = s[1].clamp(-DTHETA1_MAX, DTHETA1_MAX);
            s[3] = s[3].clamp(-DTHETA2_MAX, DTHETA2_MAX);
        }
        let mut next = s.to_vec();
        clamp_wrap_state(&mut next, &self.lower, &self.upper, &self.periodic);
        let terminal = self.is_terminal(&next);
        StepResult {
            next_state: next,
            reward: -1.0,
            terminal,
        }
    }

    fn r_max(&self, _grid: &Grid) -> f64 {
        1.0
    }

    fn v_max(&self, _grid: &Grid) -> f64 {
        // gamma = 1: rewards are all negative, 0 bounds the achievable value
        0.0
    }

    fn default_grid_nodes(&self) -> Vec<usize> {
        vec![25, 25, 25, 25]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::rk4::rk4_integrate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_step_from_rest_is_nonterminal_unit_cost() {
        let env = Acrobot::default();
        for a in 0..2 {
            let r = env.step(&[0.0; 4], a);
            assert_eq!(r.reward, -1.0);
            assert!(!r.terminal);
        }
    }

    #[test]
    fn torque_parity_mirrors_the_step() {
        // the vector field is odd: f(-x, -tau) = -f(x, tau), and RK4
        // preserves that symmetry to roundoff
        let env = Acrobot::default();
        let plus = env.step(&[0.0; 4], 1).next_state;
        let minus = env.step(&[0.0; 4], 0).next_state;
        for k in 0..4 {
            assert_abs_diff_eq!(plus[k] + minus[k], 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn goal_predicate_uses_tip_height() {
        let env = Acrobot::default();
        // both links straight up: tip height = 2 link lengths
        assert!(env.is_terminal(&[std::f64::consts::PI, 0.0, 0.0, 0.0]));
        assert!(!env.is_terminal(&[0.0; 4]));
    }

    #[test]
    fn energy_drift_without_torque() {
        let c = AcrobotConstants::default();
        let f = |s: &[f64; 4]| dynamics(s, 0.0, &c);
        let x0 = [1.0, 0.0, -0.5, 0.0];
        let e0 = mechanical_energy(&x0, &c);
        let mut x = x0;
        for _ in 0..500 {
            x = rk4_integrate(&f, &x, 0.05, 1);
        }
        let e1 = mechanical_energy(&x, &c);
        assert!(((e1 - e0) / e0.abs()).abs() < 1e-3, "drift {}", (e1 - e0) / e0);
    }
}
