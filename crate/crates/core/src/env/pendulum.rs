//! Inverted pendulum swing-up with a torque-limited motor.
//!
//! Single link of mass 1 kg and length 1 m rotating about one end, with the
//! physical constants of the Deisenroth-Rasmussen-Peters setup (viscous
//! friction 0.05, g = 9.81, inertia m l^2 / 3). The angle is measured from
//! the upright position and wraps in [-pi, pi); the quadratic reward is
//! maximal (zero) when balancing upright with no control effort. Episodes
//! start hanging down and run for a fixed 500 steps.

use serde::{Deserialize, Serialize};

use super::rk4::rk4_integrate;
use super::{clamp_wrap_state, Environment, StepResult};
use crate::planner::Grid;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PendulumConstants {
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
    pub friction: f64,
    /// Zero-order hold interval for one control decision, seconds.
    pub control_interval: f64,
    pub substeps: usize,
    pub gamma: f64,
    pub max_episode_len: usize,
}

impl Default for PendulumConstants {
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            gravity: 9.81,
            friction: 0.05,
            control_interval: 0.2,
            substeps: 10,
            gamma: 0.99,
            max_episode_len: 500,
        }
    }
}

pub const TORQUES: [f64; 5] = [-5.0, -2.5, 0.0, 2.5, 5.0];
pub const ANGVEL_MAX: f64 = 10.0;

/// Angular acceleration of the link under `torque`.
pub fn dynamics(x: &[f64; 2], torque: f64, c: &PendulumConstants) -> [f64; 2] {
    let inertia = c.mass * c.length * c.length / 3.0;
    let gravity_torque = 0.5 * c.mass * c.gravity * c.length * x[0].sin();
    [
        x[1],
        (torque - c.friction * x[1] + gravity_torque) / inertia,
    ]
}

/// Kinetic plus potential energy; conserved under zero torque and friction.
pub fn mechanical_energy(x: &[f64; 2], c: &PendulumConstants) -> f64 {
    let inertia = c.mass * c.length * c.length / 3.0;
    0.5 * inertia * x[1] * x[1] + 0.5 * c.mass * c.gravity * c.length * x[0].cos()
}

#[derive(Debug, Clone)]
pub struct Pendulum {
    c: PendulumConstants,
    lower: [f64; 2],
    upper: [f64; 2],
    periodic: [bool; 2],
}

impl Pendulum {
    pub fn new(c: PendulumConstants) -> Self {
        Self {
            c,
            lower: [-std::f64::consts::PI, -ANGVEL_MAX],
            upper: [std::f64::consts::PI, ANGVEL_MAX],
            periodic: [true, false],
        }
    }

    pub fn constants(&self) -> &PendulumConstants {
        &self.c
    }
}

impl Default for Pendulum {
    fn default() -> Self {
        Self::new(PendulumConstants::default())
    }
}

impl Environment for Pendulum {
    fn name(&self) -> &'static str {
        "pendulum"
    }

    fn dim(&self) -> usize {
        2
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

    fn reward(&self, x: &[f64], action: usize) -> f64 {
        let a = TORQUES[action];
        -0.1 * x[0] * x[0] - 0.01 * x[1] * x[1] - 0.01 * a * a
    }

    fn is_terminal(&self, _x: &[f64]) -> bool {
        false
    }

    fn start_state(&self, _episode: usize) -> Vec<f64> {
        // hanging at rest; the upright goal is theta = 0
        vec![std::f64::consts::PI, 0.0]
    }

    fn gamma(&self) -> f64 {
        self.c.gamma
    }

    fn max_episode_len(&self) -> usize {
        self.c.max_episode_len
    }

    fn step(&self, x: &[f64], action: usize) -> StepResult {
        let torque = TORQUES[action];
        let f = |s: &[f64; 2]| dynamics(s, torque, &self.c);
        let out = rk4_integrate(&f, &[x[0], x[1]], self.c.control_interval, self.c.substeps);
        let mut next = vec![out[0], out[1]];
        clamp_wrap_state(&mut next, &self.lower, &self.upper, &self.periodic);
        StepResult {
            reward: self.reward(x, action),
            next_state: next,
            terminal: false,
        }
    }

    fn r_max(&self, grid: &Grid) -> f64 {
        // tightest bound available: max |r| over grid nodes and actions
        let mut m = 0.0f64;
        for node in grid.iter_nodes() {
            for a in 0..self.n_actions() {
                m = m.max(self.reward(&node, a).abs());
            }
        }
        m
    }

    fn default_grid_nodes(&self) -> Vec<usize> {
        vec![100, 100]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn upright_equilibrium_is_free() {
        let env = Pendulum::default();
        let r = env.step(&[0.0, 0.0], 2);
        assert_abs_diff_eq!(r.next_state[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.next_state[1], 0.0, epsilon = 1e-12);
        assert_eq!(r.reward, 0.0);
    }

    #[test]
    fn quadratic_reward_arithmetic() {
        let env = Pendulum::default();
        // -0.1 * 1 - 0.01 * 4 - 0.01 * 25
        assert_abs_diff_eq!(env.reward(&[1.0, 2.0], 4), -0.39, epsilon = 1e-12);
    }

    #[test]
    fn hanging_position_is_stable() {
        let env = Pendulum::default();
        let r = env.step(&[std::f64::consts::PI, 0.0], 2);
        // wraps to the equivalent angle, stays at rest
        assert_abs_diff_eq!(r.next_state[0].cos(), -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.next_state[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn energy_drift_without_torque_or_friction() {
        let mut c = PendulumConstants::default();
        c.friction = 0.0;
        let f = |s: &[f64; 2]| dynamics(s, 0.0, &c);
        let x0 = [2.5, 0.0];
        let e0 = mechanical_energy(&x0, &c);
        let mut x = x0;
        for _ in 0..500 {
            x = rk4_integrate(&f, &x, 0.02, 1);
        }
        let e1 = mechanical_energy(&x, &c);
        assert!(((e1 - e0) / e0.abs()).abs() < 1e-3);
    }
}
