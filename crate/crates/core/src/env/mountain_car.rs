//! Mountain car: drive an underpowered car out of a valley.
//!
//! Dynamics and constants follow the classic Sutton & Barto formulation;
//! position in [-1.2, 0.5], velocity in [-0.07, 0.07], actions {-1, 0, +1}.

use serde::{Deserialize, Serialize};

use super::{Environment, StepResult};
use crate::planner::Grid;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MountainCarConstants {
    pub throttle: f64,
    pub gravity_scale: f64,
    /// Reward emitted on the step that reaches the goal. The per-step reward
    /// is -1; whether the final step also costs -1 is a convention choice.
    pub terminal_reward: f64,
    pub gamma: f64,
    pub max_episode_len: usize,
}

impl Default for MountainCarConstants {
    fn default() -> Self {
        Self {
            throttle: 0.001,
            gravity_scale: 0.0025,
            terminal_reward: -1.0,
            gamma: 0.99,
            max_episode_len: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MountainCar {
    c: MountainCarConstants,
    lower: [f64; 2],
    upper: [f64; 2],
    periodic: [bool; 2],
}

pub const POSITION_MIN: f64 = -1.2;
pub const POSITION_MAX: f64 = 0.5;
pub const VELOCITY_MAX: f64 = 0.07;

impl MountainCar {
    pub fn new(c: MountainCarConstants) -> Self {
        Self {
            c,
            lower: [POSITION_MIN, -VELOCITY_MAX],
            upper: [POSITION_MAX, VELOCITY_MAX],
            periodic: [false, false],
        }
    }

    fn throttle_of(&self, action: usize) -> f64 {
        // actions indexed {0: -1, 1: 0, 2: +1}
        (action as f64 - 1.0) * self.c.throttle
    }
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new(MountainCarConstants::default())
    }
}

impl Environment for MountainCar {
    fn name(&self) -> &'static str {
        "mountain_car"
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
        3
    }

    fn action_set(&self) -> Vec<Vec<f64>> {
        vec![vec![-1.0], vec![0.0], vec![1.0]]
    }

    fn reward(&self, x: &[f64], action: usize) -> f64 {
        if self.step(x, action).terminal {
            self.c.terminal_reward
        } else {
            -1.0
        }
    }

    fn is_terminal(&self, x: &[f64]) -> bool {
        x[0] >= POSITION_MAX
    }

    fn start_state(&self, _episode: usize) -> Vec<f64> {
        vec![-std::f64::consts::FRAC_PI_6, 0.0]
    }

    fn gamma(&self) -> f64 {
        self.c.gamma
    }

    fn max_episode_len(&self) -> usize {
        self.c.max_episode_len
    }

    fn step(&self, x: &[f64], action: usize) -> StepResult {
        let (pos, vel) = (x[0], x[1]);
        let mut v = vel + self.throttle_of(action) - self.c.gravity_scale * (3.0 * pos).cos();
        v = v.clamp(-VELOCITY_MAX, VELOCITY_MAX);
        let mut p = pos + v;
        if p <= POSITION_MIN {
            p = POSITION_MIN;
            v = 0.0;
        }
        p = p.min(POSITION_MAX);
        let terminal = p >= POSITION_MAX;
        let reward = if terminal { self.c.terminal_reward } else { -1.0 };
        StepResult {
            next_state: vec![p, v],
            reward,
            terminal,
        }
    }

    fn r_max(&self, _grid: &Grid) -> f64 {
        1.0
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
    fn valley_bottom_is_a_coasting_fixed_point() {
        // cos(3 * -pi/6) = cos(-pi/2) = 0, so gravity vanishes at the start.
        let env = MountainCar::default();
        let r = env.step(&[-std::f64::consts::FRAC_PI_6, 0.0], 1);
        assert_abs_diff_eq!(r.next_state[0], -std::f64::consts::FRAC_PI_6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.next_state[1], 0.0, epsilon = 1e-15);
        assert!(!r.terminal);
        assert_eq!(r.reward, -1.0);
    }

    #[test]
    fn goal_position_is_terminal() {
        let env = MountainCar::default();
        for a in 0..3 {
            assert!(env.is_terminal(&[0.5, -0.03]));
            let r = env.step(&[0.499, 0.05], a);
            assert!(r.terminal);
        }
    }

    #[test]
    fn left_wall_zeroes_velocity() {
        let env = MountainCar::default();
        let r = env.step(&[-1.19, -0.07], 0);
        assert_eq!(r.next_state[0], POSITION_MIN);
        assert_eq!(r.next_state[1], 0.0);
    }

    #[test]
    fn states_remain_in_bounds() {
        let env = MountainCar::default();
        let mut x = vec![-0.3, 0.0];
        for t in 0..1000 {
            let r = env.step(&x, t % 3);
            assert!(r.next_state[0] >= POSITION_MIN && r.next_state[0] <= POSITION_MAX);
            assert!(r.next_state[1].abs() <= VELOCITY_MAX);
            if r.terminal {
                break;
            }
            x = r.next_state;
        }
    }
}
