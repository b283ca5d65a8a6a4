//! Deterministic benchmark environments: dynamics, rewards, bounds and
//! episode rules for mountain car, pendulum swing-up, bicycle balancing
//! and acrobot swing-up.

pub mod acrobot;
pub mod bicycle;
pub mod mountain_car;
pub mod pendulum;
pub mod rk4;

use crate::planner::Grid;

pub use acrobot::{Acrobot, AcrobotConstants};
pub use bicycle::{Bicycle, BicycleConstants};
pub use mountain_car::{MountainCar, MountainCarConstants};
pub use pendulum::{Pendulum, PendulumConstants};

/// Outcome of applying one action: successor state (within bounds),
/// immediate reward and whether the episode terminates.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
}

/// A deterministic control domain over a hyperrectangular state space with a
/// finite action set. Step functions are pure: identical (state, action)
/// pairs produce bit-identical results.
pub trait Environment: Sync + Send {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// Per-dimension lower bounds.
    fn lower(&self) -> &[f64];

    /// Per-dimension upper bounds.
    fn upper(&self) -> &[f64];

    /// Which dimensions are angular (wrapped rather than clamped).
    fn periodic(&self) -> &[bool];

    fn n_actions(&self) -> usize;

    /// The scalar or vector control associated with each action index.
    fn action_set(&self) -> Vec<Vec<f64>>;

    /// Known reward function r(x, a).
    fn reward(&self, x: &[f64], action: usize) -> f64;

    fn is_terminal(&self, x: &[f64]) -> bool;

    /// Start state for the given episode index (the bicycle alternates
    /// between two symmetric starts).
    fn start_state(&self, episode: usize) -> Vec<f64>;

    fn gamma(&self) -> f64;

    fn max_episode_len(&self) -> usize;

    fn step(&self, x: &[f64], action: usize) -> StepResult;

    /// Reward bound used for the optimistic value V_MAX.
    fn r_max(&self, grid: &Grid) -> f64;

    /// Optimistic value bound; R_MAX / (1 - gamma) when gamma < 1.
    fn v_max(&self, grid: &Grid) -> f64 {
        let gamma = self.gamma();
        assert!(gamma < 1.0, "environments with gamma = 1 must override v_max");
        self.r_max(grid) / (1.0 - gamma)
    }

    /// Grid resolution used in the reference experiments.
    fn default_grid_nodes(&self) -> Vec<usize>;
}

/// Clamp non-periodic coordinates to `[lower, upper]` and wrap periodic ones
/// into `[lower, upper)`.
pub(crate) fn clamp_wrap_state(x: &mut [f64], lower: &[f64], upper: &[f64], periodic: &[bool]) {
    for k in 0..x.len() {
        if periodic[k] {
            let span = upper[k] - lower[k];
            let mut t = (x[k] - lower[k]).rem_euclid(span);
            if t >= span {
                t -= span;
            }
            x[k] = lower[k] + t;
        } else {
            x[k] = x[k].clamp(lower[k], upper[k]);
        }
    }
}

/// Names accepted by [`create`].
pub const DOMAIN_NAMES: [&str; 4] = ["mountain_car", "pendulum", "bicycle", "acrobot"];

/// Instantiate a domain by name with default constants.
pub fn create(name: &str) -> Option<Box<dyn Environment>> {
    create_with_overrides(name, None).ok()
}

/// Instantiate a domain by name, optionally overriding physical constants
/// with a JSON object of `constant name -> value` (missing fields keep their
/// defaults).
pub fn create_with_overrides(
    name: &str,
    overrides: Option<&serde_json::Value>,
) -> Result<Box<dyn Environment>, String> {
    fn build<C, E>(overrides: Option<&serde_json::Value>, make: impl Fn(C) -> E) -> Result<E, String>
    where
        C: Default + serde::de::DeserializeOwned,
    {
        let constants = match overrides {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| e.to_string())?,
            None => C::default(),
        };
        Ok(make(constants))
    }
    match name {
        "mountain_car" => Ok(Box::new(build(overrides, MountainCar::new)?)),
        "pendulum" => Ok(Box::new(build(overrides, Pendulum::new)?)),
        "bicycle" => Ok(Box::new(build(overrides, Bicycle::new)?)),
        "acrobot" => Ok(Box::new(build(overrides, Acrobot::new)?)),
        other => Err(format!(
            "unknown domain {other:?}; expected one of {DOMAIN_NAMES:?}"
        )),
    }
}
