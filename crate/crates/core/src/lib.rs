//! Model-based online reinforcement learning for continuous deterministic
//! domains: per-coordinate Gaussian-process dynamics models with
//! uncertainty-driven exploration, combined with value iteration on a
//! uniform interpolation grid.
//!
//! The crate is organized around the pipeline:
//!
//! * [`env`] — benchmark domains (dynamics, rewards, bounds, episodes),
//! * [`gp`] — sparse GP regression with likelihood-optimized hyperparameters,
//! * [`model`] — the transition model: one GP per (state dimension, action),
//! * [`planner`] — grid discretization, interpolation weights, value iteration,
//! * [`agent`] — the online loop tying the above together, plus offline planning,
//! * [`export`] — text exports of learning curves, value functions and snapshots.

pub mod agent;
pub mod env;
pub mod error;
pub mod export;
pub mod gp;
pub mod model;
pub mod planner;
