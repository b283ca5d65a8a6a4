//! Grid discretization, interpolation weights and value iteration.

pub mod grid;
pub mod qtable;
pub mod value_iteration;
pub mod weights;

pub use grid::Grid;
pub use qtable::{greedy_action, interpolate_q, QTable};
pub use value_iteration::{value_iteration, PlannerInputs, SweepMode, ValueIterationResult};
pub use weights::{
    build_weights, interpolation_weights, FnOracle, SparseWeights, SuccessorOracle, WeightRow,
};
