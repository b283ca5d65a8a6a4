//! Q-values on grid nodes and greedy action selection via interpolation.

use serde::{Deserialize, Serialize};

use crate::error::PlannerError;
use crate::planner::grid::Grid;
use crate::planner::weights::{interpolation_weights, WeightRow};

/// One Q-vector of length N per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    values: Vec<Vec<f64>>,
}

impl QTable {
    pub fn zeros(n_actions: usize, n_nodes: usize) -> Self {
        Self {
            values: vec![vec![0.0; n_nodes]; n_actions],
        }
    }

    pub fn constant(n_actions: usize, n_nodes: usize, value: f64) -> Self {
        Self {
            values: vec![vec![value; n_nodes]; n_actions],
        }
    }

    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self, PlannerError> {
        let n = values.first().map(|v| v.len()).unwrap_or(0);
        if values.is_empty() || values.iter().any(|v| v.len() != n) {
            return Err(PlannerError::ShapeMismatch(
                "QTable needs one equal-length vector per action".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn n_actions(&self) -> usize {
        self.values.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.values[0].len()
    }

    pub fn action(&self, a: usize) -> &[f64] {
        &self.values[a]
    }

    pub fn action_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.values[a]
    }

    /// V(i) = max_a Q^a_i at node `i`.
    pub fn node_value(&self, i: usize) -> f64 {
        self.values
            .iter()
            .map(|q| q[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_distance(&self, other: &QTable) -> f64 {
        let mut d = 0.0f64;
        for (qa, qb) in self.values.iter().zip(&other.values) {
            for (x, y) in qa.iter().zip(qb) {
                d = d.max((x - y).abs());
            }
        }
        d
    }
}

/// Interpolated Q-value at an arbitrary state for a fixed action.
pub fn interpolate_q(q: &QTable, grid: &Grid, x: &[f64], action: usize) -> f64 {
    let z = grid.clamp_wrap(x);
    let row = interpolation_weights(grid, &z).expect("finite state after clamping");
    dot_row(&row, q.action(action))
}

fn dot_row(row: &WeightRow, q: &[f64]) -> f64 {
    row.iter().map(|&(c, w)| w * q[c as usize]).sum()
}

/// Greedy action with respect to the interpolated Q-function; ties break
/// toward the lowest action index.
pub fn greedy_action(q: &QTable, grid: &Grid, x: &[f64]) -> usize {
    let z = grid.clamp_wrap(x);
    let row = interpolation_weights(grid, &z).expect("finite state after clamping");
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for a in 0..q.n_actions() {
        let v = dot_row(&row, q.action(a));
        if v > best_val {
            best_val = v;
            best = a;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid_1d() -> Grid {
        Grid::new(vec![0.0], vec![4.0], vec![5], vec![false]).unwrap()
    }

    #[test]
    fn vertex_exactness() {
        let g = grid_1d();
        let q = QTable::from_values(vec![vec![3.0, -1.0, 7.0, 0.5, 2.0]]).unwrap();
        for i in 0..g.len() {
            let x = g.node(i);
            assert_eq!(interpolate_q(&q, &g, &x, 0), q.action(0)[i]);
        }
    }

    #[test]
    fn midpoint_averages_node_values() {
        let g = grid_1d();
        let q = QTable::from_values(vec![vec![2.0, 4.0, 0.0, 0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(interpolate_q(&q, &g, &[0.5], 0), 3.0);
    }

    #[test]
    fn affine_functions_are_reproduced() {
        // order-1 B-splines reproduce affine functions exactly
        let g = Grid::new(
            vec![-1.0, 2.0],
            vec![1.0, 5.0],
            vec![7, 9],
            vec![false, false],
        )
        .unwrap();
        let f = |x: &[f64]| 3.25 * x[0] - 0.75 * x[1] + 1.5;
        let nodes: Vec<f64> = g.iter_nodes().map(|x| f(&x)).collect();
        let q = QTable::from_values(vec![nodes]).unwrap();
        for &p in &[
            [-0.513, 2.111],
            [0.0, 3.3],
            [0.999, 4.999],
            [-1.0, 2.0],
            [0.25, 4.8],
        ] {
            assert_abs_diff_eq!(interpolate_q(&q, &g, &p, 0), f(&p), epsilon = 1e-10);
        }
    }

    #[test]
    fn greedy_ties_break_low() {
        let g = grid_1d();
        let q = QTable::constant(3, 5, 1.25);
        assert_eq!(greedy_action(&q, &g, &[1.7]), 0);
    }

    #[test]
    fn greedy_picks_dominant_action() {
        let g = grid_1d();
        let mut q = QTable::zeros(3, 5);
        q.action_mut(2).iter_mut().for_each(|v| *v = 5.0);
        assert_eq!(greedy_action(&q, &g, &[2.3]), 2);
    }
}
