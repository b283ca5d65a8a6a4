//! Uniform hyperrectangular discretization of the state space.

use serde::{Deserialize, Serialize};

use crate::error::PlannerError;

/// A uniform grid over a hyperrectangle with optional periodic dimensions.
///
/// Node coordinates along dimension `k` are `lower[k] + i * step[k]` for
/// `i = 0..nodes[k]`. On non-periodic dimensions `step = (upper - lower) / (nodes - 1)`
/// so the last node sits exactly on the upper bound. On periodic dimensions the
/// upper bound is identified with the lower one and `step = (upper - lower) / nodes`.
///
/// Flat indexing is row-major with the **last** dimension fastest:
/// `flat = ((i_0 * n_1 + i_1) * n_2 + i_2) * ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
    periodic: Vec<bool>,
    step: Vec<f64>,
    /// stride[k] = product of nodes[k+1..]
    stride: Vec<usize>,
    n_total: usize,
}

impl Grid {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        nodes: Vec<usize>,
        periodic: Vec<bool>,
    ) -> Result<Self, PlannerError> {
        let dim = lower.len();
        if upper.len() != dim || nodes.len() != dim || periodic.len() != dim || dim == 0 {
            return Err(PlannerError::InvalidGrid(
                "bounds, node counts and periodic flags must share a nonzero dimension".into(),
            ));
        }
        for k in 0..dim {
            if !(lower[k].is_finite() && upper[k].is_finite()) || lower[k] >= upper[k] {
                return Err(PlannerError::InvalidGrid(format!(
                    "dimension {k}: bounds [{}, {}] are not a proper interval",
                    lower[k], upper[k]
                )));
            }
            if nodes[k] < 2 {
                return Err(PlannerError::InvalidGrid(format!(
                    "dimension {k}: need at least 2 nodes, got {}",
                    nodes[k]
                )));
            }
        }
        let step = (0..dim)
            .map(|k| {
                let span = upper[k] - lower[k];
                if periodic[k] {
                    span / nodes[k] as f64
                } else {
                    span / (nodes[k] - 1) as f64
                }
            })
            .collect();
        let mut stride = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            stride[k] = stride[k + 1] * nodes[k + 1];
        }
        let n_total = nodes.iter().product();
        Ok(Self {
            lower,
            upper,
            nodes,
            periodic,
            step,
            stride,
            n_total,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Total number of nodes N.
    pub fn len(&self) -> usize {
        self.n_total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn nodes_per_dim(&self) -> &[usize] {
        &self.nodes
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn step(&self) -> &[f64] {
        &self.step
    }

    /// Number of vertices of one interpolation cell, 2^d.
    pub fn cell_vertices(&self) -> usize {
        1usize << self.dim()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        multi
            .iter()
            .zip(&self.stride)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        debug_assert!(flat < self.n_total);
        let mut rem = flat;
        self.stride
            .iter()
            .map(|s| {
                let i = rem / s;
                rem %= s;
                i
            })
            .collect()
    }

    /// Coordinates of node `flat`.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let multi = self.multi_index(flat);
        multi
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lower[k] + i as f64 * self.step[k])
            .collect()
    }

    /// Clamp non-periodic coordinates to the bounds and wrap periodic ones
    /// into `[lower, upper)`.
    pub fn clamp_wrap(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        x.iter()
            .enumerate()
            .map(|(k, &v)| self.clamp_wrap_coord(k, v))
            .collect()
    }

    pub(crate) fn clamp_wrap_coord(&self, k: usize, v: f64) -> f64 {
        if self.periodic[k] {
            let span = self.upper[k] - self.lower[k];
            let mut t = (v - self.lower[k]).rem_euclid(span);
            // rem_euclid can return span when v is a hair below a period boundary
            if t >= span {
                t -= span;
            }
            self.lower[k] + t
        } else {
            v.clamp(self.lower[k], self.upper[k])
        }
    }

    /// Iterate over all node coordinate vectors in flat-index order.
    pub fn iter_nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.n_total).map(|i| self.node(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn node_coordinates_match_spacing() {
        let g = Grid::new(
            vec![-1.0, 0.0],
            vec![1.0, 3.0],
            vec![3, 4],
            vec![false, false],
        )
        .unwrap();
        assert_eq!(g.len(), 12);
        assert_abs_diff_eq!(g.step()[0], 1.0);
        assert_abs_diff_eq!(g.step()[1], 1.0);
        // last dim fastest
        assert_eq!(g.multi_index(5), vec![1, 1]);
        assert_eq!(g.flat_index(&[1, 1]), 5);
        assert_eq!(g.node(5), vec![0.0, 1.0]);
        // last node hits the upper bound exactly on non-periodic dims
        assert_eq!(g.node(11), vec![1.0, 3.0]);
    }

    #[test]
    fn periodic_spacing_excludes_upper_bound() {
        let g = Grid::new(
            vec![-std::f64::consts::PI],
            vec![std::f64::consts::PI],
            vec![8],
            vec![true],
        )
        .unwrap();
        assert_abs_diff_eq!(g.step()[0], std::f64::consts::PI / 4.0);
        let last = g.node(7)[0];
        assert!(last < std::f64::consts::PI);
    }

    #[test]
    fn flat_multi_roundtrip() {
        let g = Grid::new(
            vec![0.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![3, 4, 5],
            vec![false, true, false],
        )
        .unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
    }

    #[test]
    fn wrap_and_clamp() {
        let g = Grid::new(
            vec![-1.0, -std::f64::consts::PI],
            vec![1.0, std::f64::consts::PI],
            vec![3, 4],
            vec![false, true],
        )
        .unwrap();
        let y = g.clamp_wrap(&[2.5, std::f64::consts::PI + 0.1]);
        assert_abs_diff_eq!(y[0], 1.0);
        assert_abs_diff_eq!(y[1], -std::f64::consts::PI + 0.1, epsilon = 1e-12);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(vec![0.0], vec![1.0], vec![1], vec![false]).is_err());
        assert!(Grid::new(vec![1.0], vec![0.0], vec![3], vec![false]).is_err());
        assert!(Grid::new(vec![0.0], vec![1.0], vec![3], vec![false, false]).is_err());
    }
}
