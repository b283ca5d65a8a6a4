//! Multilinear interpolation weights and the per-action sparse weight matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::PlannerError;
use crate::planner::grid::Grid;

/// One row of interpolation coefficients: `(flat node index, weight)` pairs.
///
/// Weights are nonnegative, sum to 1 and there are at most 2^d of them
/// (exact-zero entries are dropped, duplicates merged).
pub type WeightRow = Vec<(u32, f64)>;

/// Tensor-product order-1 B-spline weights of `z` on the vertices of its
/// enclosing cell. The caller is responsible for clamping/wrapping `z` into
/// the grid domain; a point that coincides with a vertex yields a single
/// unit weight.
pub fn interpolation_weights(grid: &Grid, z: &[f64]) -> Result<WeightRow, PlannerError> {
    let d = grid.dim();
    debug_assert_eq!(z.len(), d);
    if z.iter().any(|v| !v.is_finite()) {
        return Err(PlannerError::NonFiniteQuery);
    }

    // Per dimension: lower vertex index, neighbor index, fractional offset.
    let mut lo = vec![0usize; d];
    let mut hi = vec![0usize; d];
    let mut lam = vec![0.0f64; d];
    for k in 0..d {
        let n = grid.nodes_per_dim()[k];
        let t = (z[k] - grid.lower()[k]) / grid.step()[k];
        if grid.periodic()[k] {
            // t in [0, n) up to roundoff
            let tf = t.floor();
            let mut i0 = tf as isize;
            let n_i = n as isize;
            i0 = i0.rem_euclid(n_i);
            lo[k] = i0 as usize;
            hi[k] = ((i0 + 1).rem_euclid(n_i)) as usize;
            lam[k] = (t - tf).clamp(0.0, 1.0);
        } else {
            let i0 = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
            lo[k] = i0;
            hi[k] = i0 + 1;
            lam[k] = (t - i0 as f64).clamp(0.0, 1.0);
        }
    }

    let mut row: WeightRow = Vec::with_capacity(1usize << d);
    let mut multi = vec![0usize; d];
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        for k in 0..d {
            if corner >> k & 1 == 1 {
                w *= lam[k];
                multi[k] = hi[k];
            } else {
                w *= 1.0 - lam[k];
                multi[k] = lo[k];
            }
        }
        if w == 0.0 {
            continue;
        }
        let col = grid.flat_index(&multi) as u32;
        // merge duplicate vertices (possible on tight periodic grids)
        match row.iter_mut().find(|(c, _)| *c == col) {
            Some((_, acc)) => *acc += w,
            None => row.push((col, w)),
        }
    }
    Ok(row)
}

/// Row-sparse interpolation matrices W^a for every action, plus per-row
/// self-weights w_ii^a. Rows are stored with a fixed stride of 2^d slots;
/// unused slots carry zero weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseWeights {
    n_nodes: usize,
    n_actions: usize,
    width: usize,
    cols: Vec<u32>,
    vals: Vec<f64>,
    self_weight: Vec<f64>,
}

impl SparseWeights {
    pub fn from_rows(
        n_nodes: usize,
        n_actions: usize,
        width: usize,
        mut fill: impl FnMut(usize, usize) -> WeightRow,
    ) -> Self {
        let mut sw = Self::zeroed(n_nodes, n_actions, width);
        for a in 0..n_actions {
            for i in 0..n_nodes {
                let row = fill(a, i);
                sw.set_row(a, i, &row);
            }
        }
        sw
    }

    fn zeroed(n_nodes: usize, n_actions: usize, width: usize) -> Self {
        Self {
            n_nodes,
            n_actions,
            width,
            cols: vec![0; n_nodes * n_actions * width],
            vals: vec![0.0; n_nodes * n_actions * width],
            self_weight: vec![0.0; n_nodes * n_actions],
        }
    }

    fn set_row(&mut self, action: usize, node: usize, row: &WeightRow) {
        assert!(row.len() <= self.width, "row exceeds 2^d entries");
        let base = (action * self.n_nodes + node) * self.width;
        let mut selfw = 0.0;
        for (slot, &(c, w)) in row.iter().enumerate() {
            self.cols[base + slot] = c;
            self.vals[base + slot] = w;
            if c as usize == node {
                selfw += w;
            }
        }
        for slot in row.len()..self.width {
            self.cols[base + slot] = node as u32;
            self.vals[base + slot] = 0.0;
        }
        self.self_weight[action * self.n_nodes + node] = selfw;
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// `(columns, weights)` of row `node` under `action`.
    pub fn row(&self, action: usize, node: usize) -> (&[u32], &[f64]) {
        let base = (action * self.n_nodes + node) * self.width;
        (
            &self.cols[base..base + self.width],
            &self.vals[base..base + self.width],
        )
    }

    /// w_ii^a for row `node` under `action`.
    pub fn self_weight(&self, action: usize, node: usize) -> f64 {
        self.self_weight[action * self.n_nodes + node]
    }
}

/// Anything that can produce a successor state and a normalized uncertainty
/// for a (state, action) pair: the learned model, or the true dynamics with
/// zero uncertainty.
pub trait SuccessorOracle: Sync {
    fn n_actions(&self) -> usize;

    /// Returns `(successor, uncertainty in [0,1])`. Successors may lie outside
    /// the grid domain; `build_weights` clamps/wraps them.
    fn successor(
        &self,
        state: &[f64],
        action: usize,
    ) -> Result<(Vec<f64>, f64), Box<dyn std::error::Error + Send + Sync>>;
}

/// Evaluate the oracle on every (node, action), interpolate the successors
/// and collect the per-action uncertainty vectors C^a.
pub fn build_weights(
    grid: &Grid,
    oracle: &dyn SuccessorOracle,
) -> Result<(SparseWeights, Vec<Vec<f64>>), PlannerError> {
    let n = grid.len();
    let n_actions = oracle.n_actions();
    let width = grid.cell_vertices();
    let mut sw = SparseWeights::zeroed(n, n_actions, width);
    let mut uncertainty = vec![vec![0.0; n]; n_actions];

    for a in 0..n_actions {
        let rows: Vec<Result<(WeightRow, f64), PlannerError>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = grid.node(i);
                let (succ, c) = oracle
                    .successor(&x, a)
                    .map_err(|source| PlannerError::Oracle {
                        node: i,
                        action: a,
                        source,
                    })?;
                let z = grid.clamp_wrap(&succ);
                let row = interpolation_weights(grid, &z)?;
                Ok((row, c))
            })
            .collect();
        for (i, r) in rows.into_iter().enumerate() {
            let (row, c) = r?;
            sw.set_row(a, i, &row);
            uncertainty[a][i] = c;
        }
    }
    Ok((sw, uncertainty))
}

/// Successor oracle view of a plain function, used when planning with the
/// true transition function (uncertainty identically zero).
pub struct FnOracle<F> {
    n_actions: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&[f64], usize) -> Vec<f64> + Sync,
{
    pub fn new(n_actions: usize, f: F) -> Self {
        Self { n_actions, f }
    }
}

impl<F> SuccessorOracle for FnOracle<F>
where
    F: Fn(&[f64], usize) -> Vec<f64> + Sync,
{
    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn successor(
        &self,
        state: &[f64],
        action: usize,
    ) -> Result<(Vec<f64>, f64), Box<dyn std::error::Error + Send + Sync>> {
        Ok(((self.f)(state, action), 0.0))
    }
}
