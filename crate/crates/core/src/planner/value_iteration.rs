//! Jacobi-style value iteration on the discretized Bellman fixed point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::PlannerError;
use crate::planner::qtable::QTable;
use crate::planner::weights::SparseWeights;

/// Update rule for one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    /// Q_{k+1} = R + gamma * max_a' W Q_k^{a'}
    Plain,
    /// Diagonal-rescaled update: the self-transition weight is excluded from
    /// the inner sum and solved in closed form via [1 - gamma w_ii]^{-1}.
    IncreasingCoordinate,
    /// IncreasingCoordinate blended with the optimistic bound:
    /// (1 - c) * update + c * V_MAX.
    UncertaintyAugmented,
}

/// Static planner inputs: node rewards, optional node uncertainties,
/// terminal mask and the discount setup.
#[derive(Debug, Clone)]
pub struct PlannerInputs {
    /// `[action][node]` rewards r(xi_i, a).
    pub rewards: Vec<Vec<f64>>,
    /// `[action][node]` uncertainties in [0,1]; required for
    /// `UncertaintyAugmented`.
    pub uncertainty: Option<Vec<Vec<f64>>>,
    /// Terminal nodes are absorbing with Q = 0.
    pub terminal: Vec<bool>,
    pub gamma: f64,
    /// Optimistic value bound, R_MAX / (1 - gamma) for gamma < 1.
    pub v_max: f64,
}

#[derive(Debug, Clone)]
pub struct ValueIterationResult {
    pub q: QTable,
    pub iterations: usize,
    pub converged: bool,
    /// Upper bound on the Bellman residual implied by the final sweep change,
    /// `delta * (1 + gamma) / (1 - gamma)`; infinite when gamma = 1.
    pub residual_bound: f64,
}

/// Sweep until the sup-norm change drops below `tol` for every action or
/// `max_iters` sweeps have run. Each sweep reads Q_k and writes Q_{k+1}
/// (double-buffered Jacobi); node updates within a sweep are independent.
pub fn value_iteration(
    inputs: &PlannerInputs,
    weights: &SparseWeights,
    q0: &QTable,
    mode: SweepMode,
    tol: f64,
    max_iters: usize,
) -> Result<ValueIterationResult, PlannerError> {
    let n = weights.n_nodes();
    let n_actions = weights.n_actions();
    validate(inputs, q0, n, n_actions, mode, tol)?;

    let mut cur = q0.clone();
    for a in 0..n_actions {
        pin_terminals(cur.action_mut(a), &inputs.terminal);
    }
    let mut next = cur.clone();

    let mut iterations = 0;
    let mut converged = false;
    let mut last_delta = 0.0;
    let mut initial_delta: Option<f64> = None;
    let mut growth_streak = 0usize;

    while iterations < max_iters {
        let mut delta = 0.0f64;
        for a in 0..n_actions {
            let rewards = &inputs.rewards[a];
            let uncertainty = inputs.uncertainty.as_ref().map(|c| &c[a]);
            let da = sweep_action(
                inputs, weights, &cur, a, rewards, uncertainty, mode, &mut next,
            );
            delta = delta.max(da);
        }
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        last_delta = delta;

        if delta < tol {
            converged = true;
            break;
        }

        // Divergence guard for the undiscounted case.
        if inputs.gamma >= 1.0 {
            let initial = *initial_delta.get_or_insert(delta);
            if delta > 10.0 * initial {
                growth_streak += 1;
                if growth_streak >= 10 {
                    return Err(PlannerError::Divergence {
                        delta,
                        initial,
                        sweeps: growth_streak,
                    });
                }
            } else {
                growth_streak = 0;
            }
        }
    }

    let residual_bound = if inputs.gamma < 1.0 {
        last_delta * (1.0 + inputs.gamma) / (1.0 - inputs.gamma)
    } else {
        f64::INFINITY
    };
    Ok(ValueIterationResult {
        q: cur,
        iterations,
        converged,
        residual_bound,
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep_action(
    inputs: &PlannerInputs,
    weights: &SparseWeights,
    cur: &QTable,
    action: usize,
    rewards: &[f64],
    uncertainty: Option<&Vec<f64>>,
    mode: SweepMode,
    next: &mut QTable,
) -> f64 {
    let gamma = inputs.gamma;
    let v_max = inputs.v_max;
    let terminal = &inputs.terminal;
    let n_actions = cur.n_actions();
    let out = next.action_mut(action);

    out.par_iter_mut()
        .enumerate()
        .map(|(i, slot)| {
            let old = cur.action(action)[i];
            let new = if terminal[i] {
                0.0
            } else {
                let (cols, vals) = weights.row(action, i);
                match mode {
                    SweepMode::Plain => {
                        rewards[i] + gamma * best_successor_value(cur, n_actions, cols, vals)
                    }
                    SweepMode::IncreasingCoordinate => diagonal_solved_update(
                        cur, n_actions, cols, vals, rewards[i], gamma,
                        weights.self_weight(action, i), i,
                    ),
                    SweepMode::UncertaintyAugmented => {
                        let c = uncertainty.expect("validated")[i];
                        if c >= 1.0 {
                            v_max
                        } else {
                            let base = diagonal_solved_update(
                                cur, n_actions, cols, vals, rewards[i], gamma,
                                weights.self_weight(action, i), i,
                            );
                            if c <= 0.0 {
                                base
                            } else {
                                (1.0 - c) * base + c * v_max
                            }
                        }
                    }
                }
            };
            *slot = new;
            (new - old).abs()
        })
        .reduce(|| 0.0, f64::max)
}

fn best_successor_value(cur: &QTable, n_actions: usize, cols: &[u32], vals: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a_next in 0..n_actions {
        let q = cur.action(a_next);
        let mut s = 0.0;
        for (c, w) in cols.iter().zip(vals) {
            s += w * q[*c as usize];
        }
        best = best.max(s);
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn diagonal_solved_update(
    cur: &QTable,
    n_actions: usize,
    cols: &[u32],
    vals: &[f64],
    reward: f64,
    gamma: f64,
    self_weight: f64,
    node: usize,
) -> f64 {
    let denom = 1.0 - gamma * self_weight;
    if denom < 1e-9 {
        // Fully self-absorbing node at gamma = 1: the closed-form solve is
        // singular, fall back to the plain update to keep iterates finite.
        return reward + gamma * best_successor_value(cur, n_actions, cols, vals);
    }
    let mut best = f64::NEG_INFINITY;
    for a_next in 0..n_actions {
        let q = cur.action(a_next);
        let mut s = 0.0;
        for (c, w) in cols.iter().zip(vals) {
            s += w * q[*c as usize];
        }
        s -= self_weight * q[node];
        best = best.max(s);
    }
    (reward + gamma * best) / denom
}

fn pin_terminals(q: &mut [f64], terminal: &[bool]) {
    for (v, &t) in q.iter_mut().zip(terminal) {
        if t {
            *v = 0.0;
        }
    }
}

fn validate(
    inputs: &PlannerInputs,
    q0: &QTable,
    n: usize,
    n_actions: usize,
    mode: SweepMode,
    tol: f64,
) -> Result<(), PlannerError> {
    if tol <= 0.0 {
        return Err(PlannerError::ShapeMismatch("tol must be positive".into()));
    }
    if inputs.rewards.len() != n_actions || inputs.rewards.iter().any(|r| r.len() != n) {
        return Err(PlannerError::ShapeMismatch(
            "rewards must be [n_actions][n_nodes]".into(),
        ));
    }
    if inputs.terminal.len() != n {
        return Err(PlannerError::ShapeMismatch(
            "terminal mask must have one entry per node".into(),
        ));
    }
    if q0.n_actions() != n_actions || q0.n_nodes() != n {
        return Err(PlannerError::ShapeMismatch(
            "q0 must be dimensioned to the weight matrix".into(),
        ));
    }
    match &inputs.uncertainty {
        Some(c) => {
            if c.len() != n_actions || c.iter().any(|ca| ca.len() != n) {
                return Err(PlannerError::ShapeMismatch(
                    "uncertainty must be [n_actions][n_nodes]".into(),
                ));
            }
            if c.iter().flatten().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(PlannerError::ShapeMismatch(
                    "uncertainty entries must lie in [0,1]".into(),
                ));
            }
        }
        None => {
            if mode == SweepMode::UncertaintyAugmented {
                return Err(PlannerError::ShapeMismatch(
                    "UncertaintyAugmented requires uncertainty vectors".into(),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::grid::Grid;
    use crate::planner::weights::{build_weights, FnOracle, SparseWeights};
    use approx::assert_abs_diff_eq;

    fn self_loop_weights(n_actions: usize) -> SparseWeights {
        SparseWeights::from_rows(1, n_actions, 2, |_a, i| vec![(i as u32, 1.0)])
    }

    fn inputs(rewards: Vec<Vec<f64>>, gamma: f64, v_max: f64) -> PlannerInputs {
        let n = rewards[0].len();
        PlannerInputs {
            rewards,
            uncertainty: None,
            terminal: vec![false; n],
            gamma,
            v_max,
        }
    }

    #[test]
    fn self_transition_geometric_series() {
        // w_ii = 1, r = 1, gamma = 0.5 -> Q = r / (1 - gamma) = 2,
        // reached by the diagonal solve in a single sweep.
        let w = self_loop_weights(1);
        let inp = inputs(vec![vec![1.0]], 0.5, 2.0);
        let q0 = QTable::zeros(1, 1);
        let ic = value_iteration(&inp, &w, &q0, SweepMode::IncreasingCoordinate, 1e-10, 100)
            .unwrap();
        assert_abs_diff_eq!(ic.q.action(0)[0], 2.0, epsilon = 1e-9);
        assert!(ic.converged);

        let plain = value_iteration(&inp, &w, &q0, SweepMode::Plain, 1e-10, 1000).unwrap();
        assert_abs_diff_eq!(plain.q.action(0)[0], 2.0, epsilon = 1e-8);
        // the closed-form solve needs strictly fewer sweeps
        assert!(ic.iterations <= plain.iterations);
        assert_eq!(ic.iterations, 2); // one productive sweep + one to confirm
    }

    #[test]
    fn all_uncertain_saturates_to_vmax_in_one_sweep() {
        let g = Grid::new(vec![0.0], vec![1.0], vec![4], vec![false]).unwrap();
        let oracle = FnOracle::new(2, |x: &[f64], _a| vec![x[0] + 0.3]);
        let (w, _) = build_weights(&g, &oracle).unwrap();
        let n = g.len();
        let inp = PlannerInputs {
            rewards: vec![vec![-1.0; n]; 2],
            uncertainty: Some(vec![vec![1.0; n]; 2]),
            terminal: vec![false; n],
            gamma: 0.9,
            v_max: 10.0,
        };
        let q0 = QTable::zeros(2, n);
        let res = value_iteration(&inp, &w, &q0, SweepMode::UncertaintyAugmented, 1e-8, 50)
            .unwrap();
        for a in 0..2 {
            for i in 0..n {
                assert_eq!(res.q.action(a)[i], 10.0);
            }
        }
        assert_eq!(res.iterations, 2);
    }

    #[test]
    fn zero_uncertainty_matches_increasing_coordinate_bitwise() {
        let g = Grid::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![5, 5],
            vec![false, false],
        )
        .unwrap();
        let oracle = FnOracle::new(3, |x: &[f64], a| {
            vec![x[0] + 0.05 * (a as f64 - 1.0), x[1] + 0.03]
        });
        let (w, _) = build_weights(&g, &oracle).unwrap();
        let n = g.len();
        let rewards: Vec<Vec<f64>> = (0..3)
            .map(|a| (0..n).map(|i| -((i + a) as f64 % 7.0) / 7.0).collect())
            .collect();
        let mk = |unc: Option<Vec<Vec<f64>>>| PlannerInputs {
            rewards: rewards.clone(),
            uncertainty: unc,
            terminal: vec![false; n],
            gamma: 0.9,
            v_max: 10.0,
        };
        let q0 = QTable::zeros(3, n);
        let ua = value_iteration(
            &mk(Some(vec![vec![0.0; n]; 3])),
            &w,
            &q0,
            SweepMode::UncertaintyAugmented,
            1e-6,
            200,
        )
        .unwrap();
        let ic = value_iteration(&mk(None), &w, &q0, SweepMode::IncreasingCoordinate, 1e-6, 200)
            .unwrap();
        assert_eq!(ua.q, ic.q);
        assert_eq!(ua.iterations, ic.iterations);
    }

    #[test]
    fn terminal_nodes_stay_zero() {
        let w = SparseWeights::from_rows(2, 1, 2, |_a, _i| vec![(1u32, 1.0)]);
        let inp = PlannerInputs {
            rewards: vec![vec![-1.0, -1.0]],
            uncertainty: None,
            terminal: vec![false, true],
            gamma: 0.9,
            v_max: 10.0,
        };
        let q0 = QTable::constant(1, 2, 5.0);
        let res = value_iteration(&inp, &w, &q0, SweepMode::Plain, 1e-9, 500).unwrap();
        assert_eq!(res.q.action(0)[1], 0.0);
        // node 0 transitions into the absorbing terminal: Q = r + gamma * 0
        assert_abs_diff_eq!(res.q.action(0)[0], -1.0, epsilon = 1e-8);
    }

    #[test]
    fn contraction_between_two_tables() {
        let g = Grid::new(vec![0.0], vec![1.0], vec![6], vec![false]).unwrap();
        let oracle = FnOracle::new(2, |x: &[f64], a| vec![x[0] + 0.11 * (a as f64 + 1.0)]);
        let (w, _) = build_weights(&g, &oracle).unwrap();
        let n = g.len();
        let inp = inputs(vec![vec![0.5; n], vec![-0.25; n]], 0.85, 10.0);
        let qa = QTable::constant(2, n, 3.0);
        let qb = QTable::from_values(vec![
            (0..n).map(|i| (i as f64).sin()).collect(),
            (0..n).map(|i| (i as f64).cos()).collect(),
        ])
        .unwrap();
        let before = qa.sup_distance(&qb);
        let ra = value_iteration(&inp, &w, &qa, SweepMode::Plain, 1e-12, 1).unwrap();
        let rb = value_iteration(&inp, &w, &qb, SweepMode::Plain, 1e-12, 1).unwrap();
        let after = ra.q.sup_distance(&rb.q);
        assert!(after <= 0.85 * before + 1e-12);
    }
}
