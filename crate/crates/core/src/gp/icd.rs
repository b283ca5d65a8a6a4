//! Greedy pivoted incomplete Cholesky decomposition of the kernel matrix.
//!
//! The selected pivots form the active set of the subset-of-regressors
//! approximation: each step picks the point with the largest residual
//! diagonal, i.e. the one worst explained by the current low-rank factor.

use crate::error::GpError;
use crate::gp::data::RegressionData;
use crate::gp::kernel::KernelHyperparams;

/// Select active-set pivots. Stops when the largest residual diagonal drops
/// below `tol` (or hits zero, for `tol = 0`) or `max_size` pivots are chosen.
/// Returns pivot indices in selection order; ties break toward the lowest
/// index, so the selection is deterministic.
pub fn icd_select(
    data: &RegressionData,
    h: &KernelHyperparams,
    tol: f64,
    max_size: usize,
) -> Result<Vec<usize>, GpError> {
    if max_size == 0 {
        return Err(GpError::InvalidHyperparams(
            "max_size must be at least 1".into(),
        ));
    }
    if tol < 0.0 {
        return Err(GpError::InvalidHyperparams("tol must be nonnegative".into()));
    }
    h.validate(data.dim())?;

    let x = data.normalized_inputs();
    let n = x.len();
    let mut diag = vec![h.self_value(); n];
    let mut selected = vec![false; n];
    let mut pivots = Vec::new();
    // factor columns, one per pivot, each of length n
    let mut cols: Vec<Vec<f64>> = Vec::new();

    while pivots.len() < max_size.min(n) {
        let mut p = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if !selected[i] && diag[i] > best {
                best = diag[i];
                p = i;
            }
        }
        if best < tol || best <= 0.0 {
            break;
        }
        let root = best.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            if selected[i] {
                continue;
            }
            let mut v = h.eval_unchecked(&x[i], &x[p]);
            for c in &cols {
                v -= c[i] * c[p];
            }
            col[i] = v / root;
        }
        col[p] = root;
        for i in 0..n {
            if !selected[i] {
                diag[i] -= col[i] * col[i];
            }
        }
        selected[p] = true;
        diag[p] = 0.0;
        pivots.push(p);
        cols.push(col);
    }
    Ok(pivots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> KernelHyperparams {
        KernelHyperparams::uniform(1.0, 0.0, 1.0)
    }

    #[test]
    fn single_point_is_selected() {
        let d = RegressionData::raw(vec![vec![0.3]], vec![1.0]).unwrap();
        assert_eq!(icd_select(&d, &uniform(), 1e-2, 10).unwrap(), vec![0]);
    }

    #[test]
    fn duplicate_input_has_zero_residual() {
        let d = RegressionData::raw(vec![vec![0.5], vec![0.5]], vec![1.0, 1.0]).unwrap();
        let pivots = icd_select(&d, &uniform(), 1e-2, 10).unwrap();
        assert_eq!(pivots.len(), 1);
    }

    #[test]
    fn zero_tolerance_keeps_all_distinct_points() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.17]).collect();
        let y = vec![0.0; 10];
        let d = RegressionData::raw(x.clone(), y).unwrap();
        let h = uniform();
        let pivots = icd_select(&d, &h, 0.0, 10).unwrap();
        assert_eq!(pivots.len(), 10);

        // with the full set selected, the Nystrom reconstruction
        // K_nu K_uu^{-1} K_un equals the dense Gram; K_uu^{-1} comes from an
        // independent dense Cholesky
        let full = crate::gp::kernel::gram(&x, &x, &h);
        let u: Vec<Vec<f64>> = pivots.iter().map(|&p| x[p].clone()).collect();
        let kuu = crate::gp::kernel::gram(&u, &u, &h);
        let knu = crate::gp::kernel::gram(&x, &u, &h);
        let chol = kuu.cholesky().expect("full-rank active set");
        let rec = &knu * chol.solve(&knu.transpose());
        for i in 0..10 {
            for j in 0..10 {
                assert!((rec[(i, j)] - full[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn max_size_caps_the_active_set() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let d = RegressionData::raw(x, vec![0.0; 30]).unwrap();
        let pivots = icd_select(&d, &uniform(), 0.0, 7).unwrap();
        assert_eq!(pivots.len(), 7);
    }
}
