//! Sparse GP training and prediction: subset-of-regressors mean with the
//! projected-process predictive variance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::GpError;
use crate::gp::data::{Normalization, RegressionData};
use crate::gp::icd::icd_select;
use crate::gp::kernel::{gram, KernelHyperparams};
use crate::gp::likelihood::{cholesky_with_jitter, NOISE_VARIANCE};

/// Immutable trained regressor. With active set `u`, noise floor `s2` and
/// `A = s2 K_uu + K_un K_nu`, queries evaluate
///
/// * mean:     `k_u(x)^T A^{-1} K_un y`
/// * variance: `k(x,x) - k_u(x)^T K_uu^{-1} k_u(x) + s2 k_u(x)^T A^{-1} k_u(x)`
///
/// clamped to `[0, k(x,x)]`. Everything is stored in normalized units; the
/// transform maps queries in and results out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpPredictor {
    hyperparams: KernelHyperparams,
    norm: Normalization,
    /// Indices of the active set within the training data, selection order.
    active_set: Vec<usize>,
    /// Active-set inputs, normalized units.
    active_inputs: Vec<Vec<f64>>,
    /// Lower Cholesky factor of K_uu (+ jitter).
    l_uu: DMatrix<f64>,
    /// Lower Cholesky factor of A (+ jitter).
    l_a: DMatrix<f64>,
    /// A^{-1} K_un y.
    weights: DVector<f64>,
    /// Diagonal stabilization that was actually applied.
    jitter: f64,
    n_train: usize,
}

/// Train on `data` with the given hyperparameters. The active set is chosen
/// by incomplete Cholesky (at most `max_subset` points, residual tolerance
/// `icd_tol`); the result is deterministic in data and hyperparameters.
pub fn fit(
    data: &RegressionData,
    h: &KernelHyperparams,
    max_subset: usize,
    icd_tol: f64,
) -> Result<GpPredictor, GpError> {
    h.validate(data.dim())?;
    let active_set = icd_select(data, h, icd_tol, max_subset)?;
    let x = data.normalized_inputs();
    let y = DVector::from_vec(data.normalized_targets());
    let active_inputs: Vec<Vec<f64>> = active_set.iter().map(|&i| x[i].clone()).collect();

    let kuu = gram(&active_inputs, &active_inputs, h);
    let knu = gram(&x, &active_inputs, h);

    let (chol_uu, jitter_uu) = cholesky_with_jitter(kuu.clone())?;
    // A = s2 K_uu + K_un K_nu
    let mut a = kuu * NOISE_VARIANCE;
    a.gemm_tr(1.0, &knu, &knu, 1.0);
    let (chol_a, jitter_a) = cholesky_with_jitter(a)?;

    let weights = chol_a.solve(&(knu.transpose() * &y));

    Ok(GpPredictor {
        hyperparams: h.clone(),
        norm: data.normalization().clone(),
        active_set,
        active_inputs,
        l_uu: chol_uu.l(),
        l_a: chol_a.l(),
        weights,
        jitter: jitter_uu.max(jitter_a),
        n_train: data.len(),
    })
}

impl GpPredictor {
    pub fn hyperparams(&self) -> &KernelHyperparams {
        &self.hyperparams
    }

    pub fn active_set(&self) -> &[usize] {
        &self.active_set
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    /// Prior variance k(x,x) in original target units; the variance returned
    /// by [`predict`](Self::predict) approaches this far from the data.
    pub fn prior_variance(&self) -> f64 {
        self.norm
            .denormalize_variance(self.hyperparams.self_value())
    }

    /// Predictive mean and variance at `x`, in original units.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64), GpError> {
        let dim = self.active_inputs[0].len();
        if x.len() != dim {
            return Err(GpError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let xq = self.norm.normalize_input(x);
        let k_u = DVector::from_iterator(
            self.active_inputs.len(),
            self.active_inputs
                .iter()
                .map(|u| self.hyperparams.eval_unchecked(&xq, u)),
        );

        let mean = k_u.dot(&self.weights);

        let z1 = self
            .l_uu
            .solve_lower_triangular(&k_u)
            .expect("stored factor is nonsingular");
        let z2 = self
            .l_a
            .solve_lower_triangular(&k_u)
            .expect("stored factor is nonsingular");
        let kxx = self.hyperparams.self_value();
        let var = (kxx - z1.norm_squared() + NOISE_VARIANCE * z2.norm_squared()).clamp(0.0, kxx);

        Ok((
            self.norm.denormalize_mean(mean),
            self.norm.denormalize_variance(var),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h_uniform(theta: f64) -> KernelHyperparams {
        KernelHyperparams::uniform(1.0, 0.0, theta)
    }

    #[test]
    fn interpolates_training_targets() {
        let d = RegressionData::raw(
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![1.0, -0.5, 0.25],
        )
        .unwrap();
        let p = fit(&d, &h_uniform(4.0), 10, 0.0).unwrap();
        for (x, y) in d.inputs().iter().zip(d.targets()) {
            let (mean, var) = p.predict(x).unwrap();
            assert_abs_diff_eq!(mean, *y, epsilon = 1e-4);
            assert!(var < 1e-6 * p.hyperparams().self_value());
        }
    }

    #[test]
    fn duplicate_inputs_with_equal_targets_fit_fine() {
        let d = RegressionData::raw(vec![vec![0.3], vec![0.3], vec![0.9]], vec![2.0, 2.0, 1.0])
            .unwrap();
        let p = fit(&d, &h_uniform(2.0), 10, 1e-10).unwrap();
        let (mean, _) = p.predict(&[0.3]).unwrap();
        assert_abs_diff_eq!(mean, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn far_queries_recover_the_prior() {
        let d = RegressionData::raw(vec![vec![0.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        let p = fit(&d, &h_uniform(1.0), 10, 0.0).unwrap();
        let (mean, var) = p.predict(&[500.0]).unwrap();
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
        assert!(var >= 0.99 * p.prior_variance());
    }

    #[test]
    fn symmetric_observations_cancel_at_the_midpoint() {
        let d = RegressionData::raw(vec![vec![-1.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        let p = fit(&d, &h_uniform(1.0), 10, 0.0).unwrap();
        let (mean, _) = p.predict(&[0.0]).unwrap();
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn query_dimension_is_checked() {
        let d = RegressionData::raw(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        let p = fit(&d, &h_uniform(1.0), 10, 1e-2).unwrap();
        assert!(p.predict(&[0.0]).is_err());
    }
}
