//! Negative log marginal likelihood and its gradient in log-hyperparameters.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::GpError;
use crate::gp::data::RegressionData;
use crate::gp::kernel::{KernelHyperparams, Metric};

/// Fixed observation-noise floor added to every kernel diagonal, in
/// normalized target units. Transitions are deterministic; this is purely a
/// conditioning device.
pub const NOISE_VARIANCE: f64 = 1e-6;

/// First jitter level tried when a factorization fails.
pub const BASE_JITTER: f64 = 1e-8;

/// Jitter escalation stops here.
pub const MAX_JITTER: f64 = 1e-2;

/// Cholesky with x10 jitter escalation on the diagonal. Returns the factor
/// and the jitter that succeeded (0.0 when none was needed).
pub(crate) fn cholesky_with_jitter(
    mut m: DMatrix<f64>,
) -> Result<(Cholesky<f64, Dyn>, f64), GpError> {
    if let Some(c) = m.clone().cholesky() {
        return Ok((c, 0.0));
    }
    let mut attempted = Vec::new();
    let mut jitter = BASE_JITTER;
    while jitter <= MAX_JITTER * (1.0 + 1e-12) {
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        attempted.push(jitter);
        if let Some(c) = m.clone().cholesky() {
            return Ok((c, attempted.iter().sum()));
        }
        jitter *= 10.0;
    }
    Err(GpError::Factorization { attempted })
}

/// Negative log marginal likelihood of the (normalized) data under the
/// squared-exponential kernel plus the fixed noise floor, together with its
/// gradient with respect to `[log v0, log b, log theta..]`.
///
/// The gradient with respect to `log b` is defined as `b * dL/db`, which is
/// zero at `b = 0`.
pub fn neg_log_marginal_likelihood(
    data: &RegressionData,
    h: &KernelHyperparams,
) -> Result<(f64, Vec<f64>), GpError> {
    h.validate(data.dim())?;
    let x = data.normalized_inputs();
    let y = DVector::from_vec(data.normalized_targets());
    let n = x.len();

    // raw kernel matrix (no noise) is reused for the gradient terms
    let k_raw = crate::gp::kernel::gram(&x, &x, h);
    let mut k_noisy = k_raw.clone();
    for i in 0..n {
        k_noisy[(i, i)] += NOISE_VARIANCE;
    }
    let (chol, _) = cholesky_with_jitter(k_noisy)?;

    let alpha = chol.solve(&y);
    let log_det: f64 = (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum();
    let value = 0.5 * y.dot(&alpha)
        + log_det
        + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    if !value.is_finite() {
        return Err(GpError::NonFinite {
            context: "marginal likelihood",
        });
    }

    // dL/dp = 0.5 tr((K^{-1} - alpha alpha^T) dK/dp)
    let k_inv = chol.inverse();
    let m = &k_inv - &alpha * alpha.transpose();

    // k_raw - b is the exp component; v0 * d(exp component)/d(v0) equals it too
    let b = h.bias;

    let mut trace_with = |weight: &dyn Fn(usize, usize) -> f64| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += m[(i, j)] * weight(i, j);
            }
        }
        0.5 * s
    };

    let g_log_v0 = trace_with(&|i, j| k_raw[(i, j)] - b);
    let g_log_b = trace_with(&|_i, _j| b);

    let mut gradient = vec![g_log_v0, g_log_b];
    match &h.metric {
        Metric::Uniform { theta } => {
            let g = trace_with(&|i, j| {
                let d2: f64 = x[i]
                    .iter()
                    .zip(&x[j])
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                -0.5 * theta * d2 * (k_raw[(i, j)] - b)
            });
            gradient.push(g);
        }
        Metric::ArdDiagonal { theta } => {
            for (l, th) in theta.iter().enumerate() {
                let g = trace_with(&|i, j| {
                    let d = x[i][l] - x[j][l];
                    -0.5 * th * d * d * (k_raw[(i, j)] - b)
                });
                gradient.push(g);
            }
        }
        Metric::FactorAnalysis { .. } => {
            return Err(GpError::NotImplemented(
                "factor-analysis metric has no likelihood gradient",
            ));
        }
    }
    Ok((value, gradient))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_point_closed_form() {
        // n = 1, y = 0: value = 0.5 * ln(2 pi (k(x,x) + noise))
        let d = RegressionData::raw(vec![vec![0.7]], vec![0.0]).unwrap();
        let h = KernelHyperparams::uniform(1.3, 0.2, 2.0);
        let (value, _) = neg_log_marginal_likelihood(&d, &h).unwrap();
        let expected =
            0.5 * (2.0 * std::f64::consts::PI * (h.self_value() + NOISE_VARIANCE)).ln();
        assert_abs_diff_eq!(value, expected, epsilon = 1e-12);
    }

    #[test]
    fn bias_gradient_vanishes_at_zero_bias() {
        let d = RegressionData::raw(vec![vec![0.0], vec![1.0]], vec![0.5, -0.5]).unwrap();
        let h = KernelHyperparams::uniform(1.0, 0.0, 1.0);
        let (_, g) = neg_log_marginal_likelihood(&d, &h).unwrap();
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn factor_analysis_gradient_is_not_implemented() {
        let d = RegressionData::raw(vec![vec![0.0, 1.0]], vec![0.5]).unwrap();
        let h = KernelHyperparams {
            signal_variance: 1.0,
            bias: 0.0,
            metric: Metric::FactorAnalysis {
                loading: nalgebra::DMatrix::identity(2, 1),
            },
        };
        assert!(matches!(
            neg_log_marginal_likelihood(&d, &h),
            Err(GpError::NotImplemented(_))
        ));
    }
}
