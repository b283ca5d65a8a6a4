//! Squared-exponential covariance with uniform, axis-aligned ARD, or
//! factor-analysis distance metrics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::GpError;

/// Distance metric Omega in the exponent (x - x')^T Omega (x - x').
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    /// Omega = theta * I.
    Uniform { theta: f64 },
    /// Omega = diag(theta_1 .. theta_d); per-dimension inverse squared
    /// lengthscales implement automatic relevance determination.
    ArdDiagonal { theta: Vec<f64> },
    /// Omega = M M^T for a d x k loading matrix. Declared for interface
    /// completeness; hyperparameter optimization does not support it.
    FactorAnalysis { loading: DMatrix<f64> },
}

impl Metric {
    /// Number of input dimensions the metric constrains, if any
    /// (`Uniform` works for any dimension).
    pub fn dim(&self) -> Option<usize> {
        match self {
            Metric::Uniform { .. } => None,
            Metric::ArdDiagonal { theta } => Some(theta.len()),
            Metric::FactorAnalysis { loading } => Some(loading.nrows()),
        }
    }

    fn squared_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Metric::Uniform { theta } => {
                theta
                    * x.iter()
                        .zip(y)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
            }
            Metric::ArdDiagonal { theta } => x
                .iter()
                .zip(y)
                .zip(theta)
                .map(|((a, b), t)| t * (a - b) * (a - b))
                .sum(),
            Metric::FactorAnalysis { loading } => {
                let k = loading.ncols();
                let mut q = 0.0;
                for col in 0..k {
                    let mut proj = 0.0;
                    for row in 0..x.len() {
                        proj += loading[(row, col)] * (x[row] - y[row]);
                    }
                    q += proj * proj;
                }
                q
            }
        }
    }
}

/// Hyperparameters of the squared-exponential covariance
/// k(x, x') = v0 exp(-0.5 (x-x')^T Omega (x-x')) + b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelHyperparams {
    pub signal_variance: f64,
    pub bias: f64,
    pub metric: Metric,
}

impl KernelHyperparams {
    pub fn uniform(signal_variance: f64, bias: f64, theta: f64) -> Self {
        Self {
            signal_variance,
            bias,
            metric: Metric::Uniform { theta },
        }
    }

    pub fn ard(signal_variance: f64, bias: f64, theta: Vec<f64>) -> Self {
        Self {
            signal_variance,
            bias,
            metric: Metric::ArdDiagonal { theta },
        }
    }

    pub fn validate(&self, input_dim: usize) -> Result<(), GpError> {
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(GpError::InvalidHyperparams(format!(
                "signal variance must be positive, got {}",
                self.signal_variance
            )));
        }
        if !(self.bias >= 0.0 && self.bias.is_finite()) {
            return Err(GpError::InvalidHyperparams(format!(
                "bias must be nonnegative, got {}",
                self.bias
            )));
        }
        match &self.metric {
            Metric::Uniform { theta } => {
                if !(*theta > 0.0 && theta.is_finite()) {
                    return Err(GpError::InvalidHyperparams(format!(
                        "uniform theta must be positive, got {theta}"
                    )));
                }
            }
            Metric::ArdDiagonal { theta } => {
                if theta.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(GpError::InvalidHyperparams(
                        "all ARD thetas must be positive".into(),
                    ));
                }
            }
            Metric::FactorAnalysis { loading } => {
                if loading.iter().any(|v| !v.is_finite()) {
                    return Err(GpError::InvalidHyperparams(
                        "factor loading must be finite".into(),
                    ));
                }
            }
        }
        if let Some(d) = self.metric.dim() {
            if d != input_dim {
                return Err(GpError::DimensionMismatch {
                    expected: d,
                    got: input_dim,
                });
            }
        }
        Ok(())
    }

    /// k(x, x) = v0 + b, independent of x.
    pub fn self_value(&self) -> f64 {
        self.signal_variance + self.bias
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let q = self.metric.squared_distance(x, y);
        self.signal_variance * (-0.5 * q).exp() + self.bias
    }
}

/// Evaluate the covariance between two points.
pub fn kernel_eval(x: &[f64], y: &[f64], h: &KernelHyperparams) -> Result<f64, GpError> {
    if x.len() != y.len() {
        return Err(GpError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    h.validate(x.len())?;
    Ok(h.eval_unchecked(x, y))
}

/// Dense Gram matrix over `rows` x `cols` (both are point lists).
pub(crate) fn gram(
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
    h: &KernelHyperparams,
) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        h.eval_unchecked(&rows[i], &cols[j])
    })
}
