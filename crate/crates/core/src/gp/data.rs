//! Training data with its normalization transform.

use serde::{Deserialize, Serialize};

use crate::error::GpError;

/// Affine normalization applied before any kernel arithmetic: inputs are
/// scaled per dimension (to [0,1] when built from bounds) and targets are
/// standardized. All kernel hyperparameters live in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    input_shift: Vec<f64>,
    input_scale: Vec<f64>,
    target_shift: f64,
    target_scale: f64,
}

impl Normalization {
    pub fn identity(dim: usize) -> Self {
        Self {
            input_shift: vec![0.0; dim],
            input_scale: vec![1.0; dim],
            target_shift: 0.0,
            target_scale: 1.0,
        }
    }

    /// Inputs map to [0,1] via the given box bounds; targets to zero mean and
    /// unit variance over `targets`. Degenerate widths fall back to identity
    /// scaling.
    pub fn from_bounds_and_targets(lower: &[f64], upper: &[f64], targets: &[f64]) -> Self {
        let input_shift = lower.to_vec();
        let input_scale = lower
            .iter()
            .zip(upper)
            .map(|(l, u)| {
                let w = u - l;
                if w > 1e-12 {
                    1.0 / w
                } else {
                    1.0
                }
            })
            .collect();
        let n = targets.len().max(1) as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let var = targets.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        Self {
            input_shift,
            input_scale,
            target_shift: mean,
            target_scale: if std > 1e-12 { std } else { 1.0 },
        }
    }

    /// Bounds taken from the data's own per-dimension min/max.
    pub fn from_data(inputs: &[Vec<f64>], targets: &[f64]) -> Self {
        let dim = inputs.first().map(|x| x.len()).unwrap_or(0);
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for x in inputs {
            for k in 0..dim {
                lower[k] = lower[k].min(x[k]);
                upper[k] = upper[k].max(x[k]);
            }
        }
        Self::from_bounds_and_targets(&lower, &upper, targets)
    }

    pub fn normalize_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(k, v)| (v - self.input_shift[k]) * self.input_scale[k])
            .collect()
    }

    pub fn normalize_target(&self, y: f64) -> f64 {
        (y - self.target_shift) / self.target_scale
    }

    pub fn denormalize_mean(&self, y: f64) -> f64 {
        y * self.target_scale + self.target_shift
    }

    pub fn denormalize_variance(&self, v: f64) -> f64 {
        v * self.target_scale * self.target_scale
    }

    pub fn target_scale(&self) -> f64 {
        self.target_scale
    }
}

/// A univariate regression problem: n input points with scalar targets in
/// their original units, plus the transform used internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionData {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    norm: Normalization,
}

impl RegressionData {
    /// Identity normalization; hyperparameters refer to the raw units.
    pub fn raw(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, GpError> {
        let dim = inputs.first().map(|x| x.len()).unwrap_or(0);
        Self::with_normalization(inputs, targets, Normalization::identity(dim))
    }

    /// Inputs scaled to [0,1] by the given box bounds, targets standardized.
    pub fn with_input_bounds(
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        lower: &[f64],
        upper: &[f64],
    ) -> Result<Self, GpError> {
        let norm = Normalization::from_bounds_and_targets(lower, upper, &targets);
        Self::with_normalization(inputs, targets, norm)
    }

    /// Inputs scaled by their own min/max box, targets standardized.
    pub fn from_data(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, GpError> {
        let norm = Normalization::from_data(&inputs, &targets);
        Self::with_normalization(inputs, targets, norm)
    }

    pub fn with_normalization(
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        norm: Normalization,
    ) -> Result<Self, GpError> {
        if inputs.is_empty() || targets.is_empty() {
            return Err(GpError::EmptyData);
        }
        if inputs.len() != targets.len() {
            return Err(GpError::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        let dim = inputs[0].len();
        if dim == 0 || inputs.iter().any(|x| x.len() != dim) {
            return Err(GpError::DimensionMismatch {
                expected: dim,
                got: 0,
            });
        }
        if inputs.iter().flatten().any(|v| !v.is_finite())
            || targets.iter().any(|v| !v.is_finite())
        {
            return Err(GpError::NonFinite {
                context: "regression data",
            });
        }
        Ok(Self {
            inputs,
            targets,
            norm,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn normalization(&self) -> &Normalization {
        &self.norm
    }

    /// Training inputs in normalized units.
    pub fn normalized_inputs(&self) -> Vec<Vec<f64>> {
        self.inputs
            .iter()
            .map(|x| self.norm.normalize_input(x))
            .collect()
    }

    /// Training targets in normalized units.
    pub fn normalized_targets(&self) -> Vec<f64> {
        self.targets
            .iter()
            .map(|&y| self.norm.normalize_target(y))
            .collect()
    }

    /// A subset of the points, keeping the parent's normalization.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, GpError> {
        let inputs = indices.iter().map(|&i| self.inputs[i].clone()).collect();
        let targets = indices.iter().map(|&i| self.targets[i]).collect();
        Self::with_normalization(inputs, targets, self.norm.clone())
    }
}
