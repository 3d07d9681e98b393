//! Gaussian kernel and the fitted kernel-machine container.

use serde::{Deserialize, Serialize};

use super::LearnError;

/// `exp(-gamma * ||a - b||^2)`, in `(0, 1]` except that extremely distant
/// points (exponent below about -745) underflow to exactly 0.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64, LearnError> {
    if a.len() != b.len() {
        return Err(LearnError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut sq = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sq += d * d;
    }
    Ok((-gamma * sq).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Svr,
    SvmBinary,
}

/// A trained support vector machine over raw feature rows.
///
/// The decision function is `sum_i dual_coefs[i] * k(sv[i], x) + bias`.
/// Each dual coefficient is bounded by the box `[-C, C]` and the
/// coefficients sum to zero, except for the degenerate one-class machine,
/// which has no support vectors and a constant decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub kind: KernelKind,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    /// SVR tube half-width; 0 and unused for classification machines.
    pub epsilon: f64,
}

impl KernelModel {
    /// Raw decision value at `x`.
    ///
    /// # Panics
    ///
    /// Panics if `x` does not match the support vectors' dimension.
    pub fn decision(&self, x: &[f64]) -> f64 {
        let mut acc = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            let k = rbf_kernel(sv, x, self.gamma)
                .expect("query dimension must match the support vectors");
            acc += coef * k;
        }
        acc
    }

    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }
}

/// Regression output clamped to the similarity scale `[1, 5]`.
pub fn predict_similarity(model: &KernelModel, x: &[f64]) -> f64 {
    model.decision(x).clamp(1.0, 5.0)
}
