//! Design-matrix helpers: two-way interaction expansion and column
//! standardization.

use serde::{Deserialize, Serialize};

use super::LearnError;

/// Width of the expanded design for `k` base features: the features plus
/// every unordered product, `k + k(k-1)/2`. With an intercept that is
/// `k + 1 + (k-1)k/2` parameters; 121 for the 15-feature layout.
pub fn expanded_len(k: usize) -> usize {
    k + k * k.saturating_sub(1) / 2
}

/// Appends all two-way interaction products to a feature row: the base
/// features in order, then `x[l] * x[m]` for `l < m` in row-major order.
pub fn expand_interactions(x: &[f64]) -> Vec<f64> {
    let k = x.len();
    let mut out = Vec::with_capacity(expanded_len(k));
    out.extend_from_slice(x);
    for l in 0..k {
        for m in (l + 1)..k {
            out.push(x[l] * x[m]);
        }
    }
    out
}

/// Per-column centering and scaling parameters, fit once on training rows
/// and replayed verbatim at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

/// Scales at or below this fraction of the column magnitude are treated as
/// zero variance: the column is centered but not scaled, so constant
/// columns cannot amplify rounding noise into the design.
const ZERO_VARIANCE_RELATIVE: f64 = 1e-12;

impl Standardizer {
    /// Computes per-column mean and population standard deviation.
    /// Zero-variance columns get scale 1.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, LearnError> {
        if rows.len() < 2 {
            return Err(LearnError::TooFewRows {
                got: rows.len(),
                need: 2,
            });
        }
        let width = super::check_rows(rows, "design matrix")?;
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut scales = vec![0.0; width];
        for row in rows {
            for ((s, m), v) in scales.iter_mut().zip(&means).zip(row) {
                let d = v - m;
                *s += d * d;
            }
        }
        for (s, m) in scales.iter_mut().zip(&means) {
            let std = (*s / n).sqrt();
            *s = if std > ZERO_VARIANCE_RELATIVE * (1.0 + m.abs()) {
                std
            } else {
                1.0
            };
        }
        Ok(Standardizer { means, scales })
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    /// Centers and scales one row with the stored parameters.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.width());
        row.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}
