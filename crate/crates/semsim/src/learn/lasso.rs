//! L1-penalized least squares by cyclic coordinate descent.
//!
//! The problem solved is the penalized form
//!
//! ```text
//! minimize (1/2n) * ||y - b0 - X th||^2 + lambda * ||th||_1
//! ```
//!
//! over an internally standardized design, with the intercept unpenalized.
//! The constraint form `||th||_1 <= C` is equivalent: each `C` corresponds
//! to some `lambda` on a monotone path, so searching a logarithmic lambda
//! grid covers the same model family.

use serde::{Deserialize, Serialize};

use super::design::{expand_interactions, expanded_len, Standardizer};
use super::LearnError;

/// A fitted L1 model over some design. `weights` live in standardized
/// coordinates; prediction replays the stored standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub standardizer: Standardizer,
}

impl LassoModel {
    /// Predicts from one design row (same layout the model was fit on).
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.weights.len());
        let mut acc = self.intercept;
        for ((w, v), (m, s)) in self.weights.iter().zip(row).zip(
            self.standardizer
                .means
                .iter()
                .zip(&self.standardizer.scales),
        ) {
            acc += w * (v - m) / s;
        }
        acc
    }

    pub fn nonzero_weights(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }
}

/// Convergence record of one coordinate-descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoDiagnostics {
    pub sweeps: usize,
    pub converged: bool,
    /// Objective value after each sweep; non-increasing by construction.
    pub objective_trace: Vec<f64>,
    /// Worst violation of the subgradient optimality conditions at exit.
    pub final_subgradient_violation: f64,
}

/// Columns whose mean square falls at or below this are skipped by the
/// solver; they arise only from zero-variance inputs whose centered values
/// are rounding noise.
const NEGLIGIBLE_COLUMN_NORM: f64 = 1e-20;

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// `(1/n) * X_col . v`, shared by the solver and [`lasso_lambda_max`] so
/// the shrinkage threshold is computed with bit-identical arithmetic.
fn column_dot_over_n(xs: &[Vec<f64>], col: usize, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (row, vi) in xs.iter().zip(v) {
        acc += row[col] * vi;
    }
    acc / xs.len() as f64
}

fn validate(
    rows: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<usize, LearnError> {
    if rows.len() != y.len() {
        return Err(LearnError::RowTargetMismatch {
            rows: rows.len(),
            labels: y.len(),
        });
    }
    if rows.len() < 2 {
        return Err(LearnError::TooFewRows {
            got: rows.len(),
            need: 2,
        });
    }
    let width = super::check_rows(rows, "lasso design")?;
    super::check_finite(y, "lasso targets")?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(LearnError::InvalidHyperparameter {
            name: "lambda",
            value: lambda,
        });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LearnError::InvalidHyperparameter {
            name: "tol",
            value: tol,
        });
    }
    if max_sweeps == 0 {
        return Err(LearnError::InvalidHyperparameter {
            name: "max_sweeps",
            value: 0.0,
        });
    }
    Ok(width)
}

/// Smallest lambda that zeroes every coefficient on this data:
/// `max_k |X_k . (y - mean(y))| / n` over the standardized design. Fitting
/// with any `lambda >= lasso_lambda_max(..)` returns the all-zero model.
pub fn lasso_lambda_max(rows: &[Vec<f64>], y: &[f64]) -> Result<f64, LearnError> {
    let width = validate(rows, y, 0.0, 1.0, 1)?;
    let standardizer = Standardizer::fit(rows)?;
    let xs = standardizer.transform(rows);
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut best = 0.0f64;
    for k in 0..width {
        best = best.max(column_dot_over_n(&xs, k, &yc).abs());
    }
    Ok(best)
}

/// Fits the penalized L1 model by cyclic coordinate descent with
/// soft-thresholding, returning the model and its convergence record.
///
/// A sweep updates every coordinate once against the maintained residual.
/// The run stops once the largest coefficient change in a sweep drops
/// below `tol` *and* the subgradient conditions hold within `10 * tol`;
/// hitting `max_sweeps` first returns the current iterate with
/// `converged = false` and a warning.
pub fn lasso_fit_with_diagnostics(
    rows: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<(LassoModel, LassoDiagnostics), LearnError> {
    let width = validate(rows, y, lambda, tol, max_sweeps)?;
    let n = rows.len();
    let standardizer = Standardizer::fit(rows)?;
    let xs = standardizer.transform(rows);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // Second moments of the standardized columns; 1 up to rounding except
    // for zero-variance columns, which stay out of the active set.
    let col_sq: Vec<f64> = (0..width)
        .map(|k| xs.iter().map(|r| r[k] * r[k]).sum::<f64>() / n as f64)
        .collect();

    let mut theta = vec![0.0f64; width];
    let mut residual = yc.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut violation = f64::INFINITY;
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut max_delta = 0.0f64;
        for k in 0..width {
            if col_sq[k] <= NEGLIGIBLE_COLUMN_NORM {
                continue;
            }
            // z = (1/n) X_k . (residual + X_k * theta_k): the single-
            // coordinate least-squares target with the rest held fixed.
            let z = column_dot_over_n(&xs, k, &residual) + col_sq[k] * theta[k];
            let updated = soft_threshold(z, lambda) / col_sq[k];
            let delta = updated - theta[k];
            if delta != 0.0 {
                for (r, row) in residual.iter_mut().zip(&xs) {
                    *r -= row[k] * delta;
                }
                theta[k] = updated;
            }
            max_delta = max_delta.max(delta.abs());
        }

        let penalty: f64 = theta.iter().map(|t| t.abs()).sum();
        let sse: f64 = residual.iter().map(|r| r * r).sum();
        trace.push(sse / (2.0 * n as f64) + lambda * penalty);

        if max_delta < tol {
            violation = subgradient_violation(&xs, &residual, &theta, &col_sq, lambda, n);
            if violation <= 10.0 * tol {
                converged = true;
                break;
            }
        }
    }

    if !converged {
        violation = subgradient_violation(&xs, &residual, &theta, &col_sq, lambda, n);
        if violation <= 10.0 * tol {
            converged = true;
        } else {
            log::warn!(
                "lasso stopped at the {max_sweeps}-sweep cap with subgradient violation {violation:.3e}"
            );
        }
    }

    let model = LassoModel {
        intercept: y_mean,
        weights: theta,
        lambda,
        standardizer,
    };
    let diagnostics = LassoDiagnostics {
        sweeps,
        converged,
        objective_trace: trace,
        final_subgradient_violation: violation,
    };
    Ok((model, diagnostics))
}

/// [`lasso_fit_with_diagnostics`] without the convergence record.
pub fn lasso_fit(
    rows: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<LassoModel, LearnError> {
    lasso_fit_with_diagnostics(rows, y, lambda, tol, max_sweeps).map(|(model, _)| model)
}

/// Worst-case violation of the stationarity conditions: active weights
/// need `(1/n) X_k . r = lambda * sign(theta_k)`, inactive ones need
/// `|(1/n) X_k . r| <= lambda`.
fn subgradient_violation(
    xs: &[Vec<f64>],
    residual: &[f64],
    theta: &[f64],
    col_sq: &[f64],
    lambda: f64,
    _n: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..theta.len() {
        if col_sq[k] <= NEGLIGIBLE_COLUMN_NORM {
            continue;
        }
        let g = column_dot_over_n(xs, k, residual);
        let v = if theta[k] > 0.0 {
            (g - lambda).abs()
        } else if theta[k] < 0.0 {
            (g + lambda).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Predicts from base features by expanding interactions first; the model
/// must have been fit on [`expand_interactions`] rows.
pub fn lasso_predict(model: &LassoModel, x: &[f64]) -> f64 {
    assert_eq!(
        model.weights.len(),
        expanded_len(x.len()),
        "model was fit on a different design width"
    );
    model.predict_row(&expand_interactions(x))
}
