//! Epsilon-tube support vector regression.

use super::kernel::{KernelKind, KernelModel};
use super::smo::{self, SmoDiagnostics, SmoProblem, SMO_MAX_STEPS};
use super::LearnError;

fn validate(
    rows: &[Vec<f64>],
    y: &[f64],
    c: f64,
    epsilon: f64,
    gamma: f64,
    tol: f64,
) -> Result<(), LearnError> {
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
    super::check_rows(rows, "regression design")?;
    super::check_finite(y, "regression targets")?;
    smo::check_kernel_hyper(c, gamma, tol)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(LearnError::InvalidHyperparameter {
            name: "epsilon",
            value: epsilon,
        });
    }
    Ok(())
}

/// Fits the regressor and returns the solver's exit record along with the
/// model. The dual has two variables per sample (one per tube side); the
/// published coefficient of sample `i` is their signed difference, so it
/// lies in `[-C, C]` and the coefficients sum to zero.
pub fn svr_fit_with_diagnostics(
    rows: &[Vec<f64>],
    y: &[f64],
    c: f64,
    epsilon: f64,
    gamma: f64,
    tol: f64,
) -> Result<(KernelModel, SmoDiagnostics), LearnError> {
    validate(rows, y, c, epsilon, gamma, tol)?;
    let n = rows.len();
    let kernel = smo::kernel_matrix(rows, gamma)?;

    let mut signs = vec![1.0; 2 * n];
    signs[n..].fill(-1.0);
    let mut linear = Vec::with_capacity(2 * n);
    linear.extend(y.iter().map(|yi| epsilon - yi));
    linear.extend(y.iter().map(|yi| epsilon + yi));

    let solution = smo::solve(&SmoProblem {
        kernel: &kernel,
        n_samples: n,
        signs,
        linear,
        c,
        tol,
        max_steps: SMO_MAX_STEPS,
    })?;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        let coef = solution.alpha[i] - solution.alpha[i + n];
        if coef != 0.0 {
            support_vectors.push(rows[i].clone());
            dual_coefs.push(coef);
        }
    }
    let model = KernelModel {
        kind: KernelKind::Svr,
        support_vectors,
        dual_coefs,
        bias: solution.bias,
        gamma,
        c,
        epsilon,
    };
    Ok((model, solution.diagnostics))
}

/// [`svr_fit_with_diagnostics`] without the exit record.
pub fn svr_fit(
    rows: &[Vec<f64>],
    y: &[f64],
    c: f64,
    epsilon: f64,
    gamma: f64,
    tol: f64,
) -> Result<KernelModel, LearnError> {
    svr_fit_with_diagnostics(rows, y, c, epsilon, gamma, tol).map(|(model, _)| model)
}

/// Worst violation of the regression optimality conditions over the
/// training set, using the per-sample duals from the exit record:
///
/// * coefficient at `+C`: residual `y - f` may exceed `epsilon`;
/// * in `(0, C)`: residual equals `epsilon`;
/// * zero: residual within the tube;
/// * mirrored for the negative side.
pub fn svr_kkt_violation(
    model: &KernelModel,
    rows: &[Vec<f64>],
    y: &[f64],
    diagnostics: &SmoDiagnostics,
) -> f64 {
    let n = rows.len();
    assert_eq!(
        diagnostics.alpha.len(),
        2 * n,
        "exit record does not match data"
    );
    let mut worst = 0.0f64;
    for i in 0..n {
        let coef = diagnostics.alpha[i] - diagnostics.alpha[i + n];
        let residual = y[i] - model.decision(&rows[i]);
        let v = if coef >= model.c {
            model.epsilon - residual
        } else if coef > 0.0 {
            (residual - model.epsilon).abs()
        } else if coef == 0.0 {
            residual.abs() - model.epsilon
        } else if coef > -model.c {
            (residual + model.epsilon).abs()
        } else {
            residual + model.epsilon
        };
        worst = worst.max(v);
    }
    worst
}
