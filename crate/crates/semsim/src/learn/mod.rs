//! The three learners and their model selection.
//!
//! * [`lasso`]: L1-penalized least squares over the two-way interaction
//!   expansion of the base features, solved by coordinate descent.
//! * [`svr`] and [`svm`]: Gaussian-kernel support vector machines for
//!   regression and one-vs-one 3-class classification, both solved by the
//!   same sequential-minimal-optimization core in [`smo`].
//! * [`grid`]: seeded five-fold cross validation over parameter grids.
//!
//! Training is deterministic: the only randomness is the fold shuffle,
//! which is driven entirely by the caller's seed.

pub mod design;
pub mod grid;
pub mod kernel;
pub mod lasso;
pub mod smo;
pub mod svm;
pub mod svr;

pub use design::{expand_interactions, expanded_len, Standardizer};
pub use grid::{
    cv_partition, default_c_grid, default_epsilon_grid, default_gamma_grid, default_lambda_grid,
    grid_search_cv, GridSearchResult,
};
pub use kernel::{predict_similarity, rbf_kernel, KernelKind, KernelModel};
pub use lasso::{
    lasso_fit, lasso_fit_with_diagnostics, lasso_lambda_max, lasso_predict, LassoDiagnostics,
    LassoModel,
};
pub use smo::SmoDiagnostics;
pub use svm::{svm_fit_multiclass, MulticlassSvm};
pub use svr::{svr_fit, svr_fit_with_diagnostics, svr_kkt_violation};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("design has {rows} rows but {labels} targets")]
    RowTargetMismatch { rows: usize, labels: usize },
    #[error("rows have inconsistent widths: {first} vs {other}")]
    RaggedRows { first: usize, other: usize },
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { got: usize, need: usize },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("hyperparameter {name} = {value} is out of range")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("optimizer hit the {iterations}-step cap with violation {violation:.3e}")]
    DidNotConverge { iterations: usize, violation: f64 },
    #[error("training labels contain fewer than 2 classes")]
    TooFewClasses,
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("cannot split {n} samples into {folds} folds")]
    TooFewSamplesForFolds { n: usize, folds: usize },
}

/// Shared row validation: equal lengths, equal widths, all finite.
pub(crate) fn check_rows(rows: &[Vec<f64>], what: &'static str) -> Result<usize, LearnError> {
    let width = rows.first().map(Vec::len).unwrap_or(0);
    for row in rows {
        if row.len() != width {
            return Err(LearnError::RaggedRows {
                first: width,
                other: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite { what });
        }
    }
    Ok(width)
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<(), LearnError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite { what });
    }
    Ok(())
}
