//! One-vs-one 3-class classification over binary kernel machines.

use serde::{Deserialize, Serialize};

use crate::corpus::EntailmentLabel;

use super::kernel::{KernelKind, KernelModel};
use super::smo::{self, SmoDiagnostics, SmoProblem, SMO_MAX_STEPS};
use super::LearnError;

/// Fits one binary machine on `+1`/`-1` labels. Both classes must be
/// present; one-class data is handled a level up.
pub fn svm_fit_binary(
    rows: &[Vec<f64>],
    labels: &[f64],
    c: f64,
    gamma: f64,
    tol: f64,
) -> Result<(KernelModel, SmoDiagnostics), LearnError> {
    if rows.len() != labels.len() {
        return Err(LearnError::RowTargetMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    super::check_rows(rows, "classification design")?;
    smo::check_kernel_hyper(c, gamma, tol)?;
    if labels.iter().any(|l| *l != 1.0 && *l != -1.0) {
        return Err(LearnError::NonFinite {
            what: "binary labels (must be +1 or -1)",
        });
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(LearnError::TooFewClasses);
    }

    let n = rows.len();
    let kernel = smo::kernel_matrix(rows, gamma)?;
    let solution = smo::solve(&SmoProblem {
        kernel: &kernel,
        n_samples: n,
        signs: labels.to_vec(),
        linear: vec![-1.0; n],
        c,
        tol,
        max_steps: SMO_MAX_STEPS,
    })?;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        if solution.alpha[i] != 0.0 {
            support_vectors.push(rows[i].clone());
            dual_coefs.push(solution.alpha[i] * labels[i]);
        }
    }
    let model = KernelModel {
        kind: KernelKind::SvmBinary,
        support_vectors,
        dual_coefs,
        bias: solution.bias,
        gamma,
        c,
        epsilon: 0.0,
    };
    Ok((model, solution.diagnostics))
}

/// One binary machine of the one-vs-one decomposition. A positive
/// decision votes for `positive`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMachine {
    pub positive: EntailmentLabel,
    pub negative: EntailmentLabel,
    pub model: KernelModel,
}

/// Multiclass classifier: one machine per unordered class pair, majority
/// vote with margin and class-order tie-breaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSvm {
    pub classes: Vec<EntailmentLabel>,
    pub machines: Vec<PairMachine>,
}

impl MulticlassSvm {
    /// Majority vote over the pair machines. Ties go to the larger summed
    /// signed margin, then to the earlier class in [`EntailmentLabel::ALL`]
    /// order.
    pub fn predict(&self, x: &[f64]) -> EntailmentLabel {
        let mut votes = [0usize; 3];
        let mut margins = [0.0f64; 3];
        for machine in &self.machines {
            let d = machine.model.decision(x);
            if d >= 0.0 {
                votes[machine.positive.index()] += 1;
            } else {
                votes[machine.negative.index()] += 1;
            }
            margins[machine.positive.index()] += d;
            margins[machine.negative.index()] -= d;
        }
        let mut best = 0;
        for k in 1..3 {
            if votes[k] > votes[best] || (votes[k] == votes[best] && margins[k] > margins[best]) {
                best = k;
            }
        }
        EntailmentLabel::ALL[best]
    }
}

/// Trains the three one-vs-one machines. A pair whose classes are not both
/// present in `labels` cannot discriminate; it degenerates to the constant
/// machine voting for the present class (the exact optimum of the one-class
/// primal) and a warning is logged. At least two classes must be present
/// overall.
pub fn svm_fit_multiclass(
    rows: &[Vec<f64>],
    labels: &[EntailmentLabel],
    c: f64,
    gamma: f64,
    tol: f64,
) -> Result<MulticlassSvm, LearnError> {
    if rows.len() != labels.len() {
        return Err(LearnError::RowTargetMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let mut present = [false; 3];
    for label in labels {
        present[label.index()] = true;
    }
    if present.iter().filter(|p| **p).count() < 2 {
        return Err(LearnError::TooFewClasses);
    }

    let all = EntailmentLabel::ALL;
    let mut machines = Vec::with_capacity(3);
    for a in 0..3 {
        for b in (a + 1)..3 {
            let (positive, negative) = (all[a], all[b]);
            let mut pair_rows = Vec::new();
            let mut pair_labels = Vec::new();
            for (row, label) in rows.iter().zip(labels) {
                if *label == positive {
                    pair_rows.push(row.clone());
                    pair_labels.push(1.0);
                } else if *label == negative {
                    pair_rows.push(row.clone());
                    pair_labels.push(-1.0);
                }
            }
            let model = if present[a] && present[b] {
                svm_fit_binary(&pair_rows, &pair_labels, c, gamma, tol)?.0
            } else {
                let winner = if present[a] { 1.0 } else { -1.0 };
                log::warn!(
                    "class pair {positive}/{negative} has a one-sided sample; \
                     using a constant machine"
                );
                KernelModel {
                    kind: KernelKind::SvmBinary,
                    support_vectors: vec![],
                    dual_coefs: vec![],
                    bias: winner,
                    gamma,
                    c,
                    epsilon: 0.0,
                }
            };
            machines.push(PairMachine {
                positive,
                negative,
                model,
            });
        }
    }
    Ok(MulticlassSvm {
        classes: all.to_vec(),
        machines,
    })
}
