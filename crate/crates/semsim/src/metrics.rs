//! Evaluation measures and the bag-of-words reference baseline.
//!
//! Two prediction tasks are scored here: real-valued similarity on the
//! 1–5 scale (Pearson correlation and mean squared error) and three-way
//! entailment classification (accuracy and per-class/macro F1). A
//! term-frequency cosine baseline provides a floor reference for the
//! similarity task; correlation scores it directly, while squared-error
//! reporting first maps the cosines onto the similarity scale with a
//! least-squares affine fit.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{tokenize, Dataset, EntailmentLabel, SentencePair};

/// Errors produced by the evaluation routines.
#[derive(Debug, Error)]
pub enum MetricsError {
    /// Prediction and gold sequences differ in length.
    #[error("prediction/gold length mismatch: {pred} predictions vs {gold} gold values")]
    LengthMismatch { pred: usize, gold: usize },
    /// Too few samples for the requested measure.
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    /// Pearson correlation is undefined when an input is constant.
    #[error("undefined correlation: {which} values are constant")]
    ConstantInput { which: &'static str },
    /// A non-finite value was found in the input.
    #[error("{which} contains a non-finite value")]
    NonFinite { which: &'static str },
}

fn check_lengths(pred: usize, gold: usize, need: usize) -> Result<usize, MetricsError> {
    if pred != gold {
        return Err(MetricsError::LengthMismatch { pred, gold });
    }
    if pred < need {
        return Err(MetricsError::TooFewSamples { got: pred, need });
    }
    Ok(pred)
}

fn check_finite(values: &[f64], which: &'static str) -> Result<(), MetricsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(MetricsError::NonFinite { which })
    }
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Sample Pearson correlation between predictions and gold scores.
///
/// Two-pass computation: means first, then centred second moments. The
/// result is clamped to [-1, 1] to absorb the last-ulp excursions of the
/// final division. Constant inputs have no defined correlation and are
/// rejected rather than silently returning NaN; the exact-equality scan
/// catches them even when rounding of the mean would leave the centred
/// sum of squares marginally positive.
pub fn pearson(pred: &[f64], gold: &[f64]) -> Result<f64, MetricsError> {
    let n = check_lengths(pred.len(), gold.len(), 2)?;
    check_finite(pred, "pred")?;
    check_finite(gold, "gold")?;
    if is_constant(pred) {
        return Err(MetricsError::ConstantInput { which: "pred" });
    }
    if is_constant(gold) {
        return Err(MetricsError::ConstantInput { which: "gold" });
    }
    let mean_p = pred.iter().sum::<f64>() / n as f64;
    let mean_g = gold.iter().sum::<f64>() / n as f64;
    let mut spg = 0.0;
    let mut spp = 0.0;
    let mut sgg = 0.0;
    for (&p, &g) in pred.iter().zip(gold) {
        let dp = p - mean_p;
        let dg = g - mean_g;
        spg += dp * dg;
        spp += dp * dp;
        sgg += dg * dg;
    }
    let denom = spp.sqrt() * sgg.sqrt();
    if denom == 0.0 {
        // Inputs vary by less than f64 can resolve around their mean.
        let which = if spp <= sgg { "pred" } else { "gold" };
        return Err(MetricsError::ConstantInput { which });
    }
    Ok((spg / denom).clamp(-1.0, 1.0))
}

/// Mean squared error between predictions and gold scores.
pub fn mse(pred: &[f64], gold: &[f64]) -> Result<f64, MetricsError> {
    let n = check_lengths(pred.len(), gold.len(), 1)?;
    check_finite(pred, "pred")?;
    check_finite(gold, "gold")?;
    let sum: f64 = pred
        .iter()
        .zip(gold)
        .map(|(&p, &g)| (p - g) * (p - g))
        .sum();
    Ok(sum / n as f64)
}

/// Fraction of exactly matching class predictions, in [0, 1].
pub fn accuracy(pred: &[EntailmentLabel], gold: &[EntailmentLabel]) -> Result<f64, MetricsError> {
    let n = check_lengths(pred.len(), gold.len(), 1)?;
    let correct = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / n as f64)
}

/// 3x3 confusion counts indexed `[gold][pred]` in [`EntailmentLabel::ALL`]
/// order. The matrix trace divided by the pair count equals [`accuracy`].
pub fn confusion_matrix(
    pred: &[EntailmentLabel],
    gold: &[EntailmentLabel],
) -> Result<[[usize; 3]; 3], MetricsError> {
    check_lengths(pred.len(), gold.len(), 1)?;
    let mut counts = [[0usize; 3]; 3];
    for (p, g) in pred.iter().zip(gold) {
        counts[g.index()][p.index()] += 1;
    }
    Ok(counts)
}

/// Per-class and macro-averaged F1 over the three entailment classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Scores {
    /// F1 per class in [`EntailmentLabel::ALL`] order.
    pub per_class: [f64; 3],
    /// Unweighted mean of the per-class scores.
    pub macro_f1: f64,
}

/// Per-class F1 = 2PR/(P+R), defined as 0 whenever P + R = 0 (and each of
/// precision and recall is itself 0 on an empty denominator), so a class
/// absent from both sequences scores 0 instead of poisoning the report
/// with NaN. The macro score is the unweighted mean over all three
/// classes, whether or not they occur.
pub fn f1(pred: &[EntailmentLabel], gold: &[EntailmentLabel]) -> Result<F1Scores, MetricsError> {
    let counts = confusion_matrix(pred, gold)?;
    let mut per_class = [0.0f64; 3];
    for (c, slot) in per_class.iter_mut().enumerate() {
        let tp = counts[c][c];
        let predicted: usize = (0..3).map(|g| counts[g][c]).sum();
        let actual: usize = counts[c].iter().sum();
        let precision = if predicted == 0 {
            0.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = if actual == 0 {
            0.0
        } else {
            tp as f64 / actual as f64
        };
        *slot = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
    }
    let macro_f1 = per_class.iter().sum::<f64>() / 3.0;
    Ok(F1Scores {
        per_class,
        macro_f1,
    })
}

fn term_frequencies(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for token in tokenize(text) {
        *tf.entry(token).or_insert(0.0) += 1.0;
    }
    tf
}

/// Cosine similarity between the term-frequency vectors of the two sides
/// of a pair. A side with no tokens is the zero vector and scores 0 by
/// convention. The ordered map keeps the summation order, and therefore
/// the result, independent of hashing.
pub fn bow_cosine(pair: &SentencePair) -> f64 {
    let tf_t = term_frequencies(&pair.text_t);
    let tf_h = term_frequencies(&pair.text_h);
    let dot: f64 = tf_t
        .iter()
        .filter_map(|(token, &wt)| tf_h.get(token).map(|&wh| wt * wh))
        .sum();
    let norm_t = tf_t.values().map(|w| w * w).sum::<f64>().sqrt();
    let norm_h = tf_h.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm_t == 0.0 || norm_h == 0.0 {
        return 0.0;
    }
    (dot / (norm_t * norm_h)).clamp(-1.0, 1.0)
}

/// Term-frequency cosine for every pair of a dataset, in corpus order.
/// Scored against gold similarity by correlation directly; for squared
/// error, map the cosines through an [`AffineMap`] fitted on training
/// data first.
pub fn bow_baseline_similarity(data: &Dataset) -> Vec<f64> {
    data.pairs.iter().map(bow_cosine).collect()
}

/// Least-squares affine map `x -> slope * x + intercept`, used to put
/// baseline cosines on the 1–5 similarity scale before computing squared
/// error (correlation is invariant to it and needs no mapping).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineMap {
    /// Fit by ordinary least squares. A constant input has no unique
    /// solution and degenerates to the best constant predictor: slope 0,
    /// intercept at the target mean.
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self, MetricsError> {
        let n = check_lengths(x.len(), y.len(), 2)?;
        check_finite(x, "x")?;
        check_finite(y, "y")?;
        let mean_x = x.iter().sum::<f64>() / n as f64;
        let mean_y = y.iter().sum::<f64>() / n as f64;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (&xi, &yi) in x.iter().zip(y) {
            let dx = xi - mean_x;
            sxx += dx * dx;
            sxy += dx * (yi - mean_y);
        }
        let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
        Ok(AffineMap {
            slope,
            intercept: mean_y - slope * mean_x,
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Bundle of evaluation measures over one prediction run.
///
/// The similarity section (`pearson`, `mse`) and the classification
/// section (`accuracy`, `f1_per_class`, `f1_macro`) are each present only
/// when the corresponding predictions were scored; `n` counts the scored
/// pairs. Assembly is a pure function of the prediction and gold
/// sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub pearson: Option<f64>,
    pub mse: Option<f64>,
    /// Fraction of exact matches in [0, 1]; rendered as a percentage.
    pub accuracy: Option<f64>,
    /// Per-class F1 in [`EntailmentLabel::ALL`] order.
    pub f1_per_class: Option<[f64; 3]>,
    pub f1_macro: Option<f64>,
    pub n: usize,
}

/// Flat serialization layout of an [`EvalReport`]; field order is the
/// key order of the emitted document.
#[derive(Serialize)]
struct ReportDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pearson: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1_none: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1_entailment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1_paraphrase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1_macro: Option<f64>,
    n: usize,
}

impl EvalReport {
    /// Score real-valued similarity predictions against gold scores.
    pub fn for_similarity(pred: &[f64], gold: &[f64]) -> Result<Self, MetricsError> {
        Ok(EvalReport {
            pearson: Some(pearson(pred, gold)?),
            mse: Some(mse(pred, gold)?),
            accuracy: None,
            f1_per_class: None,
            f1_macro: None,
            n: pred.len(),
        })
    }

    /// Score entailment class predictions against gold labels.
    pub fn for_entailment(
        pred: &[EntailmentLabel],
        gold: &[EntailmentLabel],
    ) -> Result<Self, MetricsError> {
        let scores = f1(pred, gold)?;
        Ok(EvalReport {
            pearson: None,
            mse: None,
            accuracy: Some(accuracy(pred, gold)?),
            f1_per_class: Some(scores.per_class),
            f1_macro: Some(scores.macro_f1),
            n: pred.len(),
        })
    }

    /// Accuracy as a percentage rounded to two decimals (e.g. 81.65).
    pub fn accuracy_pct(&self) -> Option<f64> {
        self.accuracy.map(|a| (a * 10_000.0).round() / 100.0)
    }

    /// Flat JSON document with keys `pearson`, `mse`, `accuracy_pct`,
    /// `f1_none`, `f1_entailment`, `f1_paraphrase`, `f1_macro`, `n`;
    /// absent sections are omitted. Ends with a newline.
    pub fn to_json_string(&self) -> String {
        let f1 = self.f1_per_class;
        let doc = ReportDocument {
            pearson: self.pearson,
            mse: self.mse,
            accuracy_pct: self.accuracy_pct(),
            f1_none: f1.map(|v| v[0]),
            f1_entailment: f1.map(|v| v[1]),
            f1_paraphrase: f1.map(|v| v[2]),
            f1_macro: self.f1_macro,
            n: self.n,
        };
        let mut out =
            serde_json::to_string_pretty(&doc).expect("flat report document always serializes");
        out.push('\n');
        out
    }
}
