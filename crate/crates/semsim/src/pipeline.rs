//! End-to-end orchestration: feature matrices, cross-validated training,
//! prediction, evaluation by pair id, and the on-disk formats that tie the
//! stages together.
//!
//! Everything here is deterministic given the inputs and the seed: feature
//! extraction parallelizes over pairs but collects in corpus order, grid
//! search scores candidates in a fixed order, and all emitted files
//! (models, feature dumps, predictions, reports) are written atomically
//! with stable formatting so repeated runs are byte-identical.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, Dataset, EntailmentLabel, IdfModel, SentencePair};
use crate::embeddings::{load_word2vec_binary, load_word2vec_text, EmbeddingError, EmbeddingTable};
use crate::features::{extract_features, FEATURE_COUNT, FEATURE_NAMES};
use crate::learn::{
    default_c_grid, default_epsilon_grid, default_gamma_grid, default_lambda_grid,
    expand_interactions, grid_search_cv, lasso_fit, lasso_lambda_max, lasso_predict,
    predict_similarity, svm_fit_multiclass, svr_fit, GridSearchResult, KernelModel, LassoModel,
    LearnError, MulticlassSvm,
};
use crate::metrics::{accuracy, pearson, EvalReport, MetricsError};

/// Version tag of the model file layout.
pub const MODEL_FORMAT_VERSION: u32 = 1;
/// Folds used for hyperparameter selection unless overridden.
pub const DEFAULT_FOLDS: usize = 5;
/// Default seed for every random choice in the pipeline.
pub const DEFAULT_SEED: u64 = 42;

/// Coordinate-descent stopping tolerance used by the training commands.
const LASSO_TOL: f64 = 1e-6;
/// Sweep budget for one coordinate-descent run.
const LASSO_MAX_SWEEPS: usize = 10_000;
/// Working-set stopping tolerance for the kernel machines.
const SMO_TOL: f64 = 1e-3;

/// Errors from any pipeline stage, each mapped to a stable category
/// string for one-line machine-parsable reporting.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embeddings(#[from] EmbeddingError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("embeddings {path} unreadable; as text: {text_error}; as binary: {binary_error}")]
    EmbeddingFormat {
        path: PathBuf,
        text_error: EmbeddingError,
        binary_error: EmbeddingError,
    },
    #[error("model file: {detail}")]
    ModelFormat { detail: String },
    #[error("pair {id} has no {what} label, required for task {task}")]
    Unlabeled {
        id: String,
        what: &'static str,
        task: Task,
    },
    #[error("no prediction for pair {id}")]
    MissingPrediction { id: String },
    #[error("prediction for pair {id} which is not in the gold data")]
    UnknownPrediction { id: String },
    #[error("duplicate prediction for pair {id}")]
    DuplicatePrediction { id: String },
    #[error("predictions share no fully labeled section with the gold data")]
    NothingToScore,
    #[error("dataset contains no pairs")]
    EmptyDataset,
    #[error("task {task} is incompatible with learner {learner}")]
    TaskLearnerMismatch { task: Task, learner: Learner },
    #[error("grid key {key} does not apply to learner {learner}")]
    UnknownGridKey { key: String, learner: Learner },
    #[error("grid values for {key} are invalid: {detail}")]
    BadGridValues { key: &'static str, detail: String },
    #[error("{detail}")]
    Config { detail: String },
}

impl PipelineError {
    /// Stable category slug, printed as `error[<category>]: ...` by the
    /// command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            PipelineError::Corpus(_) => "corpus",
            PipelineError::Embeddings(_) | PipelineError::EmbeddingFormat { .. } => "embeddings",
            PipelineError::Learn(_) => "learn",
            PipelineError::Metrics(_) => "metrics",
            PipelineError::Io { .. } => "io",
            PipelineError::Csv { .. } | PipelineError::Malformed { .. } => "format",
            PipelineError::ModelFormat { .. } => "model-format",
            PipelineError::Unlabeled { .. } | PipelineError::NothingToScore => "unlabeled-data",
            PipelineError::EmptyDataset => "corpus",
            PipelineError::MissingPrediction { .. }
            | PipelineError::UnknownPrediction { .. }
            | PipelineError::DuplicatePrediction { .. } => "id-mismatch",
            PipelineError::TaskLearnerMismatch { .. }
            | PipelineError::UnknownGridKey { .. }
            | PipelineError::BadGridValues { .. }
            | PipelineError::Config { .. } => "config",
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Prediction target of a model or command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Real-valued relatedness on the 1–5 scale.
    Similarity,
    /// Three-way entailment classification.
    Entailment,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Similarity => "similarity",
            Task::Entailment => "entailment",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "similarity" => Ok(Task::Similarity),
            "entailment" => Ok(Task::Entailment),
            other => Err(format!(
                "unknown task {other:?}; expected similarity or entailment"
            )),
        }
    }
}

/// Training algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Learner {
    /// L1-penalized linear regression over two-way feature interactions.
    Lasso,
    /// RBF-kernel support vector regression on the raw features.
    Svr,
    /// One-vs-one RBF-kernel classification on the raw features.
    Svm,
}

impl Learner {
    pub fn as_str(self) -> &'static str {
        match self {
            Learner::Lasso => "lasso",
            Learner::Svr => "svr",
            Learner::Svm => "svm",
        }
    }

    /// The task this learner produces predictions for.
    pub fn task(self) -> Task {
        match self {
            Learner::Lasso | Learner::Svr => Task::Similarity,
            Learner::Svm => Task::Entailment,
        }
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Learner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lasso" => Ok(Learner::Lasso),
            "svr" => Ok(Learner::Svr),
            "svm" => Ok(Learner::Svm),
            other => Err(format!(
                "unknown learner {other:?}; expected lasso, svr or svm"
            )),
        }
    }
}

/// A fitted model of any of the three learners, tagged for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum TrainedModel {
    Lasso(LassoModel),
    Svr(KernelModel),
    Svm(MulticlassSvm),
}

impl TrainedModel {
    pub fn kind(&self) -> Learner {
        match self {
            TrainedModel::Lasso(_) => Learner::Lasso,
            TrainedModel::Svr(_) => Learner::Svr,
            TrainedModel::Svm(_) => Learner::Svm,
        }
    }

    pub fn task(&self) -> Task {
        self.kind().task()
    }
}

/// On-disk model: the fitted learner plus everything prediction needs —
/// the document-frequency model the features were extracted with and the
/// feature layout, versioned for forward compatibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub task: Task,
    pub feature_names: Vec<String>,
    pub idf: IdfModel,
    #[serde(flatten)]
    pub model: TrainedModel,
}

impl ModelFile {
    /// Bundles a fitted model with its IDF table under the current layout.
    pub fn new(model: TrainedModel, idf: IdfModel) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            task: model.task(),
            feature_names: FEATURE_NAMES.iter().map(|n| n.to_string()).collect(),
            idf,
            model,
        }
    }

    /// Checks version, feature layout, task/kind agreement, and that the
    /// stored coefficient shapes fit that layout, so later prediction
    /// cannot panic on a malformed file.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |detail: String| Err(PipelineError::ModelFormat { detail });
        if self.format_version != MODEL_FORMAT_VERSION {
            return fail(format!(
                "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            ));
        }
        if self.feature_names != FEATURE_NAMES {
            return fail("feature_names do not match this build's feature layout".into());
        }
        if self.task != self.model.task() {
            return fail(format!(
                "task {} does not match model kind {}",
                self.task,
                self.model.kind()
            ));
        }
        let expanded = crate::learn::expanded_len(FEATURE_COUNT);
        match &self.model {
            TrainedModel::Lasso(m) => {
                if m.weights.len() != expanded
                    || m.standardizer.means.len() != expanded
                    || m.standardizer.scales.len() != expanded
                {
                    return fail(format!(
                        "lasso coefficient width {} does not match the expanded design ({expanded})",
                        m.weights.len()
                    ));
                }
            }
            TrainedModel::Svr(m) => validate_kernel_widths(m, "svr")?,
            TrainedModel::Svm(m) => {
                for machine in &m.machines {
                    validate_kernel_widths(&machine.model, "svm")?;
                }
            }
        }
        Ok(())
    }
}

fn validate_kernel_widths(model: &KernelModel, kind: &str) -> Result<(), PipelineError> {
    if model.support_vectors.len() != model.dual_coefs.len() {
        return Err(PipelineError::ModelFormat {
            detail: format!(
                "{kind} model has {} support vectors but {} coefficients",
                model.support_vectors.len(),
                model.dual_coefs.len()
            ),
        });
    }
    if let Some(sv) = model
        .support_vectors
        .iter()
        .find(|sv| sv.len() != FEATURE_COUNT)
    {
        return Err(PipelineError::ModelFormat {
            detail: format!(
                "{kind} support vector width {} does not match the feature count {FEATURE_COUNT}",
                sv.len()
            ),
        });
    }
    Ok(())
}

/// One scored pair: the id plus whichever outputs the model produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub similarity: Option<f64>,
    pub entailment: Option<EntailmentLabel>,
}

/// Per-candidate entry of a cross-validation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCandidate {
    /// Hyperparameter values by name.
    pub params: BTreeMap<String, f64>,
    /// Mean validation score across folds.
    pub mean_score: f64,
}

/// Full record of one grid search: every candidate with its score, plus
/// the index of the winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub task: Task,
    pub learner: Learner,
    /// Validation measure the candidates were ranked by.
    pub metric: String,
    pub folds: usize,
    pub seed: u64,
    pub best_index: usize,
    pub candidates: Vec<CvCandidate>,
}

/// Optional replacement value lists for the hyperparameter grids. Keys
/// not listed keep their built-in defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSpec {
    pub c: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
}

impl GridSpec {
    fn check_keys(&self, learner: Learner) -> Result<(), PipelineError> {
        let reject = |key: &str| {
            Err(PipelineError::UnknownGridKey {
                key: key.to_string(),
                learner,
            })
        };
        match learner {
            Learner::Lasso => {
                if self.c.is_some() {
                    return reject("c");
                }
                if self.gamma.is_some() {
                    return reject("gamma");
                }
                if self.epsilon.is_some() {
                    return reject("epsilon");
                }
            }
            Learner::Svr => {
                if self.lambda.is_some() {
                    return reject("lambda");
                }
            }
            Learner::Svm => {
                if self.lambda.is_some() {
                    return reject("lambda");
                }
                if self.epsilon.is_some() {
                    return reject("epsilon");
                }
            }
        }
        Ok(())
    }
}

fn check_grid_values(
    key: &'static str,
    values: &[f64],
    allow_zero: bool,
) -> Result<(), PipelineError> {
    let fail = |detail: &str| {
        Err(PipelineError::BadGridValues {
            key,
            detail: detail.to_string(),
        })
    };
    if values.is_empty() {
        return fail("empty value list");
    }
    if values.iter().any(|v| !v.is_finite()) {
        return fail("non-finite value");
    }
    if allow_zero {
        if values.iter().any(|v| *v < 0.0) {
            return fail("negative value");
        }
    } else if values.iter().any(|v| *v <= 0.0) {
        return fail("value must be positive");
    }
    Ok(())
}

/// Everything `train` needs besides the data: the task/learner pair, the
/// cross-validation shape, and any grid overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub task: Task,
    pub learner: Learner,
    pub seed: u64,
    pub folds: usize,
    pub grid: GridSpec,
}

impl TrainConfig {
    /// Defaults (5 folds, seed 42, built-in grids) for a learner's task.
    pub fn for_learner(learner: Learner) -> Self {
        TrainConfig {
            task: learner.task(),
            learner,
            seed: DEFAULT_SEED,
            folds: DEFAULT_FOLDS,
            grid: GridSpec::default(),
        }
    }
}

/// Feature vectors for every pair, in corpus order. Extraction runs in
/// parallel; the collected order is the pair order regardless.
pub fn feature_matrix(data: &Dataset, emb: &EmbeddingTable, idf: &IdfModel) -> Vec<Vec<f64>> {
    data.pairs
        .par_iter()
        .map(|pair| extract_features(pair, emb, idf).values.to_vec())
        .collect()
}

fn similarity_targets(data: &Dataset) -> Result<Vec<f64>, PipelineError> {
    data.pairs
        .iter()
        .map(|p| {
            p.similarity.ok_or_else(|| PipelineError::Unlabeled {
                id: p.id.clone(),
                what: "similarity",
                task: Task::Similarity,
            })
        })
        .collect()
}

fn entailment_targets(data: &Dataset) -> Result<Vec<EntailmentLabel>, PipelineError> {
    data.pairs
        .iter()
        .map(|p| {
            p.entailment.ok_or_else(|| PipelineError::Unlabeled {
                id: p.id.clone(),
                what: "entailment",
                task: Task::Entailment,
            })
        })
        .collect()
}

fn subset_rows(rows: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| rows[i].clone()).collect()
}

fn subset<T: Copy>(values: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| values[i]).collect()
}

fn clamp_similarity(value: f64) -> f64 {
    value.clamp(1.0, 5.0)
}

/// Validation-fold score for similarity models: Pearson correlation of
/// the clamped predictions, or 0 when the fold leaves it undefined (for
/// example a constant-gold fold) or the fit fails, which simply ranks the
/// candidate behind any that works.
fn fold_pearson(pred: &[f64], gold: &[f64]) -> f64 {
    pearson(pred, gold).unwrap_or(0.0)
}

fn report_from_search<P>(
    config: &TrainConfig,
    metric: &str,
    search: &GridSearchResult<P>,
    params: impl Fn(&P) -> BTreeMap<String, f64>,
    candidates: &[P],
) -> CvReport {
    CvReport {
        task: config.task,
        learner: config.learner,
        metric: metric.to_string(),
        folds: config.folds,
        seed: config.seed,
        best_index: search.best_index,
        candidates: candidates
            .iter()
            .zip(&search.cv_scores)
            .map(|(candidate, score)| CvCandidate {
                params: params(candidate),
                mean_score: *score,
            })
            .collect(),
    }
}

fn train_lasso(
    rows: &[Vec<f64>],
    data: &Dataset,
    config: &TrainConfig,
) -> Result<(TrainedModel, CvReport), PipelineError> {
    let y = similarity_targets(data)?;
    let expanded: Vec<Vec<f64>> = rows.iter().map(|r| expand_interactions(r)).collect();
    let lambdas = match &config.grid.lambda {
        Some(values) => values.clone(),
        None => default_lambda_grid(lasso_lambda_max(&expanded, &y)?),
    };
    check_grid_values("lambda", &lambdas, true)?;

    let search = grid_search_cv(
        &lambdas,
        expanded.len(),
        config.folds,
        config.seed,
        |lambda, train_idx, validate_idx| {
            let model = match lasso_fit(
                &subset_rows(&expanded, train_idx),
                &subset(&y, train_idx),
                *lambda,
                LASSO_TOL,
                LASSO_MAX_SWEEPS,
            ) {
                Ok(model) => model,
                Err(_) => return 0.0,
            };
            let pred: Vec<f64> = validate_idx
                .iter()
                .map(|&i| clamp_similarity(model.predict_row(&expanded[i])))
                .collect();
            fold_pearson(&pred, &subset(&y, validate_idx))
        },
    )?;

    let model = lasso_fit(
        &expanded,
        &y,
        search.best_params,
        LASSO_TOL,
        LASSO_MAX_SWEEPS,
    )?;
    let report = report_from_search(
        config,
        "pearson",
        &search,
        |lambda| BTreeMap::from([("lambda".to_string(), *lambda)]),
        &lambdas,
    );
    Ok((TrainedModel::Lasso(model), report))
}

fn train_svr(
    rows: &[Vec<f64>],
    data: &Dataset,
    config: &TrainConfig,
) -> Result<(TrainedModel, CvReport), PipelineError> {
    let y = similarity_targets(data)?;
    let cs = config.grid.c.clone().unwrap_or_else(default_c_grid);
    let gammas = config.grid.gamma.clone().unwrap_or_else(default_gamma_grid);
    let epsilons = config
        .grid
        .epsilon
        .clone()
        .unwrap_or_else(default_epsilon_grid);
    check_grid_values("c", &cs, false)?;
    check_grid_values("gamma", &gammas, false)?;
    check_grid_values("epsilon", &epsilons, true)?;

    let mut candidates = Vec::with_capacity(cs.len() * gammas.len() * epsilons.len());
    for &c in &cs {
        for &gamma in &gammas {
            for &epsilon in &epsilons {
                candidates.push((c, gamma, epsilon));
            }
        }
    }

    let search = grid_search_cv(
        &candidates,
        rows.len(),
        config.folds,
        config.seed,
        |&(c, gamma, epsilon), train_idx, validate_idx| {
            let model = match svr_fit(
                &subset_rows(rows, train_idx),
                &subset(&y, train_idx),
                c,
                epsilon,
                gamma,
                SMO_TOL,
            ) {
                Ok(model) => model,
                Err(_) => return 0.0,
            };
            let pred: Vec<f64> = validate_idx
                .iter()
                .map(|&i| predict_similarity(&model, &rows[i]))
                .collect();
            fold_pearson(&pred, &subset(&y, validate_idx))
        },
    )?;

    let (c, gamma, epsilon) = search.best_params;
    let model = svr_fit(rows, &y, c, epsilon, gamma, SMO_TOL)?;
    let report = report_from_search(
        config,
        "pearson",
        &search,
        |&(c, gamma, epsilon)| {
            BTreeMap::from([
                ("c".to_string(), c),
                ("gamma".to_string(), gamma),
                ("epsilon".to_string(), epsilon),
            ])
        },
        &candidates,
    );
    Ok((TrainedModel::Svr(model), report))
}

fn train_svm(
    rows: &[Vec<f64>],
    data: &Dataset,
    config: &TrainConfig,
) -> Result<(TrainedModel, CvReport), PipelineError> {
    let labels = entailment_targets(data)?;
    let cs = config.grid.c.clone().unwrap_or_else(default_c_grid);
    let gammas = config.grid.gamma.clone().unwrap_or_else(default_gamma_grid);
    check_grid_values("c", &cs, false)?;
    check_grid_values("gamma", &gammas, false)?;

    let mut candidates = Vec::with_capacity(cs.len() * gammas.len());
    for &c in &cs {
        for &gamma in &gammas {
            candidates.push((c, gamma));
        }
    }

    let search = grid_search_cv(
        &candidates,
        rows.len(),
        config.folds,
        config.seed,
        |&(c, gamma), train_idx, validate_idx| {
            let model = match svm_fit_multiclass(
                &subset_rows(rows, train_idx),
                &subset(&labels, train_idx),
                c,
                gamma,
                SMO_TOL,
            ) {
                Ok(model) => model,
                Err(_) => return 0.0,
            };
            let pred: Vec<EntailmentLabel> = validate_idx
                .iter()
                .map(|&i| model.predict(&rows[i]))
                .collect();
            accuracy(&pred, &subset(&labels, validate_idx)).unwrap_or(0.0)
        },
    )?;

    let (c, gamma) = search.best_params;
    let model = svm_fit_multiclass(rows, &labels, c, gamma, SMO_TOL)?;
    let report = report_from_search(
        config,
        "accuracy",
        &search,
        |&(c, gamma)| BTreeMap::from([("c".to_string(), c), ("gamma".to_string(), gamma)]),
        &candidates,
    );
    Ok((TrainedModel::Svm(model), report))
}

/// Trains the configured learner with a cross-validated grid search and
/// refits the winning candidate on the full training data. Returns the
/// persistable model (with the IDF table bundled in) and the full list of
/// candidates with their validation scores.
pub fn train(
    data: &Dataset,
    emb: &EmbeddingTable,
    idf: &IdfModel,
    config: &TrainConfig,
) -> Result<(ModelFile, CvReport), PipelineError> {
    if config.learner.task() != config.task {
        return Err(PipelineError::TaskLearnerMismatch {
            task: config.task,
            learner: config.learner,
        });
    }
    config.grid.check_keys(config.learner)?;
    if data.pairs.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let rows = feature_matrix(data, emb, idf);
    let (model, report) = match config.learner {
        Learner::Lasso => train_lasso(&rows, data, config)?,
        Learner::Svr => train_svr(&rows, data, config)?,
        Learner::Svm => train_svm(&rows, data, config)?,
    };
    Ok((ModelFile::new(model, idf.clone()), report))
}

/// Applies a model to every pair of a dataset, in corpus order.
/// Similarity outputs are clamped to the gold scale `[1, 5]`.
pub fn predict_dataset(
    file: &ModelFile,
    emb: &EmbeddingTable,
    data: &Dataset,
) -> Result<Vec<Prediction>, PipelineError> {
    file.validate()?;
    let rows = feature_matrix(data, emb, &file.idf);
    let predictions = data
        .pairs
        .iter()
        .zip(&rows)
        .map(|(pair, x)| {
            let (similarity, entailment) = match &file.model {
                TrainedModel::Lasso(m) => (Some(clamp_similarity(lasso_predict(m, x))), None),
                TrainedModel::Svr(m) => (Some(predict_similarity(m, x)), None),
                TrainedModel::Svm(m) => (None, Some(m.predict(x))),
            };
            Prediction {
                id: pair.id.clone(),
                similarity,
                entailment,
            }
        })
        .collect();
    Ok(predictions)
}

/// Joins predictions to gold pairs by id (order-independent) and scores
/// every section that is fully labeled on both sides. Spare or missing
/// ids are errors; so is a join with no scorable section at all.
pub fn evaluate_predictions(
    predictions: &[Prediction],
    gold: &Dataset,
) -> Result<EvalReport, PipelineError> {
    if gold.pairs.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let mut by_id: HashMap<&str, &Prediction> = HashMap::with_capacity(predictions.len());
    for prediction in predictions {
        if by_id.insert(prediction.id.as_str(), prediction).is_some() {
            return Err(PipelineError::DuplicatePrediction {
                id: prediction.id.clone(),
            });
        }
    }
    let gold_ids: HashSet<&str> = gold.pairs.iter().map(|p| p.id.as_str()).collect();
    if let Some(spare) = predictions
        .iter()
        .find(|p| !gold_ids.contains(p.id.as_str()))
    {
        return Err(PipelineError::UnknownPrediction {
            id: spare.id.clone(),
        });
    }

    let mut joined: Vec<(&SentencePair, &Prediction)> = Vec::with_capacity(gold.pairs.len());
    for pair in &gold.pairs {
        let prediction =
            by_id
                .get(pair.id.as_str())
                .ok_or_else(|| PipelineError::MissingPrediction {
                    id: pair.id.clone(),
                })?;
        joined.push((pair, prediction));
    }

    let similarity_ready = joined
        .iter()
        .all(|(g, p)| g.similarity.is_some() && p.similarity.is_some());
    let entailment_ready = joined
        .iter()
        .all(|(g, p)| g.entailment.is_some() && p.entailment.is_some());
    if !similarity_ready && !entailment_ready {
        return Err(PipelineError::NothingToScore);
    }

    let mut report = EvalReport {
        pearson: None,
        mse: None,
        accuracy: None,
        f1_per_class: None,
        f1_macro: None,
        n: joined.len(),
    };
    if similarity_ready {
        let pred: Vec<f64> = joined.iter().map(|(_, p)| p.similarity.unwrap()).collect();
        let gold_values: Vec<f64> = joined.iter().map(|(g, _)| g.similarity.unwrap()).collect();
        let section = EvalReport::for_similarity(&pred, &gold_values)?;
        report.pearson = section.pearson;
        report.mse = section.mse;
    }
    if entailment_ready {
        let pred: Vec<EntailmentLabel> =
            joined.iter().map(|(_, p)| p.entailment.unwrap()).collect();
        let gold_labels: Vec<EntailmentLabel> =
            joined.iter().map(|(g, _)| g.entailment.unwrap()).collect();
        let section = EvalReport::for_entailment(&pred, &gold_labels)?;
        report.accuracy = section.accuracy;
        report.f1_per_class = section.f1_per_class;
        report.f1_macro = section.f1_macro;
    }
    Ok(report)
}

// ---------------------------------------------------------------------
// File formats.
// ---------------------------------------------------------------------

/// Writes a file atomically: the bytes land in a temporary sibling which
/// is renamed over the target, so readers never observe a partial file
/// and inputs are never half-overwritten on failure.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut temp = tempfile::NamedTempFile::new_in(parent).map_err(io_error(path))?;
    temp.write_all(bytes).map_err(io_error(path))?;
    temp.persist(path).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("pipeline documents serialize");
    text.push('\n');
    text
}

pub fn write_model_file(path: &Path, model: &ModelFile) -> Result<(), PipelineError> {
    model.validate()?;
    write_atomic(path, to_pretty_json(model).as_bytes())
}

pub fn read_model_file(path: &Path) -> Result<ModelFile, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    let model: ModelFile = serde_json::from_str(&text).map_err(|e| PipelineError::Malformed {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    model.validate()?;
    Ok(model)
}

pub fn write_cv_report(path: &Path, report: &CvReport) -> Result<(), PipelineError> {
    write_atomic(path, to_pretty_json(report).as_bytes())
}

pub fn write_idf_file(path: &Path, idf: &IdfModel) -> Result<(), PipelineError> {
    write_atomic(path, to_pretty_json(idf).as_bytes())
}

pub fn read_idf_file(path: &Path) -> Result<IdfModel, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Malformed {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

/// Loads embeddings from either supported layout. The text layout is
/// tried first: a text file can be silently misread as binary (its bytes
/// would be consumed as raw vector data), while a binary file fails the
/// text parse immediately, so this order is the safe one.
pub fn load_embeddings_auto(path: &Path) -> Result<EmbeddingTable, PipelineError> {
    let text_error = match load_word2vec_text(path) {
        Ok(table) => return Ok(table),
        Err(e) => e,
    };
    let binary_error = match load_word2vec_binary(path) {
        Ok(table) => return Ok(table),
        Err(e) => e,
    };
    Err(PipelineError::EmbeddingFormat {
        path: path.to_path_buf(),
        text_error,
        binary_error,
    })
}

/// Writes the per-pair feature matrix as CSV: a `pair_id` column followed
/// by one column per feature, full precision, in corpus order.
pub fn write_feature_csv(
    path: &Path,
    data: &Dataset,
    rows: &[Vec<f64>],
) -> Result<(), PipelineError> {
    assert_eq!(data.pairs.len(), rows.len(), "one feature row per pair");
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |source: csv::Error| PipelineError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut header = Vec::with_capacity(FEATURE_COUNT + 1);
    header.push("pair_id");
    header.extend(FEATURE_NAMES);
    writer.write_record(&header).map_err(csv_err)?;
    for (pair, row) in data.pairs.iter().zip(rows) {
        assert_eq!(row.len(), FEATURE_COUNT, "feature row width");
        let mut record = Vec::with_capacity(FEATURE_COUNT + 1);
        record.push(pair.id.clone());
        record.extend(row.iter().map(|v| v.to_string()));
        writer.write_record(&record).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .expect("in-memory csv writer cannot fail to flush");
    write_atomic(path, &bytes)
}

/// Writes predictions as CSV. Similarity files have columns
/// `pair_id,similarity` with four-decimal scores; entailment files have
/// `pair_id,entailment` with class names.
pub fn write_predictions_csv(
    path: &Path,
    predictions: &[Prediction],
    task: Task,
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |source: csv::Error| PipelineError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let missing = |id: &str, what: &str| PipelineError::Malformed {
        path: path.to_path_buf(),
        detail: format!("prediction for pair {id} has no {what} value"),
    };
    match task {
        Task::Similarity => {
            writer
                .write_record(["pair_id", "similarity"])
                .map_err(csv_err)?;
            for p in predictions {
                let value = p.similarity.ok_or_else(|| missing(&p.id, "similarity"))?;
                writer
                    .write_record([p.id.as_str(), &format!("{value:.4}")])
                    .map_err(csv_err)?;
            }
        }
        Task::Entailment => {
            writer
                .write_record(["pair_id", "entailment"])
                .map_err(csv_err)?;
            for p in predictions {
                let label = p.entailment.ok_or_else(|| missing(&p.id, "entailment"))?;
                writer
                    .write_record([p.id.as_str(), label.as_str()])
                    .map_err(csv_err)?;
            }
        }
    }
    let bytes = writer
        .into_inner()
        .expect("in-memory csv writer cannot fail to flush");
    write_atomic(path, &bytes)
}

/// Reads a predictions CSV. `pair_id` is required; `similarity` and
/// `entailment` columns are both optional but at least one must exist.
pub fn read_predictions_csv(path: &Path) -> Result<Vec<Prediction>, PipelineError> {
    let csv_err = |source: csv::Error| PipelineError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let malformed = |detail: String| PipelineError::Malformed {
        path: path.to_path_buf(),
        detail,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let id_col = column("pair_id")
        .ok_or_else(|| malformed("missing required column pair_id".to_string()))?;
    let sim_col = column("similarity");
    let ent_col = column("entailment");
    if sim_col.is_none() && ent_col.is_none() {
        return Err(malformed(
            "need a similarity or an entailment column".to_string(),
        ));
    }

    let mut predictions = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let field = |col: usize| {
            record
                .get(col)
                .ok_or_else(|| malformed(format!("record {}: missing field {col}", line + 2)))
        };
        let id = field(id_col)?.to_string();
        let similarity = match sim_col {
            Some(col) => {
                let raw = field(col)?;
                Some(raw.parse::<f64>().map_err(|_| {
                    malformed(format!("record {}: bad similarity {raw:?}", line + 2))
                })?)
            }
            None => None,
        };
        let entailment = match ent_col {
            Some(col) => {
                let raw = field(col)?;
                Some(raw.parse::<EntailmentLabel>().map_err(|_| {
                    malformed(format!("record {}: bad entailment {raw:?}", line + 2))
                })?)
            }
            None => None,
        };
        predictions.push(Prediction {
            id,
            similarity,
            entailment,
        });
    }
    Ok(predictions)
}

/// Writes an evaluation report in its flat key layout.
pub fn write_eval_report(path: &Path, report: &EvalReport) -> Result<(), PipelineError> {
    write_atomic(path, report.to_json_string().as_bytes())
}
