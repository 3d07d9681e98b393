//! Command-line front end for the sentence-pair pipeline: IDF building,
//! feature extraction, cross-validated training, prediction, and
//! evaluation, over ASSIN-format XML corpora and word2vec embeddings.
//!
//! Every command is deterministic given its inputs and `--seed`, never
//! mutates an input file, and writes each output atomically. Failures
//! exit nonzero after printing a single `error[<category>]: <message>`
//! line on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semsim::corpus::{parse_assin_xml, Dataset, IdfModel};
use semsim::pipeline::{
    self, GridSpec, Learner, PipelineError, Task, TrainConfig, DEFAULT_FOLDS, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "semsim",
    version,
    about = "Sentence-pair semantic similarity and entailment over word embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the per-pair feature vectors of a corpus as CSV.
    Extract(ExtractArgs),
    /// Select hyperparameters by cross-validation and fit a model.
    Train(TrainArgs),
    /// Apply a trained model to a corpus.
    Predict(PredictArgs),
    /// Score a predictions file against gold labels, joined by pair id.
    Evaluate(EvaluateArgs),
    /// Fit a document-frequency table from one or more corpora.
    BuildIdf(BuildIdfArgs),
    /// Print summary information about an embeddings file.
    InspectEmbeddings(InspectArgs),
}

/// Where feature extraction gets its document-frequency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IdfFrom {
    /// Fit on the `--train` corpora (or on the processed corpus itself
    /// for `extract` when no `--train` is given).
    Train,
    /// Load the JSON table written by `build-idf` from `--idf-file`.
    File,
}

#[derive(Args)]
struct IdfSource {
    /// Source of the IDF table.
    #[arg(long, value_enum, default_value_t = IdfFrom::Train)]
    idf_from: IdfFrom,
    /// IDF table path, required with `--idf-from file`.
    #[arg(long)]
    idf_file: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Embeddings file (word2vec text or binary layout).
    #[arg(long)]
    embeddings: PathBuf,
    /// Corpus to featurize (ASSIN XML).
    #[arg(long)]
    test: PathBuf,
    /// Corpora the IDF table is fitted on with `--idf-from train`.
    #[arg(long)]
    train: Vec<PathBuf>,
    #[command(flatten)]
    idf: IdfSource,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Embeddings file (word2vec text or binary layout).
    #[arg(long)]
    embeddings: PathBuf,
    /// Training corpora (ASSIN XML); repeat the flag to merge several.
    #[arg(long, required = true)]
    train: Vec<PathBuf>,
    /// Prediction task the model is for.
    #[arg(long)]
    task: Task,
    /// Training algorithm.
    #[arg(long)]
    learner: Learner,
    /// Seed for every random choice (cross-validation shuffling).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Cross-validation fold count.
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    /// Grid override `key=v1,v2,...`; keys: lambda (lasso), c, gamma
    /// (svr/svm), epsilon (svr). Repeatable.
    #[arg(long)]
    grid: Vec<String>,
    #[command(flatten)]
    idf: IdfSource,
    /// Output model path; the CV report lands next to it as `*.cv.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Embeddings file (word2vec text or binary layout).
    #[arg(long)]
    embeddings: PathBuf,
    /// Corpus to predict on (ASSIN XML).
    #[arg(long)]
    test: PathBuf,
    /// Output predictions CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Predictions CSV written by `predict`.
    #[arg(long)]
    pred: PathBuf,
    /// Gold corpus (ASSIN XML) to score against.
    #[arg(long)]
    test: PathBuf,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildIdfArgs {
    /// Corpora to fit on (ASSIN XML); repeatable.
    #[arg(long, required = true)]
    train: Vec<PathBuf>,
    /// Output IDF table path (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    /// Embeddings file (word2vec text or binary layout).
    #[arg(long)]
    embeddings: PathBuf,
    /// Tokens to look up; repeatable.
    #[arg(long)]
    token: Vec<String>,
}

fn config_error(detail: impl Into<String>) -> PipelineError {
    PipelineError::Config {
        detail: detail.into(),
    }
}

fn load_datasets(paths: &[PathBuf]) -> Result<Vec<Dataset>, PipelineError> {
    paths
        .iter()
        .map(|path| parse_assin_xml(path).map_err(Into::into))
        .collect()
}

/// Concatenates several corpora into one training set. With more than one
/// file, pair ids are prefixed with their file's variant tag so that the
/// per-file numbering schemes cannot collide.
fn merge_datasets(mut sets: Vec<Dataset>) -> Result<Dataset, PipelineError> {
    if sets.len() == 1 {
        return Ok(sets.remove(0));
    }
    let mut pairs = Vec::new();
    for set in sets {
        for mut pair in set.pairs {
            pair.id = format!("{}/{}", set.variant_tag, pair.id);
            pairs.push(pair);
        }
    }
    Dataset::new(pairs, "merged").map_err(Into::into)
}

fn resolve_idf(source: &IdfSource, fit_on: &[Dataset]) -> Result<IdfModel, PipelineError> {
    match source.idf_from {
        IdfFrom::Train => {
            if fit_on.is_empty() {
                return Err(config_error(
                    "--idf-from train needs at least one --train corpus",
                ));
            }
            IdfModel::fit_from_datasets(fit_on).map_err(Into::into)
        }
        IdfFrom::File => {
            let path = source
                .idf_file
                .as_ref()
                .ok_or_else(|| config_error("--idf-from file needs --idf-file"))?;
            pipeline::read_idf_file(path)
        }
    }
}

fn parse_grid(specs: &[String]) -> Result<GridSpec, PipelineError> {
    let mut grid = GridSpec::default();
    for spec in specs {
        let (key, rest) = spec
            .split_once('=')
            .ok_or_else(|| config_error(format!("--grid {spec:?}: expected key=v1,v2,...")))?;
        let values: Vec<f64> = rest
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| config_error(format!("--grid {spec:?}: bad number {v:?}")))
            })
            .collect::<Result<_, _>>()?;
        let slot = match key.trim() {
            "c" => &mut grid.c,
            "gamma" => &mut grid.gamma,
            "epsilon" => &mut grid.epsilon,
            "lambda" => &mut grid.lambda,
            other => {
                return Err(config_error(format!(
                    "--grid key {other:?} is not one of c, gamma, epsilon, lambda"
                )))
            }
        };
        if slot.is_some() {
            return Err(config_error(format!("--grid key {key:?} given twice")));
        }
        *slot = Some(values);
    }
    Ok(grid)
}

fn cv_report_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("cv.json")
}

fn cmd_extract(args: &ExtractArgs) -> Result<(), PipelineError> {
    let emb = pipeline::load_embeddings_auto(&args.embeddings)?;
    let data = parse_assin_xml(&args.test)?;
    let idf = if args.idf.idf_from == IdfFrom::Train && args.train.is_empty() {
        // Featurizing a corpus against its own document frequencies.
        IdfModel::fit_from_datasets([&data])?
    } else {
        resolve_idf(&args.idf, &load_datasets(&args.train)?)?
    };
    let rows = pipeline::feature_matrix(&data, &emb, &idf);
    pipeline::write_feature_csv(&args.out, &data, &rows)?;
    println!("features: {} ({} pairs)", args.out.display(), rows.len());
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<(), PipelineError> {
    let emb = pipeline::load_embeddings_auto(&args.embeddings)?;
    let sets = load_datasets(&args.train)?;
    let idf = resolve_idf(&args.idf, &sets)?;
    let data = merge_datasets(sets)?;
    let config = TrainConfig {
        task: args.task,
        learner: args.learner,
        seed: args.seed,
        folds: args.folds,
        grid: parse_grid(&args.grid)?,
    };
    let (model, report) = pipeline::train(&data, &emb, &idf, &config)?;
    pipeline::write_model_file(&args.out, &model)?;
    let report_path = cv_report_path(&args.out);
    pipeline::write_cv_report(&report_path, &report)?;
    let best = &report.candidates[report.best_index];
    println!("model: {}", args.out.display());
    println!("cv-report: {}", report_path.display());
    println!(
        "best candidate {}/{}: {:?} (mean {} {:.4})",
        report.best_index + 1,
        report.candidates.len(),
        best.params,
        report.metric,
        best.mean_score
    );
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<(), PipelineError> {
    let model = pipeline::read_model_file(&args.model)?;
    let emb = pipeline::load_embeddings_auto(&args.embeddings)?;
    let data = parse_assin_xml(&args.test)?;
    let predictions = pipeline::predict_dataset(&model, &emb, &data)?;
    pipeline::write_predictions_csv(&args.out, &predictions, model.task)?;
    println!(
        "predictions: {} ({} pairs, task {})",
        args.out.display(),
        predictions.len(),
        model.task
    );
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), PipelineError> {
    let predictions = pipeline::read_predictions_csv(&args.pred)?;
    let gold = parse_assin_xml(&args.test)?;
    let report = pipeline::evaluate_predictions(&predictions, &gold)?;
    match &args.out {
        Some(path) => {
            pipeline::write_eval_report(path, &report)?;
            println!("report: {}", path.display());
        }
        None => print!("{}", report.to_json_string()),
    }
    Ok(())
}

fn cmd_build_idf(args: &BuildIdfArgs) -> Result<(), PipelineError> {
    let sets = load_datasets(&args.train)?;
    let idf = IdfModel::fit_from_datasets(&sets)?;
    pipeline::write_idf_file(&args.out, &idf)?;
    println!(
        "idf: {} ({} documents, {} terms)",
        args.out.display(),
        idf.doc_count(),
        idf.vocabulary_len()
    );
    Ok(())
}

fn cmd_inspect_embeddings(args: &InspectArgs) -> Result<(), PipelineError> {
    let emb = pipeline::load_embeddings_auto(&args.embeddings)?;
    println!("dimension: {}", emb.dim());
    println!("vocabulary: {}", emb.len());
    for token in &args.token {
        match emb.lookup(token) {
            Some(vector) => {
                let norm = vector
                    .iter()
                    .map(|v| f64::from(*v) * f64::from(*v))
                    .sum::<f64>()
                    .sqrt();
                println!("token {token}: present, norm {norm:.4}");
            }
            None => println!("token {token}: absent"),
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    match &cli.command {
        Command::Extract(args) => cmd_extract(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::BuildIdf(args) => cmd_build_idf(args),
        Command::InspectEmbeddings(args) => cmd_inspect_embeddings(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error[{}]: {error}", error.category());
            ExitCode::FAILURE
        }
    }
}
