//! Seeded five-fold cross validation over explicit candidate lists.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::LearnError;

/// Splits `0..n` into `folds` disjoint index blocks of near-equal size
/// (within one element). The shuffle is fully determined by the seed.
pub fn cv_partition(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, LearnError> {
    if folds == 0 || n < folds {
        return Err(LearnError::TooFewSamplesForFolds { n, folds });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let base = n / folds;
    let remainder = n % folds;
    let mut blocks = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < remainder);
        blocks.push(indices[start..start + size].to_vec());
        start += size;
    }
    Ok(blocks)
}

/// Outcome of a cross-validated sweep over one candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult<P> {
    pub best_params: P,
    pub best_index: usize,
    /// Mean fold score per candidate, in candidate order.
    pub cv_scores: Vec<f64>,
    pub folds: usize,
}

/// Scores every candidate by mean fold score and returns the best; ties go
/// to the earliest candidate. `score` receives the candidate plus train
/// and validation index sets and must be a pure function of them.
/// Candidates are scored in parallel, which cannot perturb the result:
/// scores are collected in candidate order.
pub fn grid_search_cv<P>(
    candidates: &[P],
    n: usize,
    folds: usize,
    seed: u64,
    score: impl Fn(&P, &[usize], &[usize]) -> f64 + Sync,
) -> Result<GridSearchResult<P>, LearnError>
where
    P: Clone + Sync,
{
    if candidates.is_empty() {
        return Err(LearnError::EmptyGrid);
    }
    let blocks = cv_partition(n, folds, seed)?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|held_out| {
            let train: Vec<usize> = blocks
                .iter()
                .enumerate()
                .filter(|(f, _)| *f != held_out)
                .flat_map(|(_, block)| block.iter().copied())
                .collect();
            (train, blocks[held_out].clone())
        })
        .collect();

    let cv_scores: Vec<f64> = candidates
        .par_iter()
        .map(|candidate| {
            let total: f64 = splits
                .iter()
                .map(|(train, validate)| score(candidate, train, validate))
                .sum();
            total / folds as f64
        })
        .collect();

    let mut best_index = 0;
    for (index, value) in cv_scores.iter().enumerate() {
        if *value > cv_scores[best_index] {
            best_index = index;
        }
    }
    Ok(GridSearchResult {
        best_params: candidates[best_index].clone(),
        best_index,
        cv_scores,
        folds,
    })
}

/// Box-constraint candidates.
pub fn default_c_grid() -> Vec<f64> {
    vec![0.1, 1.0, 10.0, 100.0]
}

/// Kernel width candidates; the first is 1/15, one over the feature count.
pub fn default_gamma_grid() -> Vec<f64> {
    vec![1.0 / 15.0, 0.01, 0.1, 1.0]
}

/// Tube half-width candidates for regression.
pub fn default_epsilon_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}

/// 20 logarithmically spaced penalties from `lambda_max` down to
/// `lambda_max * 1e-4`, strongest first so ties prefer sparser models.
pub fn default_lambda_grid(lambda_max: f64) -> Vec<f64> {
    (0..20)
        .map(|i| lambda_max * 10f64.powf(-4.0 * i as f64 / 19.0))
        .collect()
}
