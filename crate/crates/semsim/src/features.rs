//! The 15-feature representation of a sentence pair.
//!
//! Each pair maps to a fixed-layout vector built from five groups:
//!
//! | positions | group                                                |
//! |-----------|------------------------------------------------------|
//! | 1–3       | saliency-weighted histogram of per-term best matches |
//! | 4–6       | histogram of all cross-sentence term similarities    |
//! | 7–9       | unweighted histogram of per-term best matches        |
//! | 10–11     | cosine and Euclidean distance of the mean vectors    |
//! | 12–15     | histogram of the mean vectors' component differences |
//!
//! The per-term-best-match groups are computed in both directions and
//! averaged, so every feature is invariant under swapping the sentences.
//! Histograms are normalized to unit mass; a group degenerates to all
//! zeros when a sentence has no in-vocabulary token.

use crate::corpus::{tokenize, IdfModel, SentencePair};
use crate::embeddings::{cosine_similarity, euclidean_distance, EmbeddingTable};

pub const FEATURE_COUNT: usize = 15;

/// Column names for feature dumps and model files, one per position.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "saliency_bin1",
    "saliency_bin2",
    "saliency_bin3",
    "allpairs_bin1",
    "allpairs_bin2",
    "allpairs_bin3",
    "maxpair_bin1",
    "maxpair_bin2",
    "maxpair_bin3",
    "mean_cosine",
    "mean_euclidean",
    "dim_bin1",
    "dim_bin2",
    "dim_bin3",
    "dim_bin4",
];

/// Right-open bins over the real line. `edges[i]` is the lower edge of bin
/// `i`; the last bin is unbounded above and values below `edges[0]` clamp
/// into bin 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSpec {
    edges: Vec<f64>,
}

impl BinSpec {
    /// # Panics
    ///
    /// Panics unless the edges are strictly ascending and non-empty.
    pub fn new(edges: impl Into<Vec<f64>>) -> Self {
        let edges = edges.into();
        assert!(!edges.is_empty(), "a BinSpec needs at least one edge");
        assert!(
            edges.windows(2).all(|w| w[0] < w[1]),
            "BinSpec edges must be strictly ascending, got {edges:?}"
        );
        BinSpec { edges }
    }

    /// Bins for per-term best-match similarities under saliency weighting.
    pub fn saliency() -> Self {
        BinSpec::new([0.0, 0.15, 0.4])
    }

    /// Bins for raw cosine similarities, covering their full range.
    pub fn network() -> Self {
        BinSpec::new([-1.0, 0.45, 0.8])
    }

    /// Bins for absolute differences of mean-vector components.
    pub fn dimension() -> Self {
        BinSpec::new([f64::NEG_INFINITY, 0.001, 0.01, 0.02])
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Index of the bin holding `value`. Bins are right-open, so an edge
    /// value belongs to the bin it opens.
    pub fn bin_of(&self, value: f64) -> usize {
        self.edges
            .partition_point(|edge| *edge <= value)
            .saturating_sub(1)
    }
}

/// The 15 features of one sentence pair, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    pub values: [f64; FEATURE_COUNT],
}

impl PairFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Per-source-term best-match histogram in one direction, or `None` when
/// either side has no in-vocabulary term. `weight` supplies each source
/// term's histogram mass and must be strictly positive.
fn directed_best_match_histogram<S1, S2>(
    source: &[S1],
    target: &[S2],
    emb: &EmbeddingTable,
    bins: &BinSpec,
    mut weight: impl FnMut(&str) -> f64,
) -> Option<[f64; 3]>
where
    S1: AsRef<str>,
    S2: AsRef<str>,
{
    debug_assert_eq!(bins.bin_count(), 3);
    let target_vectors: Vec<&[f32]> = target
        .iter()
        .filter_map(|t| emb.lookup(t.as_ref()))
        .collect();
    if target_vectors.is_empty() {
        return None;
    }
    let mut histogram = [0.0f64; 3];
    let mut mass = 0.0f64;
    for token in source {
        let token = token.as_ref();
        let Some(source_vector) = emb.lookup(token) else {
            continue;
        };
        let mut best = f64::NEG_INFINITY;
        for target_vector in &target_vectors {
            let sim = cosine_similarity(source_vector, target_vector)
                .expect("vectors of one table share its dimension");
            if sim > best {
                best = sim;
            }
        }
        let w = weight(token);
        histogram[bins.bin_of(best)] += w;
        mass += w;
    }
    if mass <= 0.0 {
        return None;
    }
    for h in &mut histogram {
        *h /= mass;
    }
    Some(histogram)
}

fn average_directions(forward: Option<[f64; 3]>, backward: Option<[f64; 3]>) -> [f64; 3] {
    let forward = forward.unwrap_or([0.0; 3]);
    let backward = backward.unwrap_or([0.0; 3]);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (forward[i] + backward[i]) / 2.0;
    }
    out
}

/// Histogram of per-term best-match similarities where each source term
/// carries its IDF weight, averaged over both directions. Rare words move
/// the mass; a direction with no in-vocabulary term on either side
/// contributes zeros.
pub fn saliency_weighted_histogram<S1, S2>(
    tokens_1: &[S1],
    tokens_2: &[S2],
    emb: &EmbeddingTable,
    idf: &IdfModel,
) -> [f64; 3]
where
    S1: AsRef<str>,
    S2: AsRef<str>,
{
    let bins = BinSpec::saliency();
    let forward = directed_best_match_histogram(tokens_1, tokens_2, emb, &bins, |t| idf.idf(t));
    let backward = directed_best_match_histogram(tokens_2, tokens_1, emb, &bins, |t| idf.idf(t));
    average_directions(forward, backward)
}

/// Histogram of the cosine similarities of every in-vocabulary cross pair,
/// normalized by the pair count; zeros when no pair exists.
pub fn unweighted_all_pairs_histogram<S1, S2>(
    tokens_1: &[S1],
    tokens_2: &[S2],
    emb: &EmbeddingTable,
) -> [f64; 3]
where
    S1: AsRef<str>,
    S2: AsRef<str>,
{
    let bins = BinSpec::network();
    let vectors_1: Vec<&[f32]> = tokens_1
        .iter()
        .filter_map(|t| emb.lookup(t.as_ref()))
        .collect();
    let vectors_2: Vec<&[f32]> = tokens_2
        .iter()
        .filter_map(|t| emb.lookup(t.as_ref()))
        .collect();
    let mut histogram = [0.0f64; 3];
    let pair_count = vectors_1.len() * vectors_2.len();
    if pair_count == 0 {
        return histogram;
    }
    for a in &vectors_1 {
        for b in &vectors_2 {
            let sim = cosine_similarity(a, b).expect("vectors of one table share its dimension");
            histogram[bins.bin_of(sim)] += 1.0;
        }
    }
    for h in &mut histogram {
        *h /= pair_count as f64;
    }
    histogram
}

/// Like [`saliency_weighted_histogram`] but with unit weights and bins
/// covering the full cosine range.
pub fn unweighted_max_histogram<S1, S2>(
    tokens_1: &[S1],
    tokens_2: &[S2],
    emb: &EmbeddingTable,
) -> [f64; 3]
where
    S1: AsRef<str>,
    S2: AsRef<str>,
{
    let bins = BinSpec::network();
    let forward = directed_best_match_histogram(tokens_1, tokens_2, emb, &bins, |_| 1.0);
    let backward = directed_best_match_histogram(tokens_2, tokens_1, emb, &bins, |_| 1.0);
    average_directions(forward, backward)
}

/// Cosine similarity and Euclidean distance of the two mean vectors. A
/// sentence with no in-vocabulary token has a zero mean, which forces the
/// cosine to 0.
pub fn mean_vector_distances<S1, S2>(
    tokens_1: &[S1],
    tokens_2: &[S2],
    emb: &EmbeddingTable,
) -> (f64, f64)
where
    S1: AsRef<str>,
    S2: AsRef<str>,
{
    let (mean_1, _) = emb.mean_vector(tokens_1);
    let (mean_2, _) = emb.mean_vector(tokens_2);
    let cos = cosine_similarity(&mean_1, &mean_2).expect("means share the table dimension");
    let euc = euclidean_distance(&mean_1, &mean_2).expect("means share the table dimension");
    (cos, euc)
}

/// Histogram of the absolute component-wise differences of the two mean
/// vectors, normalized by the dimension. Always unit mass: the table
/// dimension is at least 1 and every component difference lands somewhere.
pub fn dimension_bins<S1, S2>(tokens_1: &[S1], tokens_2: &[S2], emb: &EmbeddingTable) -> [f64; 4]
where
    S1: AsRef<str>,
    S2: AsRef<str>,
{
    let bins = BinSpec::dimension();
    let (mean_1, _) = emb.mean_vector(tokens_1);
    let (mean_2, _) = emb.mean_vector(tokens_2);
    let mut histogram = [0.0f64; 4];
    for (a, b) in mean_1.iter().zip(&mean_2) {
        histogram[bins.bin_of((a - b).abs())] += 1.0;
    }
    for h in &mut histogram {
        *h /= mean_1.len() as f64;
    }
    histogram
}

/// Extracts the full 15-feature vector from two raw sentences.
pub fn extract_from_texts(
    text_1: &str,
    text_2: &str,
    emb: &EmbeddingTable,
    idf: &IdfModel,
) -> PairFeatures {
    let tokens_1 = tokenize(text_1);
    let tokens_2 = tokenize(text_2);
    let saliency = saliency_weighted_histogram(&tokens_1, &tokens_2, emb, idf);
    let all_pairs = unweighted_all_pairs_histogram(&tokens_1, &tokens_2, emb);
    let max_pairs = unweighted_max_histogram(&tokens_1, &tokens_2, emb);
    let (mean_cos, mean_euc) = mean_vector_distances(&tokens_1, &tokens_2, emb);
    let dims = dimension_bins(&tokens_1, &tokens_2, emb);

    let mut values = [0.0f64; FEATURE_COUNT];
    values[0..3].copy_from_slice(&saliency);
    values[3..6].copy_from_slice(&all_pairs);
    values[6..9].copy_from_slice(&max_pairs);
    values[9] = mean_cos;
    values[10] = mean_euc;
    values[11..15].copy_from_slice(&dims);
    PairFeatures { values }
}

/// Extracts the feature vector of a corpus pair.
pub fn extract_features(pair: &SentencePair, emb: &EmbeddingTable, idf: &IdfModel) -> PairFeatures {
    extract_from_texts(&pair.text_t, &pair.text_h, emb, idf)
}
