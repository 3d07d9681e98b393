//! Sentence-pair semantic similarity and entailment over word embeddings.
//!
//! The crate implements a complete pipeline for the two ASSIN shared-task
//! problems: scoring the semantic similarity of a Portuguese sentence pair on
//! a 1–5 scale, and classifying the pair as `None`, `Entailment`, or
//! `Paraphrase`. Both tasks run on the same 15-dimensional feature vector
//! computed from word embeddings and inverse document frequencies.
//!
//! The pieces, bottom to top:
//!
//! * [`embeddings`] — word2vec binary/text tables and the vector arithmetic
//!   used everywhere else.
//! * [`corpus`] — tokenization, IDF models, and the ASSIN XML corpus format.
//! * [`features`] — the 15-feature representation of a sentence pair.
//! * [`learn`] — Lasso with two-way interactions, ε-SVR and one-vs-one SVM
//!   with a Gaussian kernel, and grid search with five-fold cross validation.
//! * [`metrics`] — Pearson, MSE, accuracy, macro-F1, and a bag-of-words
//!   cosine baseline.
//! * [`pipeline`] — end-to-end training, prediction, and evaluation on
//!   corpora, plus the model/report file formats used by the CLI.
//!
//! The `semsim` binary exposes the pipeline as subcommands (`extract`,
//! `train`, `predict`, `evaluate`, `build-idf`, `inspect-embeddings`); see
//! the book under `book/` for a guided tour.

pub mod corpus;
pub mod embeddings;
pub mod features;
pub mod learn;
pub mod metrics;
pub mod pipeline;

#[cfg(doctest)]
mod book;
