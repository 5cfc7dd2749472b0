//! Corpus thematic analysis toolkit.
//!
//! The pipeline runs in five stages, each usable on its own:
//!
//! 1. [`corpus`] — ingest raw documents (JSONL or a directory of plain-text
//!    files) and optionally drop non-English posts.
//! 2. [`preprocess`] — lowercase, strip punctuation, remove stopwords, stem
//!    with the Snowball English (Porter2) algorithm, and encode documents as
//!    vocabulary-id sequences.
//! 3. [`lda`] — fit a latent Dirichlet allocation model by collapsed Gibbs
//!    sampling, seeded and fully deterministic.
//! 4. [`topicnet`] — build a weighted topic graph from pairwise cosine
//!    similarities, thresholded.
//! 5. [`community`] — group topics by Louvain modularity maximization.
//!
//! [`report`] exports every artifact (topic tables, histograms, similarity
//! matrices, GEXF/JSON graphs, partitions) in byte-deterministic formats and
//! drives the whole pipeline from a single config file.

pub mod community;
pub mod corpus;
pub mod error;
pub mod lda;
pub mod preprocess;
pub mod report;
pub mod rng;
pub mod topicnet;

pub use error::{Error, Result};
