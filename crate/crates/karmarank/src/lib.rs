//! Karma-controlled comment ranking for threaded discussion dumps.
//!
//! The library covers the full pipeline: ingesting JSONL dumps into a corpus
//! store, building timing-controlled ranking instances of consecutive
//! comments, computing author reputation (k-index), extracting eight named
//! feature groups, training a pairwise linear ranking SVM with greedy
//! feature-group selection on validation P@1, and evaluating with P@1, NDCG
//! and balanced surrogate classification tasks.
//!
//! All randomness flows from a single root seed through named substreams
//! (see [`rng`]), so every stage is reproducible bit-for-bit.

pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod lexicons;
pub mod manifest;
pub mod pipeline;
pub mod ranker;
pub mod reputation;
pub mod rng;
pub mod semantics;
pub mod synth;
pub mod textprep;

#[cfg(test)]
pub(crate) mod testutil;

pub use config::RunConfig;
pub use corpus::{Comment, CommentList, CorpusStore, Split, Thread};
pub use error::{Error, Result};
pub use features::{FeatureGroup, FeatureSchema, FeaturizedList, GroupedFeatureVector};
pub use ranker::RankModel;
