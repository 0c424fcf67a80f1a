//! Explore kernel-pooling re-ranking results.
//!
//! The pipeline: load term vectors ([`embedding`]), parse a first-stage run
//! with its qrels and texts ([`formats`]), re-score every candidate with a
//! kernel bank while keeping each kernel's share of the score ([`kernel`]),
//! cluster the queries and compute first-relevant-rank metrics
//! ([`analytics`]), and freeze it all into a [`RunSnapshot`] ([`ingest`],
//! [`snapshot`]) that the JSON service in [`api`] serves read-only.

pub mod analytics;
pub mod api;
pub mod embedding;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod kernel;
pub mod snapshot;
pub mod tokenize;

pub use embedding::{cosine, EmbeddingTable, TermVector};
pub use error::{Error, Result};
pub use ingest::{build_from_inputs, build_snapshot, BuildOptions, InputFiles, Inputs};
pub use kernel::{rerank, Candidate, Kernel, KernelBank, ScoreBreakdown, ScoredDocument};
pub use snapshot::RunSnapshot;
