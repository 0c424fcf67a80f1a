//! The immutable, fully precomputed dataset the service reads, and its
//! single-file cache format.
//!
//! The cache is the magic line `NIRX1` followed by a JSON body. Floats are
//! written in shortest round-trip form and parsed exactly, so a reloaded
//! snapshot is equal to the one that was written.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::{Cluster, Judgments, QuerySummary};
use crate::error::{Error, Result};
use crate::formats::{QrelEntry, RunEntry};
use crate::kernel::{KernelBank, ScoredDocument};
use crate::tokenize::Token;

pub const CACHE_MAGIC: &str = "NIRX1";

/// Raw text with its tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl TextRecord {
    pub fn new(text: String) -> Self {
        let tokens = crate::tokenize::tokenize(&text);
        TextRecord { text, tokens }
    }

    pub fn terms(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSnapshot {
    pub collection: String,
    /// Seconds since the Unix epoch.
    pub built_at: u64,
    pub candidate_depth: usize,
    pub relevance_threshold: u32,
    pub embedding_dimension: usize,
    pub vocabulary_size: usize,
    pub bank: KernelBank,
    pub queries: BTreeMap<String, TextRecord>,
    pub docs: BTreeMap<String, TextRecord>,
    /// First-stage ranking per query, ordered by rank and cut to the
    /// candidate depth.
    pub baseline: BTreeMap<String, Vec<RunEntry>>,
    pub qrels: BTreeMap<String, Vec<QrelEntry>>,
    pub reranked: BTreeMap<String, Vec<ScoredDocument>>,
    pub summaries: BTreeMap<String, QuerySummary>,
    /// Clusters in id order; the all-OOV bucket, if any, comes last.
    pub clusters: Vec<Cluster>,
    /// Inputs skipped during the build (e.g. queries with no tokens).
    pub warnings: Vec<String>,
}

impl RunSnapshot {
    pub fn judgments(&self, query_id: &str) -> Judgments {
        self.qrels
            .get(query_id)
            .map(|entries| entries.iter().map(|e| (e.doc_id.clone(), e.relevance)).collect())
            .unwrap_or_default()
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    pub fn write_cache(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{CACHE_MAGIC}")?;
        serde_json::to_writer(&mut out, self).map_err(|e| Error::Cache(e.to_string()))?;
        out.flush()?;
        Ok(())
    }

    pub fn read_cache(mut input: impl BufRead) -> Result<Self> {
        let mut magic = String::new();
        input.read_line(&mut magic)?;
        if magic.trim_end() != CACHE_MAGIC {
            return Err(Error::Cache(format!(
                "not a snapshot cache (expected header {CACHE_MAGIC:?})"
            )));
        }
        serde_json::from_reader(input).map_err(|e| Error::Cache(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::from(e).in_file(path))?;
        self.write_cache(std::io::BufWriter::new(file)).map_err(|e| e.in_file(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::read_cache(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
    }
}
