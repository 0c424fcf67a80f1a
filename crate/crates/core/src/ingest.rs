//! Assembles a [`RunSnapshot`] from the input files: tokenizes texts,
//! re-ranks every query's candidates, computes metrics and clusters.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analytics::{
    auto_title, cluster_queries, default_cluster_count, median, median_metric, query_vector, Cluster, QuerySummary,
    UNCLUSTERED_ID,
};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::formats::{parse_file, parse_qrels, parse_run, parse_title_overrides, parse_tsv_texts, QrelEntry, RunEntry};
use crate::kernel::{rerank, Candidate, KernelBank, ScoredDocument};
use crate::snapshot::{RunSnapshot, TextRecord};

pub const DEFAULT_CANDIDATE_DEPTH: usize = 100;
pub const DEFAULT_SEED: u64 = 42;

/// Paths of the build inputs.
#[derive(Debug, Clone)]
pub struct InputFiles {
    pub queries: PathBuf,
    pub docs: PathBuf,
    pub run: PathBuf,
    pub qrels: PathBuf,
    pub embeddings: PathBuf,
    pub model_config: PathBuf,
}

impl InputFiles {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        InputFiles {
            queries: dir.join("queries.tsv"),
            docs: dir.join("docs.tsv"),
            run: dir.join("run.txt"),
            qrels: dir.join("qrels.txt"),
            embeddings: dir.join("embeddings.txt"),
            model_config: dir.join("model.toml"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Cluster count; `None` picks [`default_cluster_count`].
    pub clusters_k: Option<usize>,
    pub seed: u64,
    pub candidate_depth: usize,
    pub relevance_threshold: u32,
    pub title_overrides: BTreeMap<String, String>,
    /// Build timestamp (Unix seconds); `None` uses the current time.
    pub built_at: Option<u64>,
    /// Collection name; the file-based build defaults to the docs file stem.
    pub collection: Option<String>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            clusters_k: None,
            seed: DEFAULT_SEED,
            candidate_depth: DEFAULT_CANDIDATE_DEPTH,
            relevance_threshold: 1,
            title_overrides: BTreeMap::new(),
            built_at: None,
            collection: None,
        }
    }
}

/// Already parsed inputs.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub queries: BTreeMap<String, String>,
    pub docs: BTreeMap<String, String>,
    pub run: Vec<RunEntry>,
    pub qrels: Vec<QrelEntry>,
    pub table: EmbeddingTable,
    pub bank: KernelBank,
}

impl Inputs {
    pub fn read(files: &InputFiles) -> Result<Self> {
        Ok(Inputs {
            queries: parse_file(&files.queries, parse_tsv_texts)?,
            docs: parse_file(&files.docs, parse_tsv_texts)?,
            run: parse_file(&files.run, parse_run)?,
            qrels: parse_file(&files.qrels, parse_qrels)?,
            table: parse_file(&files.embeddings, EmbeddingTable::load)?,
            bank: KernelBank::from_path(&files.model_config)?,
        })
    }
}

pub fn read_title_overrides(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_file(path, parse_title_overrides)
}

/// Parses every input file and builds the snapshot.
pub fn build_snapshot(files: &InputFiles, options: &BuildOptions) -> Result<RunSnapshot> {
    let inputs = Inputs::read(files)?;
    let mut options = options.clone();
    if options.collection.is_none() {
        options.collection = files.docs.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    build_from_inputs(inputs, &options)
}

pub fn build_from_inputs(inputs: Inputs, options: &BuildOptions) -> Result<RunSnapshot> {
    if options.candidate_depth == 0 {
        return Err(Error::Build("candidate depth must be at least 1".into()));
    }
    check_references(&inputs)?;
    let Inputs {
        queries: query_texts,
        docs: doc_texts,
        run,
        qrels,
        table,
        bank,
    } = inputs;
    let mut warnings = Vec::new();

    let mut baseline: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
    for entry in run {
        baseline.entry(entry.query_id.clone()).or_default().push(entry);
    }
    for entries in baseline.values_mut() {
        entries.sort_by_key(|e| e.rank);
        entries.truncate(options.candidate_depth);
    }

    let mut queries = BTreeMap::new();
    let mut docs: BTreeMap<String, TextRecord> = BTreeMap::new();
    baseline.retain(|query_id, entries| {
        let record = TextRecord::new(query_texts[query_id].clone());
        if record.tokens.is_empty() {
            warnings.push(format!("query {query_id} has no tokens; skipped"));
            return false;
        }
        entries.retain(|e| {
            let doc = docs
                .entry(e.doc_id.clone())
                .or_insert_with(|| TextRecord::new(doc_texts[&e.doc_id].clone()));
            if doc.tokens.is_empty() {
                warnings.push(format!("document {} has no tokens; dropped from query {query_id}", e.doc_id));
                return false;
            }
            true
        });
        if entries.is_empty() {
            warnings.push(format!("query {query_id} has no usable candidates; skipped"));
            return false;
        }
        queries.insert(query_id.clone(), record);
        true
    });
    docs.retain(|_, d| !d.tokens.is_empty());
    warnings.sort();
    warnings.dedup();

    let reranked: BTreeMap<String, Vec<ScoredDocument>> = baseline
        .par_iter()
        .map(|(query_id, entries)| {
            let candidates: Vec<Candidate> = entries
                .iter()
                .enumerate()
                .map(|(pos, e)| Candidate {
                    doc_id: e.doc_id.clone(),
                    terms: docs[&e.doc_id].terms(),
                    baseline_rank: pos as u32 + 1,
                })
                .collect();
            let scored = rerank(&queries[query_id].terms(), &candidates, &table, &bank)?;
            Ok((query_id.clone(), scored))
        })
        .collect::<Result<_>>()?;

    let mut qrels_by_query: BTreeMap<String, Vec<QrelEntry>> = BTreeMap::new();
    for q in qrels.into_iter().filter(|q| queries.contains_key(&q.query_id)) {
        qrels_by_query.entry(q.query_id.clone()).or_default().push(q);
    }

    let mut snapshot = RunSnapshot {
        collection: options.collection.clone().unwrap_or_else(|| "collection".into()),
        built_at: options.built_at.unwrap_or_else(now_unix),
        candidate_depth: options.candidate_depth,
        relevance_threshold: options.relevance_threshold,
        embedding_dimension: table.dimension(),
        vocabulary_size: table.len(),
        bank,
        queries,
        docs,
        baseline,
        qrels: qrels_by_query,
        reranked,
        summaries: BTreeMap::new(),
        clusters: Vec::new(),
        warnings,
    };
    snapshot.summaries = summarize(&snapshot);
    snapshot.clusters = build_clusters(&snapshot, &table, options)?;
    Ok(snapshot)
}

/// Every run entry must name a known query and document.
fn check_references(inputs: &Inputs) -> Result<()> {
    let missing_queries: BTreeSet<&str> = inputs
        .run
        .iter()
        .filter(|e| !inputs.queries.contains_key(&e.query_id))
        .map(|e| e.query_id.as_str())
        .collect();
    let missing_docs: BTreeSet<&str> = inputs
        .run
        .iter()
        .filter(|e| !inputs.docs.contains_key(&e.doc_id))
        .map(|e| e.doc_id.as_str())
        .collect();
    if missing_queries.is_empty() && missing_docs.is_empty() {
        return Ok(());
    }
    let mut parts = Vec::new();
    if !missing_queries.is_empty() {
        parts.push(format!(
            "unknown query ids in run: {}",
            missing_queries.into_iter().collect::<Vec<_>>().join(", ")
        ));
    }
    if !missing_docs.is_empty() {
        parts.push(format!(
            "unknown document ids in run: {}",
            missing_docs.into_iter().collect::<Vec<_>>().join(", ")
        ));
    }
    Err(Error::Build(parts.join("; ")))
}

fn summarize(snapshot: &RunSnapshot) -> BTreeMap<String, QuerySummary> {
    snapshot
        .reranked
        .iter()
        .map(|(query_id, scored)| {
            let model: Vec<&str> = scored.iter().map(|d| d.doc_id.as_str()).collect();
            let base: Vec<&str> = snapshot.baseline[query_id].iter().map(|e| e.doc_id.as_str()).collect();
            let summary = QuerySummary::new(
                query_id,
                &snapshot.queries[query_id].text,
                &model,
                &base,
                &snapshot.judgments(query_id),
                snapshot.relevance_threshold,
            );
            (query_id.clone(), summary)
        })
        .collect()
}

fn build_clusters(snapshot: &RunSnapshot, table: &EmbeddingTable, options: &BuildOptions) -> Result<Vec<Cluster>> {
    let mut vectors = BTreeMap::new();
    let mut unclustered = Vec::new();
    for (query_id, record) in &snapshot.queries {
        match query_vector(&record.terms(), table) {
            Some(v) => {
                vectors.insert(query_id.clone(), v);
            }
            None => unclustered.push(query_id.clone()),
        }
    }

    let k = options
        .clusters_k
        .unwrap_or_else(|| default_cluster_count(vectors.len()));
    let mut groups = Vec::new();
    if !vectors.is_empty() {
        if k == 0 {
            return Err(Error::Build("cluster count must be at least 1".into()));
        }
        groups = cluster_queries(&vectors, k, options.seed).map_err(|e| Error::Build(e.to_string()))?;
    }

    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|g| {
            let member_terms: Vec<Vec<String>> = g.members.iter().map(|q| snapshot.queries[q].terms()).collect();
            let title = auto_title(&g.cluster_id, member_terms.iter().map(Vec::as_slice), &options.title_overrides);
            make_cluster(snapshot, g.cluster_id, title, g.members)
        })
        .collect();
    if !unclustered.is_empty() {
        let title = options
            .title_overrides
            .get(UNCLUSTERED_ID)
            .cloned()
            .unwrap_or_else(|| UNCLUSTERED_ID.to_string());
        clusters.push(make_cluster(snapshot, UNCLUSTERED_ID.to_string(), title, unclustered));
    }
    Ok(clusters)
}

fn make_cluster(snapshot: &RunSnapshot, cluster_id: String, title: String, members: Vec<String>) -> Cluster {
    let summaries: Vec<&QuerySummary> = members.iter().map(|q| &snapshot.summaries[q]).collect();
    let ranks: Vec<_> = summaries.iter().map(|s| s.first_relevant_rank).collect();
    let deltas: Vec<f64> = summaries.iter().filter_map(|s| s.delta).map(|d| d as f64).collect();
    Cluster {
        cluster_id,
        title,
        median_first_relevant_rank: median_metric(&ranks).expect("clusters are nonempty"),
        median_delta: median(&deltas),
        member_query_ids: members,
    }
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
