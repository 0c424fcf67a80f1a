//! JSON payloads. Field names are part of the public API (see
//! `docs/api.md`); every number is copied from the snapshot unchanged.

use serde::Serialize;

use crate::analytics::{Cluster, QuerySummary, Rank};
use crate::kernel::{apply_kernels, KernelBank, KernelScore, ScoredDocument};
use crate::snapshot::{RunSnapshot, TextRecord};

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelBankDto {
    pub mus: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub exact_match_index: Option<usize>,
}

impl From<&KernelBank> for KernelBankDto {
    fn from(bank: &KernelBank) -> Self {
        KernelBankDto {
            mus: bank.kernels().iter().map(|k| k.mu).collect(),
            sigmas: bank.kernels().iter().map(|k| k.sigma).collect(),
            weights: bank.kernels().iter().map(|k| k.weight).collect(),
            bias: bank.bias(),
            exact_match_index: bank.exact_match_index(),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetaDto {
    pub collection: String,
    pub query_count: usize,
    pub document_count: usize,
    pub candidate_depth: usize,
    pub cluster_count: usize,
    pub unjudged_query_count: usize,
    pub relevance_threshold: u32,
    pub embedding_dimension: usize,
    pub vocabulary_size: usize,
    pub built_at: u64,
    pub kernel_bank: KernelBankDto,
    pub warnings: Vec<String>,
}

impl MetaDto {
    pub fn new(s: &RunSnapshot) -> Self {
        MetaDto {
            collection: s.collection.clone(),
            query_count: s.query_count(),
            document_count: s.docs.len(),
            candidate_depth: s.candidate_depth,
            cluster_count: s.clusters.len(),
            unjudged_query_count: s.summaries.values().filter(|q| q.is_unjudged()).count(),
            relevance_threshold: s.relevance_threshold,
            embedding_dimension: s.embedding_dimension,
            vocabulary_size: s.vocabulary_size,
            built_at: s.built_at,
            kernel_bank: (&s.bank).into(),
            warnings: s.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterQueryDto {
    pub query_id: String,
    pub text: String,
    pub first_relevant_rank: Rank,
    pub baseline_first_relevant_rank: Rank,
    pub delta: Option<i64>,
    pub judged_count: usize,
}

impl From<&QuerySummary> for ClusterQueryDto {
    fn from(q: &QuerySummary) -> Self {
        ClusterQueryDto {
            query_id: q.query_id.clone(),
            text: q.text.clone(),
            first_relevant_rank: q.first_relevant_rank,
            baseline_first_relevant_rank: q.baseline_first_relevant_rank,
            delta: q.delta,
            judged_count: q.judged_count,
        }
    }
}

/// Queries shown on a collapsed card.
pub const COLLAPSED_QUERY_COUNT: usize = 3;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterCardDto {
    pub cluster_id: String,
    pub title: String,
    pub median_first_relevant_rank: Option<f64>,
    pub median_delta: Option<f64>,
    pub member_count: usize,
    pub collapsed_count: usize,
    pub queries: Vec<ClusterQueryDto>,
}

impl ClusterCardDto {
    pub fn new(cluster: &Cluster, queries: Vec<ClusterQueryDto>) -> Self {
        ClusterCardDto {
            cluster_id: cluster.cluster_id.clone(),
            title: cluster.title.clone(),
            median_first_relevant_rank: cluster.median_first_relevant_rank,
            median_delta: cluster.median_delta,
            member_count: cluster.member_query_ids.len(),
            collapsed_count: queries.len().min(COLLAPSED_QUERY_COUNT),
            queries,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TokenDto {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub oov: bool,
}

fn tokens(record: &TextRecord, oov: &[bool]) -> Vec<TokenDto> {
    record
        .tokens
        .iter()
        .zip(oov)
        .map(|(t, &oov)| TokenDto {
            text: t.text.clone(),
            start: t.start,
            end: t.end,
            oov,
        })
        .collect()
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DocumentDto {
    pub doc_id: String,
    pub rank: u32,
    pub baseline_rank: u32,
    pub overall: f64,
    pub bias: f64,
    pub per_kernel: Vec<KernelScore>,
    pub judged: bool,
    pub grade: Option<u32>,
    pub relevant: bool,
    /// Unjudged and ranked above the first judged-relevant document.
    pub pool_bias_flag: bool,
    pub text: String,
    pub tokens: Vec<TokenDto>,
    /// `[queryTerm][docTerm]` cosine similarities.
    pub similarity_matrix: Vec<Vec<f64>>,
    /// `[kernel][queryTerm][docTerm]` activations.
    pub kernel_activations: Vec<Vec<Vec<f64>>>,
}

impl DocumentDto {
    pub fn new(snapshot: &RunSnapshot, query_id: &str, doc: &ScoredDocument) -> Self {
        let judgments = snapshot.judgments(query_id);
        let grade = judgments.get(&doc.doc_id).copied();
        let relevant = grade.is_some_and(|g| g >= snapshot.relevance_threshold);
        let first_relevant = snapshot
            .summaries
            .get(query_id)
            .map_or(Rank::Unfound, |s| s.first_relevant_rank);
        let record = &snapshot.docs[&doc.doc_id];
        DocumentDto {
            doc_id: doc.doc_id.clone(),
            rank: doc.rank,
            baseline_rank: doc.baseline_rank,
            overall: doc.breakdown.overall,
            bias: doc.breakdown.bias,
            per_kernel: doc.breakdown.per_kernel.clone(),
            judged: grade.is_some(),
            grade,
            relevant,
            pool_bias_flag: grade.is_none() && Rank::Found(doc.rank) < first_relevant,
            text: record.text.clone(),
            tokens: tokens(record, &doc.matrix.doc_oov),
            similarity_matrix: doc.matrix.values.clone(),
            kernel_activations: apply_kernels(&doc.matrix, &snapshot.bank).to_nested(),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryResultDto {
    pub query_id: String,
    pub text: String,
    pub query_terms: Vec<TokenDto>,
    pub first_relevant_rank: Rank,
    pub baseline_first_relevant_rank: Rank,
    pub delta: Option<i64>,
    pub judged_count: usize,
    pub total: usize,
    pub offset: usize,
    pub count: usize,
    pub documents: Vec<DocumentDto>,
    pub kernel_bank: KernelBankDto,
}

impl QueryResultDto {
    /// `None` for an unknown query.
    pub fn new(snapshot: &RunSnapshot, query_id: &str, offset: usize, count: usize) -> Option<Self> {
        let scored = snapshot.reranked.get(query_id)?;
        let summary = &snapshot.summaries[query_id];
        let record = &snapshot.queries[query_id];
        let query_oov = scored.first().map(|d| d.matrix.query_oov.clone()).unwrap_or_default();
        let documents = scored
            .iter()
            .skip(offset)
            .take(count)
            .map(|d| DocumentDto::new(snapshot, query_id, d))
            .collect();
        Some(QueryResultDto {
            query_id: query_id.to_string(),
            text: record.text.clone(),
            query_terms: tokens(record, &query_oov),
            first_relevant_rank: summary.first_relevant_rank,
            baseline_first_relevant_rank: summary.baseline_first_relevant_rank,
            delta: summary.delta,
            judged_count: summary.judged_count,
            total: scored.len(),
            offset,
            count,
            documents,
            kernel_bank: (&snapshot.bank).into(),
        })
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelPairDto {
    pub kernel: usize,
    pub mu: f64,
    pub sigma: f64,
    pub weight: f64,
    pub left_phi: f64,
    pub right_phi: f64,
    pub left_contribution: f64,
    pub right_contribution: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompareDto {
    pub query_id: String,
    pub text: String,
    pub query_terms: Vec<TokenDto>,
    pub left: DocumentDto,
    pub right: DocumentDto,
    pub per_kernel_pairs: Vec<KernelPairDto>,
    pub kernel_bank: KernelBankDto,
}

impl CompareDto {
    /// `None` when the query is unknown or either document is not one of
    /// its candidates.
    pub fn new(snapshot: &RunSnapshot, query_id: &str, left_id: &str, right_id: &str) -> Option<Self> {
        let scored = snapshot.reranked.get(query_id)?;
        let find = |id: &str| scored.iter().find(|d| d.doc_id == id);
        let (left, right) = (find(left_id)?, find(right_id)?);
        let record = &snapshot.queries[query_id];
        let per_kernel_pairs = snapshot
            .bank
            .kernels()
            .iter()
            .enumerate()
            .map(|(k, kernel)| {
                let (l, r) = (left.breakdown.per_kernel[k], right.breakdown.per_kernel[k]);
                KernelPairDto {
                    kernel: k,
                    mu: kernel.mu,
                    sigma: kernel.sigma,
                    weight: kernel.weight,
                    left_phi: l.phi,
                    right_phi: r.phi,
                    left_contribution: l.contribution,
                    right_contribution: r.contribution,
                }
            })
            .collect();
        Some(CompareDto {
            query_id: query_id.to_string(),
            text: record.text.clone(),
            query_terms: tokens(record, &left.matrix.query_oov),
            left: DocumentDto::new(snapshot, query_id, left),
            right: DocumentDto::new(snapshot, query_id, right),
            per_kernel_pairs,
            kernel_bank: (&snapshot.bank).into(),
        })
    }
}
