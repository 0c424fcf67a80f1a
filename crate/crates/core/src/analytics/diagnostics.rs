//! Aggregate kernel behavior across a whole run, plus the pool-bias count.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::kernel::KernelBank;
use crate::snapshot::RunSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelStat {
    pub index: usize,
    pub mu: f64,
    pub sigma: f64,
    pub weight: f64,
    /// Mean `|contribution|` over every scored (query, candidate) pair.
    pub mean_abs_contribution: f64,
    /// Population variance of the contribution across one query's
    /// candidates, averaged over queries.
    pub mean_within_query_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelDiagnostics {
    pub kernels: Vec<KernelStat>,
    pub query_count: usize,
    pub pair_count: usize,
    /// Queries where some unjudged candidate ranks above the best-ranked
    /// judged-relevant one. Queries with no judged-relevant candidate count
    /// as soon as they have any unjudged candidate.
    pub unjudged_above_judged: usize,
    pub flagged_queries: Vec<String>,
}

impl KernelDiagnostics {
    pub fn kernel_by_mu(&self, mu: f64) -> Option<&KernelStat> {
        self.kernels.iter().find(|k| k.mu == mu)
    }

    /// Fixed-width text table, one row per kernel.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "kernel diagnostics over {} queries, {} scored candidates",
            self.query_count, self.pair_count
        );
        let _ = writeln!(
            out,
            "{:>3}  {:>6}  {:>6}  {:>9}  {:>14}  {:>14}",
            "k", "mu", "sigma", "weight", "mean|contrib|", "within-q var"
        );
        for k in &self.kernels {
            let _ = writeln!(
                out,
                "{:>3}  {:>6.2}  {:>6.3}  {:>9.4}  {:>14.6}  {:>14.6e}",
                k.index, k.mu, k.sigma, k.weight, k.mean_abs_contribution, k.mean_within_query_variance
            );
        }
        if let (Some(exact), Some(near)) = (self.kernel_by_mu(1.0), self.kernel_by_mu(0.9)) {
            let verdict = if exact.mean_within_query_variance < near.mean_within_query_variance {
                "yes"
            } else {
                "no"
            };
            let _ = writeln!(
                out,
                "exact-match kernel variance {:.6e} < mu=0.9 kernel variance {:.6e}: {verdict}",
                exact.mean_within_query_variance, near.mean_within_query_variance
            );
        }
        let _ = writeln!(
            out,
            "queries with an unjudged document above the first judged-relevant one: {}",
            self.unjudged_above_judged
        );
        for q in &self.flagged_queries {
            let _ = writeln!(out, "  {q}");
        }
        out
    }
}

pub fn kernel_diagnostics(snapshot: &RunSnapshot) -> KernelDiagnostics {
    let bank: &KernelBank = &snapshot.bank;
    let k_count = bank.len();
    let mut abs_sum = vec![0.0; k_count];
    let mut variance_sum = vec![0.0; k_count];
    let mut pair_count = 0usize;
    let mut query_count = 0usize;
    let mut flagged_queries = Vec::new();

    for (query_id, docs) in &snapshot.reranked {
        if docs.is_empty() {
            continue;
        }
        query_count += 1;
        pair_count += docs.len();
        let n = docs.len() as f64;
        for k in 0..k_count {
            let contribs: Vec<f64> = docs.iter().map(|d| d.breakdown.per_kernel[k].contribution).collect();
            abs_sum[k] += contribs.iter().map(|c| c.abs()).sum::<f64>();
            let mean = contribs.iter().sum::<f64>() / n;
            variance_sum[k] += contribs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
        }

        let judgments = snapshot.judgments(query_id);
        let threshold = snapshot.relevance_threshold;
        let first_unjudged = docs.iter().find(|d| !judgments.contains_key(&d.doc_id)).map(|d| d.rank);
        let first_relevant = docs
            .iter()
            .find(|d| judgments.get(&d.doc_id).is_some_and(|&g| g >= threshold))
            .map(|d| d.rank);
        let flagged = match (first_unjudged, first_relevant) {
            (Some(u), Some(r)) => u < r,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if flagged {
            flagged_queries.push(query_id.clone());
        }
    }

    let kernels = bank
        .kernels()
        .iter()
        .enumerate()
        .map(|(index, kernel)| KernelStat {
            index,
            mu: kernel.mu,
            sigma: kernel.sigma,
            weight: kernel.weight,
            mean_abs_contribution: if pair_count > 0 { abs_sum[index] / pair_count as f64 } else { 0.0 },
            mean_within_query_variance: if query_count > 0 {
                variance_sum[index] / query_count as f64
            } else {
                0.0
            },
        })
        .collect();

    KernelDiagnostics {
        kernels,
        query_count,
        pair_count,
        unjudged_above_judged: flagged_queries.len(),
        flagged_queries,
    }
}
