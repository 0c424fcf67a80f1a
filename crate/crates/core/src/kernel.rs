//! Kernel-pooling scoring with every intermediate kept.
//!
//! A document is scored in four steps: a query x document cosine matrix,
//! Gaussian kernel activations over every cell, soft-TF pooling into one
//! feature per kernel, and an affine combination of those features. Because
//! the final step is affine, each kernel's contribution to the overall score
//! is additive and can be shown on its own.
//!
//! Summation order is fixed (document terms, then query terms, then kernels,
//! all ascending) so results do not depend on how callers parallelize.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine_slices, EmbeddingTable};
use crate::error::{Error, Result};

/// Floor applied to soft-TF values before taking the log.
pub const LOG_CLAMP: f64 = 1e-10;

/// Centers of the standard bank, exact-match kernel first.
pub const STANDARD_MUS: [f64; 11] = [1.0, 0.9, 0.7, 0.5, 0.3, 0.1, -0.1, -0.3, -0.5, -0.7, -0.9];
pub const STANDARD_SIGMA: f64 = 0.1;
pub const EXACT_MATCH_SIGMA: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernel {
    pub mu: f64,
    pub sigma: f64,
    pub weight: f64,
}

impl Kernel {
    /// `exp(-(u - mu)^2 / (2 sigma^2))`.
    pub fn value(&self, u: f64) -> f64 {
        kernel_value(u, self)
    }

    pub fn is_exact_match(&self) -> bool {
        self.mu == 1.0
    }
}

pub fn kernel_value(u: f64, kernel: &Kernel) -> f64 {
    let diff = u - kernel.mu;
    (-(diff * diff) / (2.0 * kernel.sigma * kernel.sigma)).exp()
}

/// Ordered Gaussian kernels (strictly decreasing `mu`) plus a bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBank {
    kernels: Vec<Kernel>,
    bias: f64,
}

impl KernelBank {
    pub fn new(kernels: Vec<Kernel>, bias: f64) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::Config("kernel bank needs at least one kernel".into()));
        }
        for (k, kernel) in kernels.iter().enumerate() {
            if !(kernel.sigma.is_finite() && kernel.sigma > 0.0) {
                return Err(Error::Config(format!("kernel {k}: sigma must be > 0, got {}", kernel.sigma)));
            }
            if !(-1.0..=1.0).contains(&kernel.mu) {
                return Err(Error::Config(format!("kernel {k}: mu {} outside [-1, 1]", kernel.mu)));
            }
            if !kernel.weight.is_finite() {
                return Err(Error::Config(format!("kernel {k}: weight is not finite")));
            }
        }
        if let Some(k) = kernels.windows(2).position(|w| w[1].mu >= w[0].mu) {
            return Err(Error::Config(format!(
                "kernel mus must be strictly decreasing (kernel {} mu {} follows {})",
                k + 1,
                kernels[k + 1].mu,
                kernels[k].mu
            )));
        }
        if !bias.is_finite() {
            return Err(Error::Config("bias is not finite".into()));
        }
        Ok(KernelBank { kernels, bias })
    }

    /// The 11-kernel bank with unit weights and zero bias.
    pub fn standard() -> Self {
        Self::standard_with_weights(&[1.0; 11], 0.0).expect("standard bank is valid")
    }

    pub fn standard_with_weights(weights: &[f64], bias: f64) -> Result<Self> {
        if weights.len() != STANDARD_MUS.len() {
            return Err(Error::Config(format!(
                "standard bank takes {} weights, got {}",
                STANDARD_MUS.len(),
                weights.len()
            )));
        }
        let kernels = STANDARD_MUS
            .iter()
            .zip(weights)
            .map(|(&mu, &weight)| Kernel {
                mu,
                sigma: if mu == 1.0 { EXACT_MATCH_SIGMA } else { STANDARD_SIGMA },
                weight,
            })
            .collect();
        Self::new(kernels, bias)
    }

    /// Parses the TOML model config. Both keys are optional; a missing
    /// `kernels` list means the standard bank with unit weights.
    ///
    /// ```toml
    /// bias = 0.5
    ///
    /// [[kernels]]
    /// mu = 1.0
    /// sigma = 0.001
    /// weight = 1.0
    /// ```
    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct ModelConfig {
            kernels: Option<Vec<Kernel>>,
            bias: Option<f64>,
        }
        let config: ModelConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let bias = config.bias.unwrap_or(0.0);
        match config.kernels {
            Some(kernels) => Self::new(kernels, bias),
            None => Self::standard_with_weights(&[1.0; 11], bias),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_toml(&text).map_err(|e| e.in_file(path))
    }

    pub fn to_toml(&self) -> String {
        let mut out = format!("bias = {:?}\n", self.bias);
        for k in &self.kernels {
            out.push_str(&format!(
                "\n[[kernels]]\nmu = {:?}\nsigma = {:?}\nweight = {:?}\n",
                k.mu, k.sigma, k.weight
            ));
        }
        out
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Index of the `mu = 1.0` kernel, if the bank has one.
    pub fn exact_match_index(&self) -> Option<usize> {
        self.kernels.iter().position(Kernel::is_exact_match)
    }

    /// Index of the kernel whose center is exactly `mu`.
    pub fn index_of(&self, mu: f64) -> Option<usize> {
        self.kernels.iter().position(|k| k.mu == mu)
    }
}

impl Default for KernelBank {
    fn default() -> Self {
        Self::standard()
    }
}

/// Cosine similarity of every query term against every document term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityMatrix {
    pub query_terms: Vec<String>,
    pub doc_terms: Vec<String>,
    /// `values[i][j]` for query term `i`, document term `j`.
    pub values: Vec<Vec<f64>>,
    pub query_oov: Vec<bool>,
    pub doc_oov: Vec<bool>,
}

impl SimilarityMatrix {
    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.doc_terms.len()
    }
}

pub fn build_similarity_matrix(
    query: &[String],
    doc: &[String],
    table: &EmbeddingTable,
) -> Result<SimilarityMatrix> {
    if query.is_empty() {
        return Err(Error::contract("similarity matrix for an empty query"));
    }
    if doc.is_empty() {
        return Err(Error::contract("similarity matrix for an empty document"));
    }
    let query_vecs: Vec<_> = query.iter().map(|t| table.lookup(t)).collect();
    let doc_vecs: Vec<_> = doc.iter().map(|t| table.lookup(t)).collect();

    let mut values = Vec::with_capacity(query.len());
    for q in &query_vecs {
        let mut row = Vec::with_capacity(doc.len());
        for d in &doc_vecs {
            row.push(match (q, d) {
                (Some(q), Some(d)) => cosine_slices(&q.vector, &d.vector)?,
                _ => 0.0,
            });
        }
        values.push(row);
    }

    Ok(SimilarityMatrix {
        query_terms: query.to_vec(),
        doc_terms: doc.to_vec(),
        values,
        query_oov: query_vecs.iter().map(Option::is_none).collect(),
        doc_oov: doc_vecs.iter().map(Option::is_none).collect(),
    })
}

/// Kernel activations for every (query term, document term, kernel).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelActivations {
    query_len: usize,
    doc_len: usize,
    kernel_count: usize,
    /// Laid out kernel-major: `[k][i][j]`.
    values: Vec<f64>,
}

impl KernelActivations {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(k * self.query_len + i) * self.doc_len + j]
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.query_len, self.doc_len, self.kernel_count)
    }

    /// Row `i` of kernel `k`, one activation per document term.
    pub fn row(&self, k: usize, i: usize) -> &[f64] {
        let start = (k * self.query_len + i) * self.doc_len;
        &self.values[start..start + self.doc_len]
    }

    /// Nested `[k][i][j]` copy, the layout the API ships.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.kernel_count)
            .map(|k| (0..self.query_len).map(|i| self.row(k, i).to_vec()).collect())
            .collect()
    }
}

pub fn apply_kernels(matrix: &SimilarityMatrix, bank: &KernelBank) -> KernelActivations {
    let (n, m, kc) = (matrix.rows(), matrix.cols(), bank.len());
    let mut values = Vec::with_capacity(n * m * kc);
    for kernel in bank.kernels() {
        for row in &matrix.values {
            values.extend(row.iter().map(|&u| kernel_value(u, kernel)));
        }
    }
    KernelActivations {
        query_len: n,
        doc_len: m,
        kernel_count: kc,
        values,
    }
}

/// Per-kernel, per-query-term soft-TF: `soft_tf[k][i]` sums the activations
/// of query term `i` over all document terms.
pub fn soft_tf(activations: &KernelActivations) -> Vec<Vec<f64>> {
    (0..activations.kernel_count)
        .map(|k| {
            (0..activations.query_len)
                .map(|i| activations.row(k, i).iter().sum())
                .collect()
        })
        .collect()
}

/// One log-compressed soft-TF feature per kernel.
pub fn pool(activations: &KernelActivations) -> Vec<f64> {
    soft_tf(activations)
        .iter()
        .map(|per_term| per_term.iter().map(|&s| s.max(LOG_CLAMP).ln()).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelScore {
    /// Pooled soft-TF feature.
    pub phi: f64,
    /// `weight * phi`.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreBreakdown {
    pub overall: f64,
    pub bias: f64,
    pub per_kernel: Vec<KernelScore>,
}

impl ScoreBreakdown {
    pub fn contributions(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_kernel.iter().map(|k| k.contribution)
    }
}

pub fn score(features: &[f64], bank: &KernelBank) -> Result<ScoreBreakdown> {
    if features.len() != bank.len() {
        return Err(Error::contract(format!(
            "{} features for a bank of {} kernels",
            features.len(),
            bank.len()
        )));
    }
    let per_kernel: Vec<KernelScore> = features
        .iter()
        .zip(bank.kernels())
        .map(|(&phi, k)| KernelScore {
            phi,
            contribution: k.weight * phi,
        })
        .collect();
    let weighted: f64 = per_kernel.iter().map(|k| k.contribution).sum();
    Ok(ScoreBreakdown {
        overall: bank.bias() + weighted,
        bias: bank.bias(),
        per_kernel,
    })
}

/// A candidate document as it arrives from the first-stage run.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub doc_id: String,
    pub terms: Vec<String>,
    pub baseline_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoredDocument {
    pub doc_id: String,
    /// 1-based rank after re-scoring.
    pub rank: u32,
    pub baseline_rank: u32,
    pub breakdown: ScoreBreakdown,
    pub matrix: SimilarityMatrix,
}

impl ScoredDocument {
    pub fn overall(&self) -> f64 {
        self.breakdown.overall
    }
}

/// Scores one document without ranking it.
pub fn score_document(
    query: &[String],
    doc: &[String],
    table: &EmbeddingTable,
    bank: &KernelBank,
) -> Result<(ScoreBreakdown, SimilarityMatrix)> {
    let matrix = build_similarity_matrix(query, doc, table)?;
    let activations = apply_kernels(&matrix, bank);
    let breakdown = score(&pool(&activations), bank)?;
    Ok((breakdown, matrix))
}

/// Scores every candidate and sorts by overall score, descending. Exact
/// ties fall back to baseline rank, then document id.
pub fn rerank(
    query: &[String],
    candidates: &[Candidate],
    table: &EmbeddingTable,
    bank: &KernelBank,
) -> Result<Vec<ScoredDocument>> {
    if candidates.is_empty() {
        return Err(Error::contract("rerank called with no candidates"));
    }
    let mut scored = candidates
        .iter()
        .map(|c| {
            let (breakdown, matrix) = score_document(query, &c.terms, table, bank)?;
            Ok(ScoredDocument {
                doc_id: c.doc_id.clone(),
                rank: 0,
                baseline_rank: c.baseline_rank,
                breakdown,
                matrix,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    scored.sort_by(|a, b| {
        b.overall()
            .partial_cmp(&a.overall())
            .unwrap_or(Ordering::Equal)
            .then(a.baseline_rank.cmp(&b.baseline_rank))
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    for (pos, doc) in scored.iter_mut().enumerate() {
        doc.rank = pos as u32 + 1;
    }
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn table() -> EmbeddingTable {
        EmbeddingTable::load_str("a 1 0\nb 0 1\nc 0.6 0.8").unwrap()
    }

    fn single(mu: f64, sigma: f64, weight: f64) -> KernelBank {
        KernelBank::new(vec![Kernel { mu, sigma, weight }], 0.0).unwrap()
    }

    #[test]
    fn similarity_matrix_examples() {
        let t = table();
        let m = build_similarity_matrix(&strings(&["a"]), &strings(&["a", "b"]), &t).unwrap();
        assert_eq!(m.values, vec![vec![1.0, 0.0]]);

        let m = build_similarity_matrix(&strings(&["a"]), &strings(&["zzz"]), &t).unwrap();
        assert_eq!(m.values, vec![vec![0.0]]);
        assert_eq!(m.doc_oov, vec![true]);
        assert_eq!(m.query_oov, vec![false]);

        let m = build_similarity_matrix(&strings(&["a", "b"]), &strings(&["c"]), &t).unwrap();
        assert!((m.values[0][0] - 0.6).abs() < 1e-15);
        assert!((m.values[1][0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn similarity_matrix_rejects_empty_sides() {
        let t = table();
        assert!(matches!(
            build_similarity_matrix(&[], &strings(&["a"]), &t),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            build_similarity_matrix(&strings(&["a"]), &[], &t),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn kernel_value_examples() {
        let k = |mu, sigma| Kernel { mu, sigma, weight: 1.0 };
        assert_eq!(kernel_value(0.9, &k(0.9, 0.1)), 1.0);
        assert_eq!(kernel_value(1.0, &k(1.0, 0.001)), 1.0);
        assert!((kernel_value(1.0, &k(0.9, 0.1)) - (-0.5f64).exp()).abs() < 1e-12);
        assert!((kernel_value(1.0, &k(0.9, 0.1)) - 0.606531).abs() < 1e-6);
    }

    #[test]
    fn apply_kernels_examples() {
        let matrix = |row: Vec<f64>| SimilarityMatrix {
            query_terms: strings(&["q"]),
            doc_terms: (0..row.len()).map(|j| format!("d{j}")).collect(),
            query_oov: vec![false],
            doc_oov: vec![false; row.len()],
            values: vec![row],
        };
        let acts = apply_kernels(&matrix(vec![0.9]), &single(0.9, 0.1, 1.0));
        assert_eq!(acts.to_nested(), vec![vec![vec![1.0]]]);

        let acts = apply_kernels(&matrix(vec![0.0]), &single(1.0, 0.001, 1.0));
        assert!(acts.get(0, 0, 0) < 1e-300);

        let acts = apply_kernels(&matrix(vec![1.0, 0.7]), &single(0.7, 0.1, 1.0));
        assert!((acts.get(0, 0, 0) - (-4.5f64).exp()).abs() < 1e-12);
        assert_eq!(acts.get(0, 1, 0), 1.0);
    }

    fn acts(query_len: usize, doc_len: usize, values: Vec<f64>) -> KernelActivations {
        KernelActivations {
            query_len,
            doc_len,
            kernel_count: values.len() / (query_len * doc_len),
            values,
        }
    }

    #[test]
    fn pool_examples() {
        assert_eq!(pool(&acts(1, 1, vec![1.0])), vec![0.0]);
        assert!((pool(&acts(1, 2, vec![1.0, 1.0]))[0] - std::f64::consts::LN_2).abs() < 1e-6);
        assert_eq!(pool(&acts(2, 1, vec![1.0, 1.0])), vec![0.0]);
    }

    #[test]
    fn pool_clamps_empty_kernel() {
        let phi = pool(&acts(2, 1, vec![0.0, 0.0]));
        assert_eq!(phi, vec![2.0 * LOG_CLAMP.ln()]);
        assert!(phi[0].is_finite());
    }

    #[test]
    fn score_examples() {
        let b = score(&[0.0], &single(1.0, 0.1, 5.0)).unwrap();
        assert_eq!(b.overall, 0.0);
        assert_eq!(b.per_kernel[0].contribution, 0.0);

        let bank = KernelBank::new(
            vec![
                Kernel { mu: 0.9, sigma: 0.1, weight: 1.0 },
                Kernel { mu: 0.5, sigma: 0.1, weight: 2.0 },
            ],
            0.5,
        )
        .unwrap();
        let b = score(&[std::f64::consts::LN_2, 0.0], &bank).unwrap();
        assert!((b.overall - (0.5 + std::f64::consts::LN_2)).abs() < 1e-12);
        assert_eq!(b.bias, 0.5);

        for x in [-3.25, 0.0, 17.5] {
            assert_eq!(score(&[x], &single(0.0, 0.1, 1.0)).unwrap().overall, x);
        }
        assert!(matches!(score(&[1.0, 2.0], &single(0.0, 0.1, 1.0)), Err(Error::Contract(_))));
    }

    #[test]
    fn rerank_single_and_ties() {
        let t = table();
        let bank = KernelBank::standard();
        let q = strings(&["a"]);
        let one = rerank(
            &q,
            &[Candidate { doc_id: "d1".into(), terms: strings(&["b"]), baseline_rank: 4 }],
            &t,
            &bank,
        )
        .unwrap();
        assert_eq!(one[0].rank, 1);

        let cands = vec![
            Candidate { doc_id: "x".into(), terms: strings(&["a", "c"]), baseline_rank: 2 },
            Candidate { doc_id: "y".into(), terms: strings(&["a", "c"]), baseline_rank: 1 },
        ];
        let out = rerank(&q, &cands, &t, &bank).unwrap();
        assert_eq!(out[0].overall(), out[1].overall());
        assert_eq!(out[0].doc_id, "y");
        assert_eq!(out[1].doc_id, "x");
        assert!(rerank(&q, &[], &t, &bank).is_err());
    }

    #[test]
    fn bank_validation() {
        let k = |mu| Kernel { mu, sigma: 0.1, weight: 1.0 };
        assert!(KernelBank::new(vec![], 0.0).is_err());
        assert!(KernelBank::new(vec![k(0.5), k(0.7)], 0.0).is_err());
        assert!(KernelBank::new(vec![k(1.0), k(1.0)], 0.0).is_err());
        assert!(KernelBank::new(vec![k(1.5)], 0.0).is_err());
        assert!(KernelBank::new(vec![Kernel { mu: 0.0, sigma: 0.0, weight: 1.0 }], 0.0).is_err());
        let bank = KernelBank::standard();
        assert_eq!(bank.len(), 11);
        assert_eq!(bank.exact_match_index(), Some(0));
        assert_eq!(bank.kernels()[0].sigma, 0.001);
        assert_eq!(bank.kernels()[1].sigma, 0.1);
        assert_eq!(bank.index_of(0.9), Some(1));
    }

    #[test]
    fn model_config_parsing() {
        let bank = KernelBank::from_toml(
            "bias = 0.25\n[[kernels]]\nmu = 1.0\nsigma = 0.001\nweight = 2.0\n\
             [[kernels]]\nmu = 0.5\nsigma = 0.1\nweight = -1.5\n",
        )
        .unwrap();
        assert_eq!(bank.len(), 2);
        assert_eq!(bank.bias(), 0.25);
        assert_eq!(bank.kernels()[1].weight, -1.5);
        assert_eq!(KernelBank::from_toml(&bank.to_toml()).unwrap(), bank);

        let defaulted = KernelBank::from_toml("bias = 1.0\n").unwrap();
        assert_eq!(defaulted.len(), 11);

        let err = KernelBank::from_toml("bias = 0.0\ntemperature = 3\n").unwrap_err();
        assert!(err.to_string().contains("temperature"), "{err}");
        let err = KernelBank::from_toml("[[kernels]]\nmu = 1.0\nsigma = 0.1\nweight = 1\nwidth = 2\n")
            .unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric_in_computed_offset(
            mu in -1.0f64..=1.0,
            sigma in 0.001f64..1.0,
            delta in 0.0f64..0.5,
        ) {
            let kernel = Kernel { mu, sigma, weight: 1.0 };
            let above = mu + delta;
            let offset = above - mu;
            let below = mu - offset;
            // Only meaningful when both sides sit at the same distance in floating point.
            prop_assume!(mu - below == offset);
            prop_assert_eq!(kernel_value(above, &kernel), kernel_value(below, &kernel));
        }

        #[test]
        fn activation_decreases_with_distance(
            mu in -1.0f64..=1.0,
            sigma in 0.01f64..1.0,
            near in 0.0f64..1.0,
            extra in 0.0f64..1.0,
        ) {
            let kernel = Kernel { mu, sigma, weight: 1.0 };
            let v_near = kernel_value(mu + near, &kernel);
            let v_far = kernel_value(mu + near + extra, &kernel);
            prop_assert!(v_far <= v_near);
            prop_assert!(v_near <= 1.0);
        }
    }
}
