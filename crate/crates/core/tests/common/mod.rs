#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

use rerank_explorer::{BuildOptions, InputFiles};

pub fn desk_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/desk")
}

pub fn desk_files() -> InputFiles {
    InputFiles::in_dir(desk_dir())
}

/// Fixed timestamp so independently built snapshots compare equal.
pub fn desk_options() -> BuildOptions {
    BuildOptions {
        built_at: Some(1_570_000_000),
        ..BuildOptions::default()
    }
}

pub const PLANTED_QUERY: &str = "q05";

/// Brute-force kernel-pooling score straight from the definitions: raw
/// vectors, cosine as dot over norms, Gaussian kernels, log-clamped soft-TF
/// and an affine combination. Shares no code with the library.
pub fn oracle_score(
    query: &[String],
    doc: &[String],
    raw: &HashMap<String, Vec<f64>>,
    kernels: &[(f64, f64, f64)],
    bias: f64,
) -> f64 {
    let cos = |a: &str, b: &str| -> f64 {
        match (raw.get(a), raw.get(b)) {
            (Some(x), Some(y)) => {
                let mut dot = 0.0;
                let mut nx = 0.0;
                let mut ny = 0.0;
                for t in 0..x.len() {
                    dot += x[t] * y[t];
                    nx += x[t] * x[t];
                    ny += y[t] * y[t];
                }
                (dot / (nx.sqrt() * ny.sqrt())).clamp(-1.0, 1.0)
            }
            _ => 0.0,
        }
    };
    let mut total = bias;
    for &(mu, sigma, weight) in kernels {
        let mut phi = 0.0;
        for q in query {
            let mut soft_tf = 0.0;
            for d in doc {
                let u = cos(q, d);
                soft_tf += (-((u - mu) * (u - mu)) / (2.0 * sigma * sigma)).exp();
            }
            phi += if soft_tf > 1e-10 { soft_tf.ln() } else { (1e-10f64).ln() };
        }
        total += weight * phi;
    }
    total
}

/// One random scoring problem.
pub struct Instance {
    pub raw: HashMap<String, Vec<f64>>,
    pub embedding_text: String,
    pub query: Vec<String>,
    pub docs: Vec<Vec<String>>,
    pub kernels: Vec<(f64, f64, f64)>,
    pub bias: f64,
}

/// n, m <= 5 tokens, K <= 11 kernels, d <= 8 dimensions; tokens come from a
/// small vocabulary (so exact matches are common) plus two OOV words.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let dim = rng.random_range(1..=8);
    let vocab_size = rng.random_range(1..=6);
    let mut raw = HashMap::new();
    let mut embedding_text = String::new();
    let mut vocab = Vec::new();
    for v in 0..vocab_size {
        let term = format!("w{v}");
        let vector: Vec<f64> = loop {
            let cand: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            if cand.iter().any(|c: &f64| c.abs() > 1e-3) {
                break cand;
            }
        };
        embedding_text.push_str(&term);
        for c in &vector {
            embedding_text.push_str(&format!(" {c:?}"));
        }
        embedding_text.push('\n');
        raw.insert(term.clone(), vector);
        vocab.push(term);
    }
    vocab.push("oov1".into());
    vocab.push("oov2".into());

    let pick = |rng: &mut ChaCha8Rng, len: usize| -> Vec<String> {
        (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect()
    };
    let n = rng.random_range(1..=5);
    let query = pick(rng, n);
    let doc_count = rng.random_range(1..=6);
    let docs = (0..doc_count)
        .map(|_| {
            let m = rng.random_range(1..=5);
            pick(rng, m)
        })
        .collect();

    let k = rng.random_range(1..=11);
    let mut mus: Vec<f64> = Vec::new();
    while mus.len() < k {
        let mu = (rng.random_range(-1.0..1.0f64) * 1000.0).round() / 1000.0;
        if !mus.contains(&mu) && mu != 1.0 {
            mus.push(mu);
        }
    }
    if rng.random_bool(0.6) {
        mus[0] = 1.0;
    }
    mus.sort_by(|a, b| b.total_cmp(a));
    let kernels = mus
        .into_iter()
        .map(|mu| {
            let sigma = if mu == 1.0 { 0.001 } else { rng.random_range(0.05..0.5) };
            (mu, sigma, rng.random_range(-2.0..2.0))
        })
        .collect();
    Instance {
        raw,
        embedding_text,
        query,
        docs,
        kernels,
        bias: rng.random_range(-1.0..1.0),
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub async fn get(app: &axum::Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let response = app
        .clone()
        .oneshot(Request::builder().uri(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub async fn get_json(app: &axum::Router, uri: &str) -> (StatusCode, serde_json::Value) {
    let (status, bytes) = get(app, uri).await;
    (status, serde_json::from_slice(&bytes).expect("JSON body"))
}
