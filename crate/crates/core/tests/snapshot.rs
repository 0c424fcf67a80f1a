mod common;

use std::collections::HashMap;
use std::io::Cursor;

use rerank_explorer::{build_snapshot, Error, RunSnapshot};

use common::{desk_dir, desk_files, desk_options, oracle_score};

fn raw_vectors() -> HashMap<String, Vec<f64>> {
    let text = std::fs::read_to_string(desk_dir().join("embeddings.txt")).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let mut fields = line.split_whitespace();
            let term = fields.next().unwrap().to_lowercase();
            (term, fields.map(|f| f.parse().unwrap()).collect())
        })
        .collect()
}

#[test]
fn cache_round_trip_is_lossless() {
    let snap = build_snapshot(&desk_files(), &desk_options()).unwrap();
    let mut bytes = Vec::new();
    snap.write_cache(&mut bytes).unwrap();
    assert!(bytes.starts_with(b"NIRX1\n"));
    let back = RunSnapshot::read_cache(Cursor::new(&bytes)).unwrap();
    assert_eq!(back, snap);

    let mut again = Vec::new();
    back.write_cache(&mut again).unwrap();
    assert_eq!(again, bytes);
}

#[test]
fn save_and_load_through_a_file() {
    let snap = build_snapshot(&desk_files(), &desk_options()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("desk.nirx");
    snap.save(&path).unwrap();
    assert_eq!(RunSnapshot::load(&path).unwrap(), snap);
}

#[test]
fn wrong_header_is_rejected() {
    let err = RunSnapshot::read_cache(Cursor::new(b"{\"collection\":\"x\"}")).unwrap_err();
    assert!(matches!(err, Error::Cache(_)), "{err}");
    let err = RunSnapshot::read_cache(Cursor::new(b"NIRX1\n{not json")).unwrap_err();
    assert!(matches!(err, Error::Cache(_)), "{err}");
}

#[test]
fn missing_cache_file_names_the_path() {
    let err = RunSnapshot::load(std::path::Path::new("/nonexistent/snap.nirx")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/snap.nirx"), "{err}");
}

#[test]
fn desk_scores_match_oracle_from_raw_vectors() {
    let snap = build_snapshot(&desk_files(), &desk_options()).unwrap();
    let raw = raw_vectors();
    let kernels: Vec<(f64, f64, f64)> = snap.bank.kernels().iter().map(|k| (k.mu, k.sigma, k.weight)).collect();
    let mut checked = 0;
    for (qid, docs) in &snap.reranked {
        let query = snap.queries[qid].terms();
        for doc in docs {
            let terms = snap.docs[&doc.doc_id].terms();
            let want = oracle_score(&query, &terms, &raw, &kernels, snap.bank.bias());
            assert!((doc.overall() - want).abs() < 1e-9, "{qid}/{}: {} vs {want}", doc.doc_id, doc.overall());
            checked += 1;
        }
    }
    assert!(checked >= 1900);
}

#[test]
fn rebuilding_gives_an_identical_snapshot() {
    let a = build_snapshot(&desk_files(), &desk_options()).unwrap();
    let b = build_snapshot(&desk_files(), &desk_options()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unfound_and_planted_queries_summarised() {
    let snap = build_snapshot(&desk_files(), &desk_options()).unwrap();
    let unfound = &snap.summaries["q14"];
    assert!(!unfound.first_relevant_rank.is_found());
    assert!(!unfound.baseline_first_relevant_rank.is_found());
    assert_eq!(unfound.delta, None);
    assert!(snap.summaries["q20"].is_unjudged());
    let planted = &snap.summaries[common::PLANTED_QUERY];
    assert!(planted.first_relevant_rank.get().unwrap() > 1);
}
