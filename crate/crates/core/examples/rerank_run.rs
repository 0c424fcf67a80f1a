// Re-rank one query's first-stage candidates from the desk fixture and report
// where the first relevant passage moved.
//
//     cargo run --example rerank_run [-- <query-id>]

use std::path::PathBuf;

use rerank_explorer::analytics::{first_relevant_rank, rank_delta, Rank};
use rerank_explorer::{rerank, Candidate, InputFiles, Inputs};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/desk")
}

/// Returns (baseline first-relevant rank, re-ranked first-relevant rank).
pub fn run_query(query_id: &str) -> anyhow::Result<(Rank, Rank)> {
    let inputs = Inputs::read(&InputFiles::in_dir(fixture_dir()))?;
    let query = rerank_explorer::tokenize::terms(&inputs.queries[query_id]);

    let mut run: Vec<_> = inputs.run.iter().filter(|e| e.query_id == query_id).collect();
    run.sort_by_key(|e| e.rank);
    let candidates: Vec<Candidate> = run
        .iter()
        .enumerate()
        .map(|(pos, e)| Candidate {
            doc_id: e.doc_id.clone(),
            terms: rerank_explorer::tokenize::terms(&inputs.docs[&e.doc_id]),
            baseline_rank: pos as u32 + 1,
        })
        .collect();

    let ranked = rerank(&query, &candidates, &inputs.table, &inputs.bank)?;
    let judgments = inputs
        .qrels
        .iter()
        .filter(|q| q.query_id == query_id)
        .map(|q| (q.doc_id.clone(), q.relevance))
        .collect();

    println!("{query_id}: {:?}, {} candidates", inputs.queries[query_id], ranked.len());
    for doc in ranked.iter().take(5) {
        println!(
            "  #{:<3} {} (was #{:<3}) score {:.4}",
            doc.rank,
            doc.doc_id,
            doc.baseline_rank,
            doc.overall()
        );
    }
    let baseline_ids: Vec<&str> = candidates.iter().map(|c| c.doc_id.as_str()).collect();
    let model_ids: Vec<&str> = ranked.iter().map(|d| d.doc_id.as_str()).collect();
    let before = first_relevant_rank(&baseline_ids, &judgments, 1);
    let after = first_relevant_rank(&model_ids, &judgments, 1);
    match rank_delta(before, after) {
        Some(delta) => println!("first relevant: {before} -> {after} (delta {delta:+})"),
        None => println!("first relevant: {before} -> {after} (delta undefined)"),
    }
    Ok((before, after))
}

pub fn run_example() -> anyhow::Result<(Rank, Rank)> {
    run_query("q01")
}

fn main() -> anyhow::Result<()> {
    match std::env::args().nth(1) {
        Some(id) => run_query(&id)?,
        None => run_example()?,
    };
    Ok(())
}
