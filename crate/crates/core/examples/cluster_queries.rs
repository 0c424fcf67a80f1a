// Group the desk fixture's queries by mean term vector and print the cluster
// cards with their median first-relevant rank and median delta.
//
//     cargo run --example cluster_queries [-- <k> <seed>]

use std::path::PathBuf;

use rerank_explorer::analytics::Cluster;
use rerank_explorer::{build_snapshot, BuildOptions, InputFiles};

fn show(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v}"))
}

pub fn cluster_with(clusters_k: Option<usize>, seed: u64) -> anyhow::Result<Vec<Cluster>> {
    let files = InputFiles::in_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/desk"));
    let options = BuildOptions {
        clusters_k,
        seed,
        built_at: Some(0),
        ..BuildOptions::default()
    };
    let snapshot = build_snapshot(&files, &options)?;
    for cluster in &snapshot.clusters {
        println!(
            "{:<12} {:<32} median rank {:>5}  median delta {:>5}",
            cluster.cluster_id,
            cluster.title,
            show(cluster.median_first_relevant_rank),
            show(cluster.median_delta)
        );
        for id in &cluster.member_query_ids {
            let summary = &snapshot.summaries[id];
            println!("    {id} {:>7} {}", summary.first_relevant_rank.to_string(), summary.text);
        }
    }
    Ok(snapshot.clusters)
}

pub fn run_example() -> anyhow::Result<Vec<Cluster>> {
    cluster_with(None, 42)
}

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let k = args.next().map(|s| s.parse()).transpose()?;
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);
    cluster_with(k, seed)?;
    Ok(())
}
