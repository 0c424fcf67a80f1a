// Build a snapshot from the desk fixture, write it to disk and read it back.
//
//     cargo run --example build_snapshot [-- <out-file>]

use std::path::{Path, PathBuf};

use rerank_explorer::{build_snapshot, BuildOptions, InputFiles, RunSnapshot};

pub fn build_to(out: &Path) -> anyhow::Result<RunSnapshot> {
    let files = InputFiles::in_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/desk"));
    let options = BuildOptions {
        built_at: Some(1_570_000_000),
        ..BuildOptions::default()
    };
    let snapshot = build_snapshot(&files, &options)?;
    snapshot.save(out)?;
    let size = std::fs::metadata(out)?.len();

    let loaded = RunSnapshot::load(out)?;
    anyhow::ensure!(loaded == snapshot, "snapshot changed on the way through disk");
    println!(
        "{}: {} queries, {} documents, {} clusters, {} warnings, {:.1} MB at {}",
        loaded.collection,
        loaded.query_count(),
        loaded.docs.len(),
        loaded.clusters.len(),
        loaded.warnings.len(),
        size as f64 / 1e6,
        out.display()
    );
    for warning in &loaded.warnings {
        println!("  warning: {warning}");
    }
    Ok(loaded)
}

pub fn run_example() -> anyhow::Result<RunSnapshot> {
    let dir = tempfile::tempdir()?;
    build_to(&dir.path().join("desk.nirx"))
}

fn main() -> anyhow::Result<()> {
    match std::env::args().nth(1) {
        Some(out) => build_to(Path::new(&out))?,
        None => run_example()?,
    };
    Ok(())
}
