// Per-kernel contribution statistics and the pool-bias count for the desk
// fixture.
//
//     cargo run --example diagnostics

use std::path::PathBuf;

use rerank_explorer::analytics::{kernel_diagnostics, KernelDiagnostics};
use rerank_explorer::{build_snapshot, BuildOptions, InputFiles};

pub fn run_example() -> anyhow::Result<KernelDiagnostics> {
    let files = InputFiles::in_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/desk"));
    let snapshot = build_snapshot(&files, &BuildOptions::default())?;
    let report = kernel_diagnostics(&snapshot);
    print!("{}", report.render_table());
    Ok(report)
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
