use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing::{error, info};

use rerank_explorer::analytics::kernel_diagnostics;
use rerank_explorer::api::{self, AppState};
use rerank_explorer::ingest::{read_title_overrides, DEFAULT_CANDIDATE_DEPTH, DEFAULT_SEED};
use rerank_explorer::{build_snapshot, BuildOptions, InputFiles, RunSnapshot};

#[derive(Parser)]
#[command(name = "explorer", version, about = "Build, serve and inspect re-ranking snapshots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest the inputs, re-rank, cluster, and write a snapshot file.
    Build(BuildArgs),
    /// Serve the JSON API (and optionally the UI) over HTTP.
    Serve(ServeArgs),
    /// Print per-kernel statistics and pool-bias counts.
    Diag(DiagArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    model_config: PathBuf,
    #[command(flatten)]
    options: OptionArgs,
    #[arg(long, default_value = "snapshot.nirx")]
    out: PathBuf,
}

/// Either a snapshot file or the full set of build inputs.
#[derive(Args)]
struct SourceArgs {
    #[arg(long, conflicts_with_all = ["queries", "docs", "run", "qrels", "embeddings", "model_config"])]
    snapshot: Option<PathBuf>,
    #[arg(long, required_unless_present = "snapshot")]
    queries: Option<PathBuf>,
    #[arg(long, required_unless_present = "snapshot")]
    docs: Option<PathBuf>,
    #[arg(long, required_unless_present = "snapshot")]
    run: Option<PathBuf>,
    #[arg(long, required_unless_present = "snapshot")]
    qrels: Option<PathBuf>,
    #[arg(long, required_unless_present = "snapshot")]
    embeddings: Option<PathBuf>,
    #[arg(long, required_unless_present = "snapshot")]
    model_config: Option<PathBuf>,
    #[command(flatten)]
    options: OptionArgs,
}

#[derive(Args)]
struct OptionArgs {
    /// Number of query clusters (default: max(2, ceil(sqrt(Q/2)))).
    #[arg(long)]
    clusters_k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_DEPTH)]
    candidate_depth: usize,
    /// `clusterId<TAB>title` lines replacing generated cluster titles.
    #[arg(long)]
    titles_override: Option<PathBuf>,
    /// Minimum grade that counts as relevant.
    #[arg(long, default_value_t = 1)]
    relevance_threshold: u32,
    /// Collection name shown in the UI (default: docs file stem).
    #[arg(long)]
    collection: Option<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, env = "EXPLORER_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Directory with the built browser client, served under `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagFormat {
    Table,
    Json,
}

#[derive(Args)]
struct DiagArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "table")]
    format: DiagFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OptionArgs {
    fn build_options(&self) -> anyhow::Result<BuildOptions> {
        let title_overrides = match &self.titles_override {
            Some(path) => read_title_overrides(path)?,
            None => Default::default(),
        };
        // Reproducible builds pin the timestamp through SOURCE_DATE_EPOCH.
        let built_at = match std::env::var("SOURCE_DATE_EPOCH") {
            Ok(v) => Some(v.parse().context("SOURCE_DATE_EPOCH is not an integer")?),
            Err(_) => None,
        };
        Ok(BuildOptions {
            clusters_k: self.clusters_k,
            seed: self.seed,
            candidate_depth: self.candidate_depth,
            relevance_threshold: self.relevance_threshold,
            title_overrides,
            built_at,
            collection: self.collection.clone(),
        })
    }
}

impl SourceArgs {
    fn files(&self) -> Option<InputFiles> {
        Some(InputFiles {
            queries: self.queries.clone()?,
            docs: self.docs.clone()?,
            run: self.run.clone()?,
            qrels: self.qrels.clone()?,
            embeddings: self.embeddings.clone()?,
            model_config: self.model_config.clone()?,
        })
    }

    fn load(&self) -> anyhow::Result<RunSnapshot> {
        if let Some(path) = &self.snapshot {
            return Ok(RunSnapshot::load(path)?);
        }
        let files = self.files().context("missing input files")?;
        Ok(build_snapshot(&files, &self.options.build_options()?)?)
    }
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Build(args) => build(args),
        Command::Serve(args) => serve(args),
        Command::Diag(args) => diag(args),
    }
}

fn build(args: BuildArgs) -> anyhow::Result<()> {
    let files = InputFiles {
        queries: args.queries,
        docs: args.docs,
        run: args.run,
        qrels: args.qrels,
        embeddings: args.embeddings,
        model_config: args.model_config,
    };
    let snapshot = build_snapshot(&files, &args.options.build_options()?)?;
    for warning in &snapshot.warnings {
        tracing::warn!("{warning}");
    }
    snapshot.save(&args.out)?;
    info!(
        queries = snapshot.query_count(),
        clusters = snapshot.clusters.len(),
        "wrote {}",
        args.out.display()
    );
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = SocketAddr::new(args.host, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot listen on {addr}"))?;
        let mut state = AppState::pending();
        if let Some(dir) = &args.static_dir {
            state = state.with_static_dir(dir);
        }
        info!("listening on http://{addr}");

        let source = args.source;
        let loader_state = state.clone();
        let loader = tokio::task::spawn_blocking(move || -> anyhow::Result<()> {
            let snapshot = source.load()?;
            info!(queries = snapshot.query_count(), "snapshot ready");
            loader_state.set_snapshot(snapshot);
            Ok(())
        });

        let server = tokio::spawn(api::serve(listener, state));
        match loader.await? {
            Ok(()) => {}
            Err(e) => {
                error!("{e:#}");
                bail!(e);
            }
        }
        server.await??;
        Ok(())
    })
}

fn diag(args: DiagArgs) -> anyhow::Result<()> {
    let snapshot = args.source.load()?;
    let report = kernel_diagnostics(&snapshot);
    let text = match args.format {
        DiagFormat::Table => report.render_table(),
        DiagFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
