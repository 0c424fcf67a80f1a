// Serve the desk fixture over HTTP, or (from tests) query the router
// in-process.
//
//     cargo run --example serve_api [-- <port>]
//     curl localhost:8080/api/clusters?sort=delta&order=desc

use std::path::PathBuf;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use rerank_explorer::api::{self, AppState};
use rerank_explorer::{build_snapshot, BuildOptions, InputFiles, RunSnapshot};
use tower::ServiceExt;

fn desk_snapshot() -> anyhow::Result<RunSnapshot> {
    let files = InputFiles::in_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/desk"));
    Ok(build_snapshot(&files, &BuildOptions::default())?)
}

async fn fetch(app: &axum::Router, uri: &str) -> anyhow::Result<serde_json::Value> {
    let response = app.clone().oneshot(Request::get(uri).body(Body::empty())?).await?;
    anyhow::ensure!(response.status().is_success(), "{uri}: {}", response.status());
    let bytes = response.into_body().collect().await?.to_bytes();
    Ok(serde_json::from_slice(&bytes)?)
}

/// Returns the `/api/meta` body.
pub fn run_example() -> anyhow::Result<serde_json::Value> {
    let app = api::router(AppState::ready(desk_snapshot()?));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let meta = fetch(&app, "/api/meta").await?;
        println!("meta: {} queries, builtAt {}", meta["queryCount"], meta["builtAt"]);

        let cards = fetch(&app, "/api/clusters?sort=delta&order=desc").await?;
        for card in cards.as_array().into_iter().flatten() {
            println!("  {} median delta {}", card["title"], card["medianDelta"]);
        }

        let page = fetch(&app, "/api/query/q05?offset=0&count=3").await?;
        for doc in page["documents"].as_array().into_iter().flatten() {
            println!(
                "  #{} {} judged={} poolBiasFlag={}",
                doc["rank"], doc["docId"], doc["judged"], doc["poolBiasFlag"]
            );
        }
        Ok(meta)
    })
}

fn main() -> anyhow::Result<()> {
    let port: u16 = std::env::args().nth(1).map(|p| p.parse()).transpose()?.unwrap_or(8080);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        let state = AppState::pending();
        let loader = state.clone();
        tokio::task::spawn_blocking(move || -> anyhow::Result<()> {
            loader.set_snapshot(desk_snapshot()?);
            Ok(())
        });
        println!("http://127.0.0.1:{port}/api/meta");
        api::serve(listener, state).await?;
        Ok(())
    })
}
