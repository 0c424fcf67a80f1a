//! Read-only JSON-over-HTTP service for a [`RunSnapshot`].
//!
//! Endpoints live under `/api`; the browser client's static files, when a
//! directory is configured, are served from `/`. Until the snapshot has been
//! set every API call answers 503.

pub mod dto;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::snapshot::RunSnapshot;
use dto::{ClusterCardDto, ClusterQueryDto, CompareDto, MetaDto, QueryResultDto};

pub const DEFAULT_PAGE_SIZE: usize = 10;

/// Shared server state. The snapshot slot is filled once, possibly after
/// the listener is already accepting requests.
#[derive(Clone, Default)]
pub struct AppState {
    snapshot: Arc<OnceLock<Arc<RunSnapshot>>>,
    static_dir: Option<PathBuf>,
}

impl AppState {
    pub fn ready(snapshot: RunSnapshot) -> Self {
        let state = Self::default();
        state.set_snapshot(snapshot);
        state
    }

    /// State whose snapshot is still being built.
    pub fn pending() -> Self {
        Self::default()
    }

    pub fn with_static_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.static_dir = Some(dir.into());
        self
    }

    /// Returns `false` if a snapshot was already set.
    pub fn set_snapshot(&self, snapshot: RunSnapshot) -> bool {
        self.snapshot.set(Arc::new(snapshot)).is_ok()
    }

    pub fn snapshot(&self) -> Option<&Arc<RunSnapshot>> {
        self.snapshot.get()
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/api/meta", get(meta))
        .route("/api/clusters", get(clusters))
        .route("/api/query/{query_id}", get(query_result))
        .route("/api/compare/{query_id}/{doc_a}/{doc_b}", get(compare));

    let app = match &state.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api
            .route("/", get(|| async { Html(PLACEHOLDER_INDEX) }))
            .fallback(|| async { ApiError::not_found("no such endpoint") }),
    };
    app.layer(CorsLayer::permissive()).with_state(state)
}

/// Serves `router(state)` on an already bound listener until the process is
/// interrupted.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

const PLACEHOLDER_INDEX: &str = "<!doctype html><meta charset=utf-8><title>explorer</title>\
<p>The browser client is not bundled with this server. Start it with <code>--static-dir</code> \
pointing at the built UI, or query the JSON API directly: \
<a href=/api/meta>/api/meta</a>, <a href=/api/clusters>/api/clusters</a>, \
<code>/api/query/{queryId}</code>, <code>/api/compare/{queryId}/{docA}/{docB}</code>.";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a str,
        }
        json_response(self.status, &Body { error: &self.message })
    }
}

fn json_response(status: StatusCode, body: &impl Serialize) -> Response {
    match serde_json::to_vec(body) {
        Ok(bytes) => (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

fn ok_json(body: &impl Serialize) -> Response {
    json_response(StatusCode::OK, body)
}

type Params = Query<BTreeMap<String, String>>;

fn loaded(state: &AppState) -> Result<&Arc<RunSnapshot>, ApiError> {
    state
        .snapshot()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "snapshot is still building"))
}

async fn meta(State(state): State<AppState>) -> Result<Response, ApiError> {
    let snapshot = loaded(&state)?;
    Ok(ok_json(&MetaDto::new(snapshot)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKey {
    Median,
    Delta,
    Alpha,
    Random,
}

impl std::str::FromStr for SortKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "median" => Ok(SortKey::Median),
            "delta" => Ok(SortKey::Delta),
            "alpha" => Ok(SortKey::Alpha),
            "random" => Ok(SortKey::Random),
            other => Err(format!("unknown sort key {other:?} (expected median, delta, alpha or random)")),
        }
    }
}

/// Options of `GET /api/clusters`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterListing {
    pub sort: SortKey,
    pub descending: bool,
    /// Lowercased term prefix; empty keeps everything.
    pub filter: String,
    pub seed: u64,
}

impl Default for ClusterListing {
    fn default() -> Self {
        ClusterListing {
            sort: SortKey::Median,
            descending: false,
            filter: String::new(),
            seed: 0,
        }
    }
}

impl ClusterListing {
    pub fn from_params(params: &BTreeMap<String, String>) -> Result<Self, String> {
        let mut listing = ClusterListing::default();
        if let Some(sort) = params.get("sort") {
            listing.sort = sort.parse()?;
        }
        if let Some(order) = params.get("order") {
            listing.descending = match order.as_str() {
                "asc" => false,
                "desc" => true,
                other => return Err(format!("unknown order {other:?} (expected asc or desc)")),
            };
        }
        if let Some(filter) = params.get("filter") {
            listing.filter = filter.trim().to_lowercase();
        }
        if let Some(seed) = params.get("seed") {
            listing.seed = seed.parse().map_err(|_| format!("seed {seed:?} is not an unsigned integer"))?;
        }
        Ok(listing)
    }
}

/// Missing values sort last in either direction.
fn cmp_missing_last<T: PartialOrd>(a: Option<T>, b: Option<T>, descending: bool) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => directed(a.partial_cmp(&b).unwrap_or(Ordering::Equal), descending),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn directed(ord: Ordering, descending: bool) -> Ordering {
    if descending {
        ord.reverse()
    } else {
        ord
    }
}

/// Cluster cards after filtering and sorting. Ties always fall back to
/// ascending id.
pub fn cluster_cards(snapshot: &RunSnapshot, listing: &ClusterListing) -> Vec<ClusterCardDto> {
    let matches_filter = |query_id: &str| {
        listing.filter.is_empty()
            || snapshot.queries[query_id]
                .tokens
                .iter()
                .any(|t| t.text.starts_with(&listing.filter))
    };

    let mut cards: Vec<ClusterCardDto> = snapshot
        .clusters
        .iter()
        .filter_map(|cluster| {
            let queries: Vec<ClusterQueryDto> = cluster
                .member_query_ids
                .iter()
                .filter(|q| matches_filter(q))
                .map(|q| (&snapshot.summaries[q]).into())
                .collect();
            (!queries.is_empty()).then(|| ClusterCardDto::new(cluster, queries))
        })
        .collect();

    let desc = listing.descending;
    match listing.sort {
        SortKey::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(listing.seed);
            cards.shuffle(&mut rng);
            for card in &mut cards {
                card.queries.shuffle(&mut rng);
            }
        }
        SortKey::Median => {
            cards.sort_by(|a, b| {
                cmp_missing_last(a.median_first_relevant_rank, b.median_first_relevant_rank, desc)
                    .then_with(|| a.cluster_id.cmp(&b.cluster_id))
            });
            for card in &mut cards {
                card.queries.sort_by(|a, b| {
                    cmp_missing_last(a.first_relevant_rank.get(), b.first_relevant_rank.get(), desc)
                        .then_with(|| a.query_id.cmp(&b.query_id))
                });
            }
        }
        SortKey::Delta => {
            cards.sort_by(|a, b| {
                cmp_missing_last(a.median_delta, b.median_delta, desc).then_with(|| a.cluster_id.cmp(&b.cluster_id))
            });
            for card in &mut cards {
                card.queries.sort_by(|a, b| {
                    cmp_missing_last(a.delta, b.delta, desc).then_with(|| a.query_id.cmp(&b.query_id))
                });
            }
        }
        SortKey::Alpha => {
            cards.sort_by(|a, b| directed(a.title.cmp(&b.title), desc).then_with(|| a.cluster_id.cmp(&b.cluster_id)));
            for card in &mut cards {
                card.queries
                    .sort_by(|a, b| directed(a.text.cmp(&b.text), desc).then_with(|| a.query_id.cmp(&b.query_id)));
            }
        }
    }
    for card in &mut cards {
        card.collapsed_count = card.queries.len().min(dto::COLLAPSED_QUERY_COUNT);
    }
    cards
}

async fn clusters(State(state): State<AppState>, Query(params): Params) -> Result<Response, ApiError> {
    let snapshot = loaded(&state)?;
    let listing = ClusterListing::from_params(&params).map_err(ApiError::bad_request)?;
    Ok(ok_json(&cluster_cards(snapshot, &listing)))
}

fn paging_value(params: &BTreeMap<String, String>, name: &str, default: usize) -> Result<usize, ApiError> {
    match params.get(name) {
        None => Ok(default),
        Some(raw) => {
            let value: i64 = raw
                .parse()
                .map_err(|_| ApiError::bad_request(format!("{name} {raw:?} is not an integer")))?;
            usize::try_from(value).map_err(|_| ApiError::bad_request(format!("{name} must not be negative")))
        }
    }
}

async fn query_result(
    State(state): State<AppState>,
    Path(query_id): Path<String>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let snapshot = loaded(&state)?;
    let offset = paging_value(&params, "offset", 0)?;
    let count = paging_value(&params, "count", DEFAULT_PAGE_SIZE)?;
    let dto = QueryResultDto::new(snapshot, &query_id, offset, count)
        .ok_or_else(|| ApiError::not_found(format!("unknown query {query_id}")))?;
    Ok(ok_json(&dto))
}

async fn compare(
    State(state): State<AppState>,
    Path((query_id, doc_a, doc_b)): Path<(String, String, String)>,
) -> Result<Response, ApiError> {
    let snapshot = loaded(&state)?;
    if !snapshot.reranked.contains_key(&query_id) {
        return Err(ApiError::not_found(format!("unknown query {query_id}")));
    }
    let dto = CompareDto::new(snapshot, &query_id, &doc_a, &doc_b).ok_or_else(|| {
        ApiError::not_found(format!("{doc_a} and {doc_b} are not both candidates of query {query_id}"))
    })?;
    Ok(ok_json(&dto))
}
