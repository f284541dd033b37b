//! Stateless HTTP facade over the planopt engine.
//!
//! | method | path                     | answer                          |
//! |--------|--------------------------|---------------------------------|
//! | POST   | `/api/v1/solve`          | Scenario document               |
//! | POST   | `/api/v1/pareto`         | Front document                  |
//! | GET    | `/api/v1/health`         | `{"status": "ok", "version"}`   |
//! | GET    | `/api/v1/samples`        | names of the sample instances   |
//! | GET    | `/api/v1/samples/{name}` | one sample instance document    |
//!
//! Failures answer 422 (invalid body), 409 (infeasible or unbounded), 404
//! (unknown sample), 408 (time limit) or 500.

pub mod api;
pub mod config;
pub mod error;

use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use sha2::{Digest, Sha256};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

pub use api::{execute_pareto, execute_solve, ParetoRequestBody, SampleStore, SolveRequestBody};
pub use config::Config;
pub use error::ApiError;

pub const CONTENT_HASH: HeaderName = HeaderName::from_static("x-content-hash");

#[derive(Clone)]
pub struct AppState {
    samples: Arc<SampleStore>,
    permits: Arc<Semaphore>,
    timeout: std::time::Duration,
}

impl AppState {
    pub fn new(config: &Config) -> std::io::Result<Self> {
        let samples = match &config.samples_dir {
            Some(dir) => SampleStore::from_dir(dir)?,
            None => SampleStore::embedded(),
        };
        Ok(Self::with_samples(config, samples))
    }

    pub fn with_samples(config: &Config, samples: SampleStore) -> Self {
        Self {
            samples: Arc::new(samples),
            permits: Arc::new(Semaphore::new(config.max_concurrency.max(1))),
            timeout: config.timeout,
        }
    }

    /// Runs `job` on the blocking pool under the concurrency and time limits.
    async fn run<F>(&self, job: F) -> Result<String, ApiError>
    where
        F: FnOnce(&SampleStore, Instant) -> Result<String, ApiError> + Send + 'static,
    {
        let start = Instant::now();
        let deadline = start + self.timeout;
        let permit = tokio::time::timeout(self.timeout, self.permits.clone().acquire_owned())
            .await
            .map_err(|_| ApiError::Timeout)?
            .map_err(|_| ApiError::Internal("server is shutting down".into()))?;
        let samples = self.samples.clone();
        let task = tokio::task::spawn_blocking(move || {
            let _permit = permit;
            job(&samples, deadline)
        });
        let remaining = deadline.saturating_duration_since(Instant::now());
        match tokio::time::timeout(remaining, task).await {
            Err(_) => Err(ApiError::Timeout),
            Ok(Err(join)) => Err(ApiError::Internal(format!("solver task failed: {join}"))),
            Ok(Ok(result)) => result,
        }
    }
}

fn content_hash(body: &str) -> String {
    Sha256::digest(body.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON response carrying the hash of its body.
pub fn json_response(status: StatusCode, body: String) -> Response {
    let hash = HeaderValue::from_str(&content_hash(&body)).expect("hex is a valid header value");
    (
        status,
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
            (CONTENT_HASH, hash),
        ],
        body,
    )
        .into_response()
}

fn respond(result: Result<String, ApiError>) -> Response {
    match result {
        Ok(body) => json_response(StatusCode::OK, body),
        Err(e) => {
            if e.status_code().is_server_error() {
                tracing::error!(status = %e.status_code(), body = %e.body(), "request failed");
            }
            json_response(e.status_code(), e.body())
        }
    }
}

fn utf8(body: &Bytes) -> Result<&str, ApiError> {
    std::str::from_utf8(body).map_err(|e| ApiError::invalid("", format!("body is not UTF-8: {e}")))
}

async fn solve(State(state): State<AppState>, body: Bytes) -> Response {
    let parsed = utf8(&body).and_then(api::parse_body::<SolveRequestBody>);
    respond(match parsed {
        Ok(req) => state.run(move |samples, _| execute_solve(samples, req)).await,
        Err(e) => Err(e),
    })
}

async fn pareto(State(state): State<AppState>, body: Bytes) -> Response {
    let parsed = utf8(&body).and_then(api::parse_body::<ParetoRequestBody>);
    respond(match parsed {
        Ok(req) => {
            state
                .run(move |samples, deadline| execute_pareto(samples, req, Some(deadline)))
                .await
        }
        Err(e) => Err(e),
    })
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn health() -> Response {
    let body = Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
    };
    json_response(StatusCode::OK, planopt_core::io::to_document_string(&body))
}

#[derive(Serialize)]
struct SampleEntry<'a> {
    name: &'a str,
}

async fn samples(State(state): State<AppState>) -> Response {
    let list: Vec<SampleEntry<'_>> = state.samples.names().into_iter().map(|name| SampleEntry { name }).collect();
    json_response(StatusCode::OK, planopt_core::io::to_document_string(&list))
}

async fn sample(State(state): State<AppState>, Path(name): Path<String>) -> Response {
    match state.samples.get(&name) {
        Some(s) => json_response(StatusCode::OK, s.text.clone()),
        None => respond(Err(ApiError::UnknownSample(name))),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/solve", post(solve))
        .route("/api/v1/pareto", post(pareto))
        .route("/api/v1/health", get(health))
        .route("/api/v1/samples", get(samples))
        .route("/api/v1/samples/{name}", get(sample))
        .with_state(state)
}

/// The API plus, when configured, the UI bundle under `/`.
pub fn app(config: &Config) -> std::io::Result<Router> {
    let router = router(AppState::new(config)?);
    Ok(match &config.ui_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    })
}

/// Serves until interrupted.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let app = app(&config)?;
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
