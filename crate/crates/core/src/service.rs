//! HTTP interface: the form schema, live suggestions, and model hot-swap.
//!
//! | method | path       | body                                              |
//! |--------|------------|---------------------------------------------------|
//! | GET    | `/health`  |                                                   |
//! | GET    | `/schema`  |                                                   |
//! | POST   | `/suggest` | `{filled, target, theta?, top_percent?, count?}`  |
//! | POST   | `/reload`  | `{model_path}`                                    |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ModelBundle;
use crate::suggest::{
    suggest, ListSize, Suggestion, SuggestionRequest, DEFAULT_THETA, DEFAULT_TOP_PERCENT,
};

/// One loaded model version.
#[derive(Debug)]
pub struct Loaded {
    pub bundle: ModelBundle,
    /// SHA-256 of the artifact bytes.
    pub fingerprint: String,
    pub path: Option<PathBuf>,
}

impl Loaded {
    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io("model", path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::Artifact(e.to_string()))?;
        Ok(Loaded {
            bundle: ModelBundle::from_json(text)?,
            fingerprint: hex::encode(Sha256::digest(&bytes)),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn from_bundle(bundle: ModelBundle) -> Result<Self> {
        let fingerprint = hex::encode(Sha256::digest(bundle.to_json()?.as_bytes()));
        Ok(Loaded {
            bundle,
            fingerprint,
            path: None,
        })
    }
}

/// Shared service state. Readers clone the current `Arc`, so a reload swaps the
/// whole model at once and in-flight requests finish on the version they started with.
#[derive(Clone, Debug)]
pub struct AppState {
    current: Arc<RwLock<Arc<Loaded>>>,
}

impl AppState {
    pub fn new(loaded: Loaded) -> Self {
        AppState {
            current: Arc::new(RwLock::new(Arc::new(loaded))),
        }
    }

    pub fn current(&self) -> Arc<Loaded> {
        self.current.read().expect("state lock").clone()
    }

    pub fn swap(&self, loaded: Loaded) {
        *self.current.write().expect("state lock") = Arc::new(loaded);
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuggestBody {
    #[serde(default)]
    filled: BTreeMap<String, String>,
    target: String,
    theta: Option<f64>,
    top_percent: Option<f64>,
    count: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SuggestResponse {
    #[serde(flatten)]
    suggestion: Suggestion,
    latency_ms: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReloadBody {
    model_path: PathBuf,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownField { .. } | Error::TargetNotModeled(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError(status, e.to_string())
    }
}

fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> std::result::Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    let cur = state.current();
    Json(json!({ "status": "ok", "model_fingerprint": cur.fingerprint }))
}

async fn schema(State(state): State<AppState>) -> Response {
    Json(state.current().bundle.schema.clone()).into_response()
}

async fn suggest_handler(
    State(state): State<AppState>,
    body: Bytes,
) -> std::result::Result<Response, ApiError> {
    let started = Instant::now();
    let body: SuggestBody = parse(&body)?;
    let size = match (body.count, body.top_percent) {
        (Some(n), _) => ListSize::Count(n),
        (None, p) => ListSize::TopPercent {
            percent: p.unwrap_or(DEFAULT_TOP_PERCENT),
            min_count: 1,
        },
    };
    let request = SuggestionRequest {
        filled: body.filled,
        target: body.target,
        size,
        theta: body.theta.unwrap_or(DEFAULT_THETA),
    };
    let cur = state.current();
    let suggestion = suggest(&cur.bundle, &request)?;
    Ok(Json(SuggestResponse {
        suggestion,
        latency_ms: started.elapsed().as_secs_f64() * 1e3,
    })
    .into_response())
}

async fn reload(
    State(state): State<AppState>,
    body: Bytes,
) -> std::result::Result<Response, ApiError> {
    let body: ReloadBody = parse(&body)?;
    let path = body.model_path;
    let loaded = tokio::task::spawn_blocking(move || Loaded::from_file(&path))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let fingerprint = loaded.fingerprint.clone();
    state.swap(loaded);
    Ok(Json(json!({ "status": "reloaded", "model_fingerprint": fingerprint })).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/schema", get(schema))
        .route("/suggest", post(suggest_handler))
        .route("/reload", post(reload))
        .with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(state: AppState, bind: &str) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|source| Error::Io {
            what: "bind",
            source,
        })?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| Error::Io {
            what: "serve",
            source,
        })
}
