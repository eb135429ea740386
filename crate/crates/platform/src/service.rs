//! JSON API over one loaded snapshot.
//!
//! | method | path                       | body                   |
//! |--------|----------------------------|------------------------|
//! | POST   | `/api/recommend`           | `RecommendationRequest`|
//! | GET    | `/api/patterns`            |                        |
//! | GET    | `/api/catalog`             |                        |
//! | POST   | `/api/measurements/estimate?ppcm=X` | binary PGM    |
//! | POST   | `/api/reload`              |                        |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rsos_core::recommender::{recommend, RecommendConfig, RecommendError, RecommendationRequest};
use rsos_core::vision::{estimate_measurements, GrayImage, MeasureConfig, MeasureError};
use serde::Serialize;
use serde_json::json;

use crate::workspace::{Loaded, Workspace};
use crate::PlatformError;

const MAX_BODY: usize = 32 * 1024 * 1024;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    field: Option<String>,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, field: Option<&str>, message: impl Into<String>) -> Self {
        ApiError {
            status,
            field: field.map(str::to_string),
            message: message.into(),
        }
    }

    fn bad_request(field: Option<&str>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, field, message)
    }

    fn unprocessable(field: Option<&str>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, field, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "field": self.field, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<RecommendError> for ApiError {
    fn from(e: RecommendError) -> Self {
        match &e {
            RecommendError::Validation { field, message } => ApiError::unprocessable(Some(field), message.clone()),
            RecommendError::UnknownCategory(_) => ApiError::unprocessable(Some("category"), e.to_string()),
            _ => ApiError::unprocessable(None, e.to_string()),
        }
    }
}

/// Shared by every request. Readers clone the current `Arc`; reload builds a
/// new `Loaded` off-lock and swaps it in.
pub struct AppState {
    workspace: Workspace,
    allow_stale: bool,
    current: RwLock<Arc<Loaded>>,
    pub recommend: RecommendConfig,
    pub measure: MeasureConfig,
}

impl AppState {
    pub fn open(workspace: Workspace, allow_stale: bool) -> Result<Self, PlatformError> {
        let loaded = workspace.open(allow_stale)?;
        Ok(AppState {
            workspace,
            allow_stale,
            current: RwLock::new(Arc::new(loaded)),
            recommend: RecommendConfig::default(),
            measure: MeasureConfig::default(),
        })
    }

    pub fn current(&self) -> Arc<Loaded> {
        self.current.read().expect("snapshot lock poisoned").clone()
    }

    pub fn reload(&self) -> Result<Arc<Loaded>, PlatformError> {
        let fresh = Arc::new(self.workspace.open(self.allow_stale)?);
        *self.current.write().expect("snapshot lock poisoned") = fresh.clone();
        Ok(fresh)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/recommend", post(recommend_handler))
        .route("/api/patterns", get(patterns_handler))
        .route("/api/catalog", get(catalog_handler))
        .route("/api/measurements/estimate", post(estimate_handler))
        .route("/api/reload", post(reload_handler))
        .layer(DefaultBodyLimit::max(MAX_BODY))
        .with_state(state)
}

async fn recommend_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: RecommendationRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(None, format!("malformed request: {e}")))?;
    let loaded = state.current();
    let recs = recommend(&req, &loaded.catalog, &loaded.sizing, &loaded.model, &state.recommend)?;
    Ok(Json(json!({ "recommendations": recs })).into_response())
}

#[derive(Serialize)]
struct FrequentView<'a> {
    period_id: &'a str,
    pattern: String,
    support: usize,
}

async fn patterns_handler(State(state): State<Arc<AppState>>) -> Response {
    let loaded = state.current();
    let snap = &loaded.snapshot;
    let order = snap.config().display_order();
    let frequent: Vec<FrequentView> = snap
        .frequent
        .iter()
        .map(|f| FrequentView {
            period_id: &f.period_id,
            pattern: f.itemset.render(&order),
            support: f.support,
        })
        .collect();
    let higen_report = snap.higen_report(false);
    Json(json!({
        "status": loaded.status,
        "min_sup": snap.fingerprint.min_sup,
        "attributes": snap.fingerprint.attributes,
        "periods": snap.periods,
        "frequent": frequent,
        "frequent_report": snap.pattern_report(),
        "higens": higen_report.lines().collect::<Vec<_>>(),
        "higen_report": higen_report,
    }))
    .into_response()
}

async fn catalog_handler(State(state): State<Arc<AppState>>) -> Response {
    Json(json!({ "entries": state.current().catalog })).into_response()
}

async fn estimate_handler(
    State(state): State<Arc<AppState>>,
    Query(query): Query<HashMap<String, String>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let raw = query
        .get("ppcm")
        .ok_or_else(|| ApiError::bad_request(Some("ppcm"), "the ppcm query parameter is required"))?;
    let ppcm: f64 = raw
        .parse()
        .map_err(|_| ApiError::bad_request(Some("ppcm"), format!("`{raw}` is not a number")))?;
    let img = GrayImage::from_pgm(&body).map_err(|e| ApiError::bad_request(Some("image"), e.to_string()))?;
    let cfg = state.measure.clone();
    let result = tokio::task::spawn_blocking(move || estimate_measurements(&img, ppcm, &cfg))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, None, e.to_string()))?;
    match result {
        Ok(m) => Ok(Json(m).into_response()),
        Err(e @ MeasureError::Calibration(_)) => Err(ApiError::unprocessable(Some("ppcm"), e.to_string())),
        Err(e) => Err(ApiError::unprocessable(Some("image"), e.to_string())),
    }
}

async fn reload_handler(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let st = state.clone();
    let result = tokio::task::spawn_blocking(move || st.reload())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, None, e.to_string()))?;
    match result {
        Ok(loaded) => Ok(Json(json!({
            "status": loaded.status,
            "periods": loaded.snapshot.periods.len(),
            "frequent": loaded.snapshot.frequent.len(),
            "higens": loaded.snapshot.higens.len(),
        }))
        .into_response()),
        Err(e @ (PlatformError::StaleSnapshot | PlatformError::NoSnapshot | PlatformError::StaleInput(_))) => {
            Err(ApiError::new(StatusCode::CONFLICT, None, e.to_string()))
        }
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, None, e.to_string())),
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> Result<(), PlatformError> {
    let io = |source| PlatformError::Io {
        path: addr.to_string().into(),
        source,
    };
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(io)?;
    eprintln!("listening on http://{}", listener.local_addr().map_err(io)?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(io)
}
