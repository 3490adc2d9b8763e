//! HTTP reward service. Every request is scored independently; the only
//! shared state is read-only configuration.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fsukit::batch::{build_samples, EvalItem, ItemDiagnostic, ScoreRequest, Scorer};
use fsukit::eval::{evaluate_benchmark_with, EvalConfig};
use fsukit::schema::Schema;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::settings::Settings;

const BODY_LIMIT: usize = 256 * 1024 * 1024;

pub struct AppState {
    pub scorer: Scorer,
    pub eval: EvalConfig,
    pub schema: Arc<Schema>,
    pub max_batch: usize,
    pub token: Option<String>,
    pub config_view: Value,
}

impl AppState {
    pub fn from_settings(settings: &Settings, token: Option<String>) -> Self {
        let c = &settings.config;
        Self {
            scorer: settings.scorer(),
            eval: c.eval.clone(),
            schema: settings.schema.clone(),
            max_batch: c.service.max_batch,
            token,
            config_view: json!({
                "reward": c.reward,
                "eval": c.eval,
                "active_sim_threshold": c.eval.active_sim_threshold(),
                "parse": c.parse,
                "service": {"max_batch": c.service.max_batch},
                "schema": c.schema.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "builtin".into()),
            }),
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/v1/config", get(config))
        .route("/v1/reward", post(reward))
        .route("/v1/eval", post(eval))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Error reply: `{"error": ..., "diagnostics": [...]}`.
pub struct ApiError {
    status: StatusCode,
    message: String,
    diagnostics: Vec<ItemDiagnostic>,
}

fn error(status: StatusCode, message: impl Into<String>, diagnostics: Vec<ItemDiagnostic>) -> ApiError {
    ApiError {
        status,
        message: message.into(),
        diagnostics,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({"error": self.message});
        if !self.diagnostics.is_empty() {
            body["diagnostics"] = json!(self.diagnostics);
        }
        (self.status, Json(body)).into_response()
    }
}

fn authorize(state: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    let Some(expected) = &state.token else {
        return Ok(());
    };
    let given = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if given == Some(expected.as_str()) {
        Ok(())
    } else {
        Err(error(StatusCode::UNAUTHORIZED, "missing or wrong bearer token", Vec::new()))
    }
}

/// Decodes a JSON array body item by item so that every bad item is
/// reported, not just the first.
fn decode_batch<T: DeserializeOwned>(body: &[u8], max_batch: usize) -> Result<Vec<T>, ApiError> {
    let items: Vec<Value> = serde_json::from_slice(body)
        .map_err(|e| error(StatusCode::BAD_REQUEST, format!("body must be a JSON array: {e}"), Vec::new()))?;
    if items.len() > max_batch {
        return Err(error(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("batch of {} items exceeds the limit of {max_batch}", items.len()),
            Vec::new(),
        ));
    }
    let mut out = Vec::with_capacity(items.len());
    let mut diagnostics = Vec::new();
    for (index, item) in items.into_iter().enumerate() {
        let id = item.get("id").and_then(Value::as_str).unwrap_or_default().to_string();
        match serde_json::from_value(item) {
            Ok(v) => out.push(v),
            Err(e) => diagnostics.push(ItemDiagnostic {
                index,
                id,
                message: e.to_string(),
            }),
        }
    }
    if diagnostics.is_empty() {
        Ok(out)
    } else {
        Err(error(StatusCode::BAD_REQUEST, "malformed items", diagnostics))
    }
}

async fn config(State(state): State<Arc<AppState>>, headers: HeaderMap) -> Result<Json<Value>, ApiError> {
    authorize(&state, &headers)?;
    Ok(Json(state.config_view.clone()))
}

async fn reward(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    authorize(&state, &headers)?;
    let requests: Vec<ScoreRequest> = decode_batch(&body, state.max_batch)?;
    let worker = state.clone();
    let results = tokio::task::spawn_blocking(move || worker.scorer.score_batch(&requests))
        .await
        .map_err(|e| error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), Vec::new()))?;
    Ok(Json(results).into_response())
}

async fn eval(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    authorize(&state, &headers)?;
    let items: Vec<EvalItem> = decode_batch(&body, state.max_batch)?;
    let samples = build_samples(&items, &state.schema)
        .map_err(|diagnostics| error(StatusCode::BAD_REQUEST, "unusable items", diagnostics))?;
    let worker = state.clone();
    let report = tokio::task::spawn_blocking(move || evaluate_benchmark_with(&samples, &worker.eval, &worker.schema))
        .await
        .map_err(|e| error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), Vec::new()))?
        .map_err(|e| error(StatusCode::BAD_REQUEST, e.to_string(), Vec::new()))?;
    Ok(Json(report).into_response())
}

pub async fn serve(state: AppState, addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
