//! HTTP prediction service.
//!
//! `POST /predict` takes `{"host_sequence": .., "virus_sequence": ..}` and
//! answers with the decision value, the predicted label and model metadata.
//! `GET /health` reports whether the model has finished loading. Errors are
//! plain text of the form `<CODE>: <message>`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::{error, info};
use serde::{Deserialize, Serialize};

use crate::pipeline::score_sequences;
use crate::svm::{load_model, sign_label, SvmModel, MODEL_VERSION};

/// Shared slot for the model; empty until loading completes.
#[derive(Clone, Default)]
pub struct AppState {
    model: Arc<RwLock<Option<Arc<SvmModel>>>>,
}

impl AppState {
    pub fn with_model(model: SvmModel) -> Self {
        let state = AppState::default();
        state.install(model);
        state
    }

    pub fn install(&self, model: SvmModel) {
        *self.model.write().unwrap() = Some(Arc::new(model));
    }

    fn current(&self) -> Option<Arc<SvmModel>> {
        self.model.read().unwrap().clone()
    }
}

#[derive(Debug, Deserialize)]
pub struct PredictRequest {
    pub host_sequence: String,
    pub virus_sequence: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelInfo {
    pub version: u32,
    pub mode: String,
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
    pub threshold: Option<f64>,
    pub n_sv: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PredictResponse {
    pub score: f64,
    pub label: i8,
    pub model: ModelInfo,
}

fn info_of(model: &SvmModel) -> ModelInfo {
    ModelInfo {
        version: MODEL_VERSION,
        mode: model.meta.mode.to_string(),
        c: model.meta.c,
        gamma: model.gamma,
        threshold: model.meta.threshold,
        n_sv: model.support.len(),
    }
}

fn failure(status: StatusCode, code: &str, msg: impl std::fmt::Display) -> Response {
    (status, format!("{code}: {msg}\n")).into_response()
}

async fn health(State(state): State<AppState>) -> Response {
    match state.current() {
        Some(_) => (StatusCode::OK, "ready\n").into_response(),
        None => (StatusCode::SERVICE_UNAVAILABLE, "not-ready\n").into_response(),
    }
}

async fn predict(State(state): State<AppState>, body: Bytes) -> Response {
    let Some(model) = state.current() else {
        return failure(StatusCode::SERVICE_UNAVAILABLE, "E_NOT_READY", "model not loaded");
    };
    let req: PredictRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return failure(StatusCode::BAD_REQUEST, "E_BAD_BODY", e),
    };
    match score_sequences(&model, &req.host_sequence, &req.virus_sequence) {
        Ok(score) => Json(PredictResponse {
            score,
            label: sign_label(score),
            model: info_of(&model),
        })
        .into_response(),
        Err(e) => failure(StatusCode::UNPROCESSABLE_ENTITY, "E_BAD_SEQUENCE", e),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/predict", post(predict))
        .with_state(state)
}

/// Bind `addr`, start answering immediately and load the model in the
/// background; `/health` turns ready once it is in place.
pub async fn run(model_path: PathBuf, addr: SocketAddr) -> std::io::Result<()> {
    let state = AppState::default();
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("listening on {}", listener.local_addr()?);
    let slot = state.clone();
    tokio::task::spawn_blocking(move || match load_model(&model_path) {
        Ok(model) => {
            info!("model loaded from {}", model_path.display());
            slot.install(model);
        }
        Err(e) => error!("failed to load model: {e}"),
    });
    axum::serve(listener, router(state)).await
}
