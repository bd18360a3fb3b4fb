//! Minimal HTTP service: POST /synthesize returns WAV audio, POST /plan
//! returns the JSON plan, GET /health is a liveness probe. Requests run the
//! same pipeline as the CLI; catalog and cache are shared across requests.

use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use polyvox::audio::encode_wav;
use polyvox::pipeline::PipelineOptions;
use polyvox::ssml::SsmlDialect;
use serde::Deserialize;

use crate::config::{parse_mode, Runtime};
use crate::error::{CliError, ErrorBody, EXIT_ENGINE_FAILURE};
use crate::wire::PlanJson;

#[derive(Debug, Deserialize)]
pub struct SynthesizeRequest {
    pub text: String,
    pub hint: Option<String>,
    pub mode: Option<String>,
    pub dialect: Option<String>,
    pub pause_ms: Option<u32>,
}

struct ServiceError(StatusCode, ErrorBody);

impl From<CliError> for ServiceError {
    fn from(err: CliError) -> Self {
        let status = if err.exit_code == EXIT_ENGINE_FAILURE {
            StatusCode::BAD_GATEWAY
        } else {
            StatusCode::BAD_REQUEST
        };
        ServiceError(status, err.body)
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

/// Per-request prefs/dialect overrides on top of the shared runtime.
fn request_runtime(base: &Runtime, req: &SynthesizeRequest) -> Result<Runtime, CliError> {
    let mut runtime = base.clone();
    if let Some(hint) = &req.hint {
        let lang = polyvox::langid::LangCode::new(hint)
            .map_err(|e| CliError::input("bad_hint", e.to_string()))?;
        runtime.prefs.latin_lang_hint = Some(lang);
    }
    if let Some(mode) = &req.mode {
        runtime.prefs.mode = parse_mode(mode)?;
    }
    if let Some(pause) = req.pause_ms {
        runtime.prefs.boundary_pause_ms = pause;
    }
    if let Some(dialect) = &req.dialect {
        runtime.dialect = SsmlDialect::by_name(dialect)
            .map_err(|e| CliError::input("bad_dialect", e.to_string()))?;
    }
    Ok(runtime)
}

async fn health() -> &'static str {
    "ok"
}

async fn plan(
    State(runtime): State<Arc<Runtime>>,
    Json(req): Json<SynthesizeRequest>,
) -> Result<Json<PlanJson>, ServiceError> {
    let scoped = request_runtime(&runtime, &req)?;
    let result = tokio::task::spawn_blocking(move || {
        scoped
            .pipeline
            .plan(&req.text, &scoped.prefs)
            .map_err(CliError::from_pipeline)
    })
    .await
    .map_err(|e| CliError::input("internal", e.to_string()))??;
    Ok(Json(PlanJson::from(&result.1)))
}

async fn synthesize(
    State(runtime): State<Arc<Runtime>>,
    Json(req): Json<SynthesizeRequest>,
) -> Result<Response, ServiceError> {
    let scoped = request_runtime(&runtime, &req)?;
    let result = tokio::task::spawn_blocking(move || {
        let opts = PipelineOptions {
            single_request: scoped.single_request,
            ..PipelineOptions::default()
        };
        scoped
            .pipeline
            .run(
                &req.text,
                &scoped.prefs,
                &scoped.dialect,
                scoped.engine.as_ref(),
                &scoped.cache,
                &opts,
            )
            .map_err(CliError::from_pipeline)
    })
    .await
    .map_err(|e| CliError::input("internal", e.to_string()))??;

    let wav = encode_wav(&result.audio);
    Ok((
        StatusCode::OK,
        [(header::CONTENT_TYPE, "audio/wav")],
        wav,
    )
        .into_response())
}

pub fn router(runtime: Arc<Runtime>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/plan", post(plan))
        .route("/synthesize", post(synthesize))
        .with_state(runtime)
}

/// Binds and serves until the process is stopped.
pub async fn serve(runtime: Arc<Runtime>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(runtime)).await
}
