//! HTTP/JSON interface to a fuzzchip workbench session.
//!
//! All arithmetic happens in the `fuzzchip` library; handlers only translate
//! between JSON and library calls. Mutations take the session write lock, so
//! readers always see either the state before or after a whole update.

mod state;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fuzzchip::codegen::MAX_BYTESIZE;
use fuzzchip::{
    emit_table, gen_table, write_rule_image, Activation, ChipType, CodegenError, Connection, CrispOutput,
    DictionaryError, EngineError, MembershipFunction, NetworkError, OutputMembership, TableValue,
};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::services::ServeDir;

pub use state::{ChipSummary, Diagnostic, SessionError, SessionState, SignalInfo};

pub type SharedState = Arc<RwLock<SessionState>>;

pub fn shared(state: SessionState) -> SharedState {
    Arc::new(RwLock::new(state))
}

/// The API routes, plus static files from `static_dir` at `/` when given.
pub fn app(state: SharedState, static_dir: Option<PathBuf>) -> Router {
    let router = Router::new()
        .route("/api/definitions", get(list_definitions))
        .route("/api/definitions/{name}", get(get_definition).put(put_definition))
        .route("/api/chips", get(list_chips).post(create_chip))
        .route("/api/chips/{name}/infer", post(infer))
        .route("/api/chips/{name}/compile", post(compile))
        .route("/api/network/connections", post(connect))
        .route("/api/network/propagate", post(propagate))
        .with_state(state);
    match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    diagnostics: Vec<Diagnostic>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    fn not_found(what: &str, name: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {what} {}", name.to_ascii_uppercase()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut diagnostics = self.diagnostics;
        if diagnostics.is_empty() {
            diagnostics.push(Diagnostic::error(None, self.message.clone()));
        }
        (self.status, Json(json!({ "error": self.message, "diagnostics": diagnostics }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::Compile(c) => ApiError {
                status: StatusCode::BAD_REQUEST,
                diagnostics: vec![Diagnostic::error(c.location(), message.clone())],
                message,
            },
            SessionError::Network(n) => n.into(),
            SessionError::Engine(_) => Self::new(StatusCode::BAD_REQUEST, message),
            SessionError::Dictionary(DictionaryError::Io(_)) | SessionError::Io { .. } => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
            }
            SessionError::Dictionary(_) => Self::new(StatusCode::BAD_REQUEST, message),
        }
    }
}

impl From<NetworkError> for ApiError {
    fn from(e: NetworkError) -> Self {
        let status = match e {
            NetworkError::UnknownChip(_) => StatusCode::NOT_FOUND,
            NetworkError::DuplicateChip(_)
            | NetworkError::AlreadyDriven { .. }
            | NetworkError::Cycle { .. }
            | NetworkError::InUse { .. } => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, e.to_string())
    }
}

impl From<CodegenError> for ApiError {
    fn from(e: CodegenError) -> Self {
        let status = match e {
            CodegenError::NotMinMax { .. } | CodegenError::Capacity { .. } | CodegenError::TableTooLarge(_) => {
                StatusCode::CONFLICT
            }
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn definition_json(name: &str, mf: &MembershipFunction) -> Value {
    json!({ "name": name, "levels": mf.levels() })
}

async fn list_definitions(State(state): State<SharedState>) -> Json<Value> {
    let state = state.read().await;
    let defs: Vec<Value> = state.dictionary().iter().map(|(n, mf)| definition_json(n, mf)).collect();
    Json(Value::Array(defs))
}

async fn get_definition(State(state): State<SharedState>, Path(name): Path<String>) -> ApiResult<Json<Value>> {
    let state = state.read().await;
    let mf = state.dictionary().get(&name).ok_or_else(|| ApiError::not_found("definition", &name))?;
    Ok(Json(definition_json(&name.to_ascii_uppercase(), mf)))
}

#[derive(Deserialize)]
struct DefinitionBody {
    levels: Vec<i64>,
}

async fn put_definition(
    State(state): State<SharedState>,
    Path(name): Path<String>,
    Json(body): Json<DefinitionBody>,
) -> ApiResult<Json<Value>> {
    let mf = MembershipFunction::from_slice(&body.levels).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let mut state = state.write().await;
    state.put_definition(&name, mf)?;
    Ok(Json(definition_json(&name.to_ascii_uppercase(), &mf)))
}

async fn list_chips(State(state): State<SharedState>) -> Json<Vec<ChipSummary>> {
    Json(state.read().await.summaries())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateChipBody {
    name: String,
    #[serde(rename = "type")]
    kind: Option<String>,
    rule_text: String,
}

async fn create_chip(
    State(state): State<SharedState>,
    Json(body): Json<CreateChipBody>,
) -> ApiResult<(StatusCode, Json<ChipSummary>)> {
    let kind = match &body.kind {
        Some(k) => k.parse::<ChipType>()?,
        None => ChipType::MinMax,
    };
    let mut state = state.write().await;
    let summary = state.create_chip(&body.name, kind, &body.rule_text)?;
    Ok((StatusCode::CREATED, Json(summary)))
}

#[derive(Deserialize)]
struct InferBody {
    inputs: Vec<f64>,
}

fn crisp_json(o: &CrispOutput) -> Value {
    o.value().map_or(Value::Null, Value::from)
}

async fn infer(
    State(state): State<SharedState>,
    Path(name): Path<String>,
    Json(body): Json<InferBody>,
) -> ApiResult<Json<Value>> {
    let state = state.read().await;
    let chip = state.chip(&name).ok_or_else(|| ApiError::not_found("chip", &name))?;
    let inf = chip.assert_input(&body.inputs)?;
    let alphas = match &inf.activation {
        Activation::Levels(v) => json!(v),
        Activation::Scaled(v) => json!(v),
    };
    let memberships = match &inf.membership {
        OutputMembership::Levels(v) => json!(v),
        OutputMembership::Scaled(v) => json!(v),
    };
    Ok(Json(json!({
        "levels": inf.levels,
        "alphas": alphas,
        "memberships": memberships,
        "outputs": inf.outputs.iter().map(crisp_json).collect::<Vec<_>>(),
    })))
}

#[derive(Deserialize)]
struct CompileBody {
    target: String,
    #[serde(default)]
    bytesize: u32,
    /// `json` (default) or `text` for the memory-chip table.
    format: Option<String>,
}

fn table_value_json(v: TableValue) -> Value {
    match v {
        TableValue::Real(r) => json!(r),
        TableValue::Code(c) => json!(c),
    }
}

async fn compile(
    State(state): State<SharedState>,
    Path(name): Path<String>,
    Json(body): Json<CompileBody>,
) -> ApiResult<Response> {
    let state = state.read().await;
    let chip = state.chip(&name).ok_or_else(|| ApiError::not_found("chip", &name))?;
    match body.target.as_str() {
        "inference-chip" => {
            let bytes = write_rule_image(chip)?.into_bytes();
            Ok((
                [
                    (header::CONTENT_TYPE, "application/octet-stream".to_string()),
                    (header::CONTENT_LENGTH, bytes.len().to_string()),
                ],
                bytes,
            )
                .into_response())
        }
        "memory-chip" => {
            let table = gen_table(chip, body.bytesize)?;
            match body.format.as_deref().unwrap_or("json") {
                "json" => {
                    let rows: Vec<Value> = table
                        .rows()
                        .map(|r| {
                            json!({
                                "address": r.address,
                                "levels": r.levels,
                                "outputs": r.outputs.into_iter().map(table_value_json).collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    Ok(Json(json!({
                        "inputCount": table.input_count(),
                        "outputCount": table.output_count(),
                        "bytesize": table.bytesize(),
                        "noActivation": table.no_activation(),
                        "rows": rows,
                    }))
                    .into_response())
                }
                "text" => Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], emit_table(&table)).into_response()),
                other => Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    format!("unknown table format {other:?} (expected json or text)"),
                )),
            }
        }
        other => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("unknown target {other:?} (expected inference-chip or memory-chip, bytesize 0..={MAX_BYTESIZE})"),
        )),
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ConnectBody {
    src: String,
    src_output: usize,
    dst: String,
    dst_input: usize,
}

async fn connect(
    State(state): State<SharedState>,
    Json(body): Json<ConnectBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let connection = Connection::new(&body.src, body.src_output, &body.dst, body.dst_input);
    let mut state = state.write().await;
    let lints = state.connect(connection.clone())?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "src": connection.src,
            "srcOutput": connection.src_output,
            "dst": connection.dst,
            "dstInput": connection.dst_input,
            "lints": lints.iter().map(|l| l.message.clone()).collect::<Vec<_>>(),
        })),
    ))
}

#[derive(Deserialize)]
struct ExternalInput {
    chip: String,
    input: usize,
    value: f64,
}

#[derive(Deserialize)]
struct PropagateBody {
    inputs: Vec<ExternalInput>,
}

async fn propagate(State(state): State<SharedState>, Json(body): Json<PropagateBody>) -> ApiResult<Json<Value>> {
    let external: BTreeMap<(String, usize), f64> = body
        .inputs
        .iter()
        .map(|i| ((i.chip.to_ascii_uppercase(), i.input), i.value))
        .collect();
    let state = state.read().await;
    let result = state.network().propagate(&external)?;
    let outputs: Vec<Value> = result
        .outputs
        .iter()
        .map(|((chip, output), v)| json!({ "chip": chip, "output": output, "value": crisp_json(v) }))
        .collect();
    Ok(Json(json!({ "order": result.order, "outputs": outputs })))
}
