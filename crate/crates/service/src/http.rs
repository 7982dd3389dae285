use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use avqa_core::corpus::{AnnotatorId, AnswerGrouping, QuestionId};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::store::{ExportFilter, Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Annotator,
    /// May submit vetting edits.
    Vetter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    pub annotator: AnnotatorId,
    #[serde(default)]
    pub role: Role,
}

/// Bearer token → identity. An empty table switches the service to open
/// mode: callers name themselves and nobody may vet.
pub type Tokens = BTreeMap<String, Identity>;

#[derive(Clone)]
pub struct AppState {
    store: Arc<Mutex<Store>>,
    tokens: Arc<Tokens>,
}

impl AppState {
    pub fn new(store: Store, tokens: Tokens) -> Self {
        Self {
            store: Arc::new(Mutex::new(store)),
            tokens: Arc::new(tokens),
        }
    }

    /// The store is only mutated after a successful log append, so a panic
    /// elsewhere cannot leave it half-updated.
    fn store(&self) -> MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn identify(
        &self,
        headers: &HeaderMap,
        claimed: Option<&AnnotatorId>,
    ) -> Result<Identity, ApiError> {
        if self.tokens.is_empty() {
            return claimed
                .map(|a| Identity {
                    annotator: a.clone(),
                    role: Role::Annotator,
                })
                .ok_or_else(|| ApiError::bad_request("annotator is required"));
        }
        let token = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "missing bearer token"))?;
        let id = self
            .tokens
            .get(token.trim())
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "unknown token"))?;
        if claimed.is_some_and(|c| c != &id.annotator) {
            return Err(ApiError::new(
                StatusCode::FORBIDDEN,
                "token does not belong to the named annotator",
            ));
        }
        Ok(id.clone())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    invariant: Option<&'static str>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            invariant: None,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::Validation(v) => {
                return Self {
                    status: StatusCode::UNPROCESSABLE_ENTITY,
                    message: v.detail.clone(),
                    invariant: Some(v.invariant.as_str()),
                }
            }
            StoreError::NoLease { .. } => StatusCode::CONFLICT,
            StoreError::UnknownExample(_) | StoreError::NothingToVet { .. } => {
                StatusCode::NOT_FOUND
            }
            StoreError::Forbidden(_) => StatusCode::FORBIDDEN,
            StoreError::NoSplits => StatusCode::BAD_REQUEST,
            StoreError::BadQueue { .. } | StoreError::CorruptLog { .. } | StoreError::Io { .. } => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(inv) = self.invariant {
            body["invariant"] = json!(inv);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<AnnotatorId>,
}

async fn next_example(
    State(st): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<NextQuery>,
) -> ApiResult<impl IntoResponse> {
    let id = st.identify(&headers, q.annotator.as_ref())?;
    Ok(Json(st.store().next_example(&id.annotator)))
}

#[derive(Serialize)]
struct Accepted {
    seq: u64,
}

async fn submit_annotation(
    State(st): State<AppState>,
    headers: HeaderMap,
    Json(grouping): Json<AnswerGrouping>,
) -> ApiResult<impl IntoResponse> {
    let id = st.identify(&headers, Some(&grouping.annotator_id))?;
    let seq = st.store().submit_annotation(&id.annotator, grouping)?;
    Ok((StatusCode::CREATED, Json(Accepted { seq })))
}

#[derive(Deserialize)]
struct SkipBody {
    question_id: QuestionId,
    #[serde(default)]
    annotator_id: Option<AnnotatorId>,
    #[serde(default)]
    reason: Option<String>,
}

async fn skip_example(
    State(st): State<AppState>,
    headers: HeaderMap,
    Json(body): Json<SkipBody>,
) -> ApiResult<impl IntoResponse> {
    let id = st.identify(&headers, body.annotator_id.as_ref())?;
    let seq = st
        .store()
        .skip_example(&id.annotator, &body.question_id, body.reason)?;
    Ok((StatusCode::CREATED, Json(Accepted { seq })))
}

async fn vet(
    State(st): State<AppState>,
    headers: HeaderMap,
    Json(grouping): Json<AnswerGrouping>,
) -> ApiResult<impl IntoResponse> {
    let id = st.identify(&headers, None)?;
    if id.role != Role::Vetter {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "vetting requires the vetter role",
        ));
    }
    let seq = st.store().vet(&id.annotator, grouping)?;
    Ok((StatusCode::CREATED, Json(Accepted { seq })))
}

async fn get_example(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    let qid = QuestionId(id);
    let store = st.store();
    let ex = store
        .example(&qid)
        .ok_or_else(|| ApiError::from(StoreError::UnknownExample(qid.clone())))?;
    Ok(Json(ex.clone()))
}

/// JSONL body in the corpus exchange format; the summary rides along in
/// the `x-dataset-summary` header as JSON.
async fn export(
    State(st): State<AppState>,
    Query(filter): Query<ExportFilter>,
) -> ApiResult<impl IntoResponse> {
    let ex = st.store().export(filter)?;
    let summary = serde_json::to_string(&ex.summary).expect("summary serializes");
    let mut headers = HeaderMap::new();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/x-ndjson"),
    );
    headers.insert(
        "x-dataset-summary",
        HeaderValue::from_str(&summary).expect("JSON is a valid header value"),
    );
    Ok((headers, ex.to_jsonl()))
}

async fn agreement(State(st): State<AppState>) -> impl IntoResponse {
    Json(st.store().agreement())
}

async fn stats(State(st): State<AppState>) -> impl IntoResponse {
    Json(st.store().stats())
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/queue/next", get(next_example))
        .route("/api/annotations", post(submit_annotation))
        .route("/api/skips", post(skip_example))
        .route("/api/vettings", post(vet))
        .route("/api/examples/{id}", get(get_example))
        .route("/api/export", get(export))
        .route("/api/agreement", get(agreement))
        .route("/api/stats", get(stats))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}
