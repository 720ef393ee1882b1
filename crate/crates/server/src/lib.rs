//! HTTP front end for [`gso::annotation::AnnotationStore`].
//!
//! ```text
//! GET  /forest                     summary and the three trees
//! GET  /synsets?q=&pos=&limit=     prefix search
//! POST /workers                    {"worker_id"}
//! POST /tasks                      {"gif_id","gif_uri","required_workers"?}
//! GET  /tasks                      every task with its status
//! GET  /tasks/next?worker=         {"task": AnnotationTask | null}
//! POST /annotations                Submission -> Ack
//! GET  /gifs/{id}/annotations      raw worker annotations
//! GET  /gifs/{id}/consolidated     ConsolidatedLabel
//! GET  /export?include_cant_judge= .gso.jsonl body
//! GET  /stats                      StoreStats
//! ```
//!
//! Errors are `{"error": {"code", "message", "report"?}}` where `code` is
//! the store error name.

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gso::annotation::{AnnotationError, AnnotationStore, ExportFilter, Submission};
use gso::ontology::{Pos, Synset};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::net::SocketAddr;
use std::sync::Arc;

/// Optional header naming the calling worker. When present it must agree
/// with the worker named in the request.
pub const WORKER_HEADER: &str = "x-worker-id";

#[derive(Debug)]
pub struct ApiError(pub AnnotationError);

impl From<AnnotationError> for ApiError {
    fn from(e: AnnotationError) -> Self {
        ApiError(e)
    }
}

impl ApiError {
    fn bad(msg: impl Into<String>) -> Self {
        ApiError(AnnotationError::InvalidRequest(msg.into()))
    }

    pub fn status(&self) -> StatusCode {
        match &self.0 {
            AnnotationError::UnknownWorker(_) | AnnotationError::UnknownTask(_) => StatusCode::NOT_FOUND,
            AnnotationError::InvalidSequence(_) => StatusCode::UNPROCESSABLE_ENTITY,
            AnnotationError::NoAnnotations(_) | AnnotationError::DuplicateTask(_) => StatusCode::CONFLICT,
            AnnotationError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            AnnotationError::Io(_) | AnnotationError::Corrupt(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.0.code(), "message": self.0.to_string() });
        if let AnnotationError::InvalidSequence(report) = &self.0 {
            body["report"] = serde_json::to_value(report).expect("report serializes");
        }
        if self.status().is_server_error() {
            log::error!("{}", self.0);
        }
        (self.status(), Json(json!({ "error": body }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad(format!("malformed body: {e}")))
}

fn check_header(headers: &HeaderMap, worker_id: &str) -> ApiResult<()> {
    match headers.get(WORKER_HEADER).map(|v| v.to_str()) {
        None => Ok(()),
        Some(Ok(h)) if h == worker_id => Ok(()),
        Some(_) => Err(ApiError::bad(format!("{WORKER_HEADER} does not match worker `{worker_id}`"))),
    }
}

/// Runs a store call off the async workers; submissions fsync.
async fn blocking<T: Send + 'static>(
    store: &Arc<AnnotationStore>,
    f: impl FnOnce(&AnnotationStore) -> Result<T, AnnotationError> + Send + 'static,
) -> ApiResult<T> {
    let store = store.clone();
    tokio::task::spawn_blocking(move || f(&store)).await.map_err(|e| ApiError(AnnotationError::Io(e.to_string())))?.map_err(ApiError)
}

pub fn router(store: Arc<AnnotationStore>) -> Router {
    Router::new()
        .route("/forest", get(forest))
        .route("/synsets", get(synsets))
        .route("/workers", post(register_worker))
        .route("/tasks", get(list_tasks).post(add_task))
        .route("/tasks/next", get(next_task))
        .route("/annotations", post(submit))
        .route("/gifs/{id}/annotations", get(annotations))
        .route("/gifs/{id}/consolidated", get(consolidated))
        .route("/export", get(export))
        .route("/stats", get(stats))
        .with_state(store)
}

/// Binds and serves until ctrl-c.
pub async fn serve(addr: SocketAddr, store: Arc<AnnotationStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn forest(State(store): State<Arc<AnnotationStore>>) -> Json<serde_json::Value> {
    let f = store.forest();
    Json(json!({
        "summary": f.summary(),
        "trees": Pos::ALL.iter().map(|&p| f.tree(p)).collect::<Vec<_>>(),
    }))
}

#[derive(Deserialize)]
struct SynsetQuery {
    #[serde(default)]
    q: String,
    pos: Option<String>,
    limit: Option<usize>,
}

async fn synsets(State(store): State<Arc<AnnotationStore>>, Query(q): Query<SynsetQuery>) -> ApiResult<Json<Vec<Synset>>> {
    let pos = match q.pos.as_deref().filter(|p| !p.is_empty()) {
        Some(p) => Some(p.parse::<Pos>().map_err(ApiError::bad)?),
        None => None,
    };
    let hits = store.forest().search(&q.q, pos);
    Ok(Json(hits.into_iter().take(q.limit.unwrap_or(usize::MAX)).cloned().collect()))
}

#[derive(Serialize, Deserialize)]
struct WorkerBody {
    worker_id: String,
}

async fn register_worker(State(store): State<Arc<AnnotationStore>>, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    let WorkerBody { worker_id } = parse_body(&body)?;
    check_header(&headers, &worker_id)?;
    let id = worker_id.clone();
    blocking(&store, move |s| s.register_worker(&id)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "worker_id": worker_id.trim() }))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskBody {
    gif_id: String,
    gif_uri: String,
    required_workers: Option<usize>,
}

async fn add_task(State(store): State<Arc<AnnotationStore>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let t: TaskBody = parse_body(&body)?;
    let task = blocking(&store, move |s| s.add_task(&t.gif_id, &t.gif_uri, t.required_workers)).await?;
    Ok((StatusCode::CREATED, Json(task)))
}

async fn list_tasks(State(store): State<Arc<AnnotationStore>>) -> impl IntoResponse {
    Json(store.tasks())
}

#[derive(Deserialize)]
struct NextQuery {
    worker: Option<String>,
}

async fn next_task(State(store): State<Arc<AnnotationStore>>, headers: HeaderMap, Query(q): Query<NextQuery>) -> ApiResult<impl IntoResponse> {
    let worker = match q.worker {
        Some(w) => w,
        None => headers
            .get(WORKER_HEADER)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string)
            .ok_or_else(|| ApiError::bad("missing `worker` query parameter"))?,
    };
    check_header(&headers, &worker)?;
    let task = blocking(&store, move |s| s.next_task(&worker)).await?;
    Ok(Json(json!({ "task": task })))
}

async fn submit(State(store): State<Arc<AnnotationStore>>, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    let sub: Submission = parse_body(&body)?;
    check_header(&headers, &sub.worker_id)?;
    Ok(Json(blocking(&store, move |s| s.submit(&sub)).await?))
}

async fn annotations(State(store): State<Arc<AnnotationStore>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(store.annotations(&id)?))
}

async fn consolidated(State(store): State<Arc<AnnotationStore>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(store.consolidate(&id)?))
}

#[derive(Deserialize)]
struct ExportQuery {
    include_cant_judge: Option<bool>,
}

async fn export(State(store): State<Arc<AnnotationStore>>, Query(q): Query<ExportQuery>) -> ApiResult<impl IntoResponse> {
    let filter = ExportFilter { include_cant_judge: q.include_cant_judge.unwrap_or(true) };
    let body = store.export(filter)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson; charset=utf-8")], body))
}

async fn stats(State(store): State<Arc<AnnotationStore>>) -> ApiResult<impl IntoResponse> {
    Ok(Json(store.stats()?))
}
