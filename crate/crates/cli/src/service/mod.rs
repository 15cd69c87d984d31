//! HTTP tuning service.
//!
//! | Method | Path | Result |
//! |---|---|---|
//! | POST | `/sessions` | multipart `image` (`.lfr` or 16-bit PNG), optional `metadata` (JSON), `provider` (`heuristic`/`oracle`), `maps` (`.tmaps`) → session info |
//! | GET | `/sessions/{id}` | session info |
//! | DELETE | `/sessions/{id}` | 204 |
//! | GET | `/sessions/{id}/preview?version=V` | 8-bit PNG, `x-drift-version` header |
//! | PATCH | `/sessions/{id}/profile` | partial profile JSON → `{version}` |
//! | GET | `/sessions/{id}/maps?kind=w_y\|w_c0\|w_c1\|g` | grayscale PNG |
//! | POST | `/sessions/{id}/export` | optional `{output, tiles, overlap}` → job status |
//! | GET | `/jobs/{id}` | job status |
//! | GET | `/jobs/{id}/result` | full-resolution PNG |
//! | GET/POST | `/presets` | names / save (`{name, profile?, session?, metadata_overrides?, force?}`) |
//! | GET | `/presets/{name}` | preset JSON |
//!
//! Errors are JSON `{code, message, field?}`. Mutations of one session are
//! serialized by a per-session lock; distinct sessions run in parallel.

mod error;
mod session;

pub use error::{ApiError, ErrorBody};
pub use session::{parse_patch, ExportJob, ExportRequest, MapsChoice, Session, SessionInfo};

use crate::cli::ServeArgs;
use crate::presets::{Preset, PresetStore};
use crate::render::decode_linear;
use axum::body::Bytes;
use axum::extract::multipart::MultipartRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use drift_core::enhance::{decode_tmaps, CaptureMetadata, MapKind, ProfileSpec};
use drift_core::pipeline::PipelineConfig;
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

pub const VERSION_HEADER: &str = "x-drift-version";
const MAX_UPLOAD_BYTES: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobStatus {
    pub id: String,
    pub session: String,
    pub version: u64,
    pub state: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    result: Option<Arc<Vec<u8>>>,
}

pub struct AppState {
    config: PipelineConfig,
    presets: PresetStore,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    jobs: Arc<Mutex<HashMap<String, JobStatus>>>,
}

impl AppState {
    pub fn new(config: PipelineConfig, presets: PresetStore) -> Arc<Self> {
        Arc::new(AppState {
            config,
            presets,
            sessions: RwLock::new(HashMap::new()),
            jobs: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }
}

type Shared = State<Arc<AppState>>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let body = if body.iter().all(u8::is_ascii_whitespace) { b"{}".as_slice() } else { body };
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

fn png_response(png: &[u8], version: Option<u64>) -> Response {
    let mut resp = (StatusCode::OK, png.to_vec()).into_response();
    let headers = resp.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    headers.insert(header::CACHE_CONTROL, HeaderValue::from_static("no-store"));
    if let Some(v) = version {
        headers.insert(VERSION_HEADER, HeaderValue::from(v));
    }
    resp
}

async fn create_session(State(app): Shared, multipart: Result<Multipart, MultipartRejection>) -> Result<Response, ApiError> {
    let mut multipart = multipart.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let mut image: Option<Bytes> = None;
    let mut metadata: Option<CaptureMetadata> = None;
    let mut provider = String::from("heuristic");
    let mut maps: Option<Bytes> = None;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(e.body_text()))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let data = field.bytes().await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        match name.as_str() {
            "image" => image = Some(data),
            "metadata" => {
                metadata = Some(
                    serde_json::from_slice(&data).map_err(|e| ApiError::validation("metadata", e.to_string()))?,
                )
            }
            "provider" => provider = String::from_utf8_lossy(&data).trim().to_string(),
            "maps" => maps = Some(data),
            other => return Err(ApiError::validation(other, format!("unexpected form field {other:?}"))),
        }
    }
    let image = image.ok_or_else(|| ApiError::validation("image", "missing image upload"))?;
    let mut cfg = app.config.clone();
    if let Some(m) = metadata {
        m.validate().map_err(|e| ApiError::validation("metadata", e.to_string()))?;
        cfg.metadata = m;
    }
    let bounds = cfg.heuristic.gain_bounds;
    let choice = match (maps, provider.as_str()) {
        (Some(bytes), _) => MapsChoice::Supplied(decode_tmaps(&bytes, bounds).map_err(|e| ApiError::validation("maps", e.to_string()))?),
        (None, "heuristic") => MapsChoice::Heuristic,
        (None, "oracle") => MapsChoice::Oracle,
        (None, other) => return Err(ApiError::validation("provider", format!("unknown provider {other:?}"))),
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let sid = id.clone();
    let session = blocking(move || {
        let hdr = decode_linear(&image).map_err(|e| ApiError::validation("image", e.to_string()))?;
        Session::create(sid, hdr, cfg, choice)
    })
    .await?;
    let info = session.info();
    app.sessions.write().insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

async fn get_session(State(app): Shared, Path(id): Path<String>) -> Result<Json<SessionInfo>, ApiError> {
    let s = app.session(&id)?;
    let info = s.lock().info();
    Ok(Json(info))
}

async fn delete_session(State(app): Shared, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    app.sessions
        .write()
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiError::not_found("session", &id))
}

#[derive(Debug, Deserialize)]
struct PreviewQuery {
    version: Option<u64>,
}

async fn get_preview(
    State(app): Shared,
    Path(id): Path<String>,
    Query(q): Query<PreviewQuery>,
) -> Result<Response, ApiError> {
    let s = app.session(&id)?;
    let (version, png) = blocking(move || {
        let mut s = s.lock();
        if let Some(v) = q.version {
            if v > s.version() {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "unknown_version",
                    format!("version {v} is ahead of the session (at {})", s.version()),
                )
                .with_field("version"));
            }
        }
        s.preview_png()
    })
    .await?;
    Ok(png_response(&png, Some(version)))
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct VersionReceipt {
    pub version: u64,
}

async fn patch_profile(State(app): Shared, Path(id): Path<String>, body: Bytes) -> Result<Json<VersionReceipt>, ApiError> {
    let s = app.session(&id)?;
    let value: serde_json::Value = parse_json(&body)?;
    let patch = parse_patch(&value)?;
    let version = blocking(move || s.lock().apply_patch(&patch)).await?;
    Ok(Json(VersionReceipt { version }))
}

#[derive(Debug, Deserialize)]
struct MapsQuery {
    kind: String,
}

async fn get_maps(State(app): Shared, Path(id): Path<String>, Query(q): Query<MapsQuery>) -> Result<Response, ApiError> {
    let s = app.session(&id)?;
    let kind: MapKind = q.kind.parse().map_err(|e: drift_core::Error| ApiError::validation("kind", e.to_string()))?;
    let (version, png) = blocking(move || {
        let s = s.lock();
        Ok((s.version(), s.maps_png(kind)?))
    })
    .await?;
    Ok(png_response(&png, Some(version)))
}

async fn post_export(State(app): Shared, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let s = app.session(&id)?;
    let req: ExportRequest = parse_json(&body)?;
    let job = s.lock().export(&req)?;
    let job_id = uuid::Uuid::new_v4().simple().to_string();
    let status = JobStatus {
        id: job_id.clone(),
        session: id,
        version: job.version,
        state: JobState::Running,
        error: None,
        result: None,
    };
    app.jobs.lock().insert(job_id.clone(), status.clone());
    let jobs = app.jobs.clone();
    tokio::task::spawn_blocking(move || {
        let outcome = job.run();
        let mut jobs = jobs.lock();
        if let Some(st) = jobs.get_mut(&job_id) {
            match outcome {
                Ok(png) => {
                    st.state = JobState::Done;
                    st.result = Some(Arc::new(png));
                }
                Err(e) => {
                    st.state = JobState::Failed;
                    st.error = Some(e.to_string());
                }
            }
        }
    });
    Ok((StatusCode::ACCEPTED, Json(status)).into_response())
}

async fn get_job(State(app): Shared, Path(id): Path<String>) -> Result<Json<JobStatus>, ApiError> {
    app.jobs
        .lock()
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found("job", &id))
}

async fn get_job_result(State(app): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let job = app.jobs.lock().get(&id).cloned().ok_or_else(|| ApiError::not_found("job", &id))?;
    match (job.state, job.result) {
        (JobState::Done, Some(png)) => Ok(png_response(&png, Some(job.version))),
        (JobState::Failed, _) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "job_failed",
            job.error.unwrap_or_default(),
        )),
        _ => Err(ApiError::new(StatusCode::CONFLICT, "not_ready", "export is still running")),
    }
}

#[derive(Debug, Serialize)]
struct PresetList {
    presets: Vec<String>,
}

async fn list_presets(State(app): Shared) -> Result<Json<PresetList>, ApiError> {
    Ok(Json(PresetList {
        presets: app.presets.list()?,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetRequest {
    name: String,
    #[serde(default)]
    profile: Option<serde_json::Value>,
    /// Take the profile from this session instead.
    #[serde(default)]
    session: Option<String>,
    #[serde(default)]
    metadata_overrides: Option<CaptureMetadata>,
    #[serde(default)]
    force: bool,
}

async fn create_preset(State(app): Shared, body: Bytes) -> Result<Response, ApiError> {
    let req: PresetRequest = parse_json(&body)?;
    let profile = match (&req.session, &req.profile) {
        (Some(_), Some(_)) => {
            return Err(ApiError::validation("profile", "give either a profile or a session, not both"));
        }
        (Some(sid), None) => app.session(sid)?.lock().spec().clone(),
        (None, Some(v)) => ProfileSpec::default().merged(&parse_patch(v)?),
        (None, None) => ProfileSpec::default(),
    };
    profile
        .resolve(None, None)
        .map_err(|e| ApiError::validation("profile", e.to_string()))?;
    if let Some(m) = &req.metadata_overrides {
        m.validate().map_err(|e| ApiError::validation("metadata_overrides", e.to_string()))?;
    }
    let preset = Preset {
        metadata_overrides: req.metadata_overrides,
        ..Preset::new(req.name, profile)
    };
    app.presets.save(&preset, req.force)?;
    Ok((StatusCode::CREATED, Json(preset)).into_response())
}

async fn get_preset(State(app): Shared, Path(name): Path<String>) -> Result<Json<Preset>, ApiError> {
    Ok(Json(app.presets.load(&name)?))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", axum::routing::post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/preview", get(get_preview))
        .route("/sessions/{id}/profile", axum::routing::patch(patch_profile))
        .route("/sessions/{id}/maps", get(get_maps))
        .route("/sessions/{id}/export", axum::routing::post(post_export))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/result", get(get_job_result))
        .route("/presets", get(list_presets).post(create_preset))
        .route("/presets/{name}", get(get_preset))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

pub fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let config = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let state = AppState::new(config, PresetStore::new(&args.preset_dir));
    let app = router(state, args.static_dir.clone());
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(args.addr)
            .await
            .map_err(|e| anyhow::anyhow!("binding {}: {e}", args.addr))?;
        println!("listening on http://{}", listener.local_addr()?);
        if args.check {
            return Ok(());
        }
        axum::serve(listener, app).await?;
        Ok(())
    })
}
