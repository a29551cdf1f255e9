//! HTTP JSON service over a loaded predictor bundle and model catalog.
//!
//! Every response body carries `schema_version`. Errors are JSON objects
//! `{schema_version, error, message}`: 422 for malformed or invalid input,
//! 409 when no bundle is loaded or a training run is already in progress,
//! 404 for metadata that does not exist yet.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use plansynth_core::corpus::load_corpus;
use plansynth_core::formats::{from_value, parse_json, write_document, SCHEMA_VERSION};
use plansynth_core::predictors::{train_bundle, TrainConfig};
use plansynth_core::scene::validate_scene;
use plansynth_core::synth::{complete, place_object, suggest, synthesize, Attempt, CATALOG_KIND};
use plansynth_core::{
    Error, Heatmap, ModelCatalog, Point, PredictorBundle, RasterConfig, Room, Scene, SceneObject, SynthesisConfig,
    SynthesisTrace,
};

/// A bundle with the catalog it synthesizes from.
#[derive(Debug)]
pub struct Loaded {
    pub bundle: PredictorBundle,
    pub catalog: ModelCatalog,
    pub bundle_path: Option<PathBuf>,
}

struct Inner {
    loaded: RwLock<Option<Arc<Loaded>>>,
    train_lock: tokio::sync::Mutex<()>,
    data_dir: PathBuf,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// `data_dir` receives bundles and catalogs written by `/train`.
    pub fn new(loaded: Option<Loaded>, data_dir: PathBuf) -> Self {
        Self {
            inner: Arc::new(Inner {
                loaded: RwLock::new(loaded.map(Arc::new)),
                train_lock: tokio::sync::Mutex::new(()),
                data_dir,
            }),
        }
    }

    pub fn loaded(&self) -> Option<Arc<Loaded>> {
        self.inner.loaded.read().expect("bundle lock poisoned").clone()
    }

    fn require(&self) -> Result<Arc<Loaded>, ApiError> {
        self.loaded()
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no_bundle", "no predictor bundle is loaded"))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/synthesize", post(synthesize_handler))
        .route("/complete", post(complete_handler))
        .route("/suggest", post(suggest_handler))
        .route("/place", post(place_handler))
        .route("/train", post(train_handler))
        .route("/bundle", get(bundle_handler))
        .route("/models", get(models_handler))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        let (status, kind) = match &e {
            Error::Schema { .. } | Error::SchemaVersion { .. } | Error::Json(_) => (unprocessable, "schema"),
            Error::InvalidScene(_) => (unprocessable, "invalid_scene"),
            Error::NoValidLocation { .. } => (unprocessable, "no_valid_location"),
            Error::RoomTooLarge { .. } => (unprocessable, "room_too_large"),
            Error::InvalidArgument(_) => (unprocessable, "invalid_argument"),
            Error::EmptyInput(_) => (unprocessable, "empty_input"),
            Error::VocabularyMismatch(_) => (unprocessable, "vocabulary_mismatch"),
            Error::NoCatalogEntry(_) => (unprocessable, "no_catalog_entry"),
            Error::PlacementRejected(_) => (unprocessable, "placement_rejected"),
            Error::Untrained => (StatusCode::CONFLICT, "untrained"),
            Error::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "io"),
        };
        Self::new(status, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": self.kind,
            "message": self.message,
        });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Parses a request body, reporting the failing field on error.
fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    let text = std::str::from_utf8(body)
        .map_err(|_| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "schema", "body is not UTF-8"))?;
    Ok(parse_json(text, 1)?)
}

/// The request's synthesis config; a fresh seed is drawn when the client
/// sent none, and echoed back through the trace.
fn synthesis_config(config: Option<Value>) -> Result<SynthesisConfig, ApiError> {
    let has_seed = config.as_ref().is_some_and(|c| c.get("seed").is_some_and(|s| !s.is_null()));
    let mut cfg: SynthesisConfig = match config {
        Some(v) => from_value(v).map_err(|e| prefix_field(e, "config"))?,
        None => SynthesisConfig::default(),
    };
    if !has_seed {
        cfg.seed = rand::random();
    }
    cfg.check()?;
    Ok(cfg)
}

fn prefix_field(e: Error, field: &str) -> ApiError {
    let mut err = ApiError::from(e);
    err.message = format!("in `{field}`: {}", err.message);
    err
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

#[derive(Serialize)]
struct Health {
    schema_version: u32,
    status: &'static str,
    bundle_loaded: bool,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        schema_version: SCHEMA_VERSION,
        status: "ok",
        bundle_loaded: state.loaded().is_some(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthesizeRequest {
    room: Room,
    #[serde(default)]
    config: Option<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SceneResponse {
    pub schema_version: u32,
    pub scene: Scene,
    pub trace: SynthesisTrace,
}

async fn synthesize_handler(State(state): State<AppState>, body: Bytes) -> ApiResult<SceneResponse> {
    let loaded = state.require()?;
    let mut req: SynthesizeRequest = parse_body(&body)?;
    let cfg = synthesis_config(req.config.take())?;
    let (scene, trace) = blocking(move || Ok(synthesize(&req.room, &loaded.catalog, &loaded.bundle, &cfg)?)).await?;
    Ok(Json(SceneResponse {
        schema_version: SCHEMA_VERSION,
        scene,
        trace,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompleteRequest {
    scene: Scene,
    #[serde(default)]
    config: Option<Value>,
}

async fn complete_handler(State(state): State<AppState>, body: Bytes) -> ApiResult<SceneResponse> {
    let loaded = state.require()?;
    let mut req: CompleteRequest = parse_body(&body)?;
    let cfg = synthesis_config(req.config.take())?;
    let (scene, trace) = blocking(move || Ok(complete(&req.scene, &loaded.catalog, &loaded.bundle, &cfg)?)).await?;
    Ok(Json(SceneResponse {
        schema_version: SCHEMA_VERSION,
        scene,
        trace,
    }))
}

fn check_scene(scene: &Scene, loaded: &Loaded) -> Result<(), ApiError> {
    let violations = validate_scene(scene, &loaded.bundle.vocabulary);
    if violations.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    Err(ApiError::new(
        StatusCode::UNPROCESSABLE_ENTITY,
        "invalid_scene",
        list.join("; "),
    ))
}

const DEFAULT_TOP_K: usize = 3;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuggestRequest {
    scene: Scene,
    top_k: Option<usize>,
}

/// Next-object suggestions: the category distribution (STOP last) and the
/// location heatmaps of the `top_k` most likely categories. Heatmaps are
/// row-major value grids with their image frame.
#[derive(Debug, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub schema_version: u32,
    pub categories: Vec<String>,
    pub category_distribution: Vec<f64>,
    pub heatmaps: Vec<Heatmap>,
    /// Top categories whose heatmap had no admissible pixel.
    pub unplaceable: Vec<usize>,
    pub raster: RasterConfig,
}

async fn suggest_handler(State(state): State<AppState>, body: Bytes) -> ApiResult<SuggestResponse> {
    let loaded = state.require()?;
    let req: SuggestRequest = parse_body(&body)?;
    check_scene(&req.scene, &loaded)?;
    let top_k = req.top_k.unwrap_or(DEFAULT_TOP_K);
    blocking(move || {
        let s = suggest(&req.scene, &loaded.bundle, top_k)?;
        let vocab = &loaded.bundle.vocabulary;
        Ok(Json(SuggestResponse {
            schema_version: SCHEMA_VERSION,
            categories: (0..vocab.len()).map(|c| vocab.name(c).to_string()).collect(),
            category_distribution: s.category_distribution,
            heatmaps: s.heatmaps,
            unplaceable: s.unplaceable,
            raster: loaded.bundle.raster,
        }))
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceRequest {
    scene: Scene,
    category_id: usize,
    location: Option<Point>,
    #[serde(default)]
    config: Option<Value>,
}

/// A proposed object; `object` is null when every candidate model was
/// rejected, with the reason in `attempt.failure`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PlaceResponse {
    pub schema_version: u32,
    pub seed: u64,
    pub object: Option<SceneObject>,
    pub attempt: Attempt,
}

async fn place_handler(State(state): State<AppState>, body: Bytes) -> ApiResult<PlaceResponse> {
    let loaded = state.require()?;
    let mut req: PlaceRequest = parse_body(&body)?;
    let cfg = synthesis_config(req.config.take())?;
    check_scene(&req.scene, &loaded)?;
    let seed = cfg.seed;
    let p = blocking(move || {
        Ok(place_object(
            &req.scene,
            req.category_id,
            req.location,
            &loaded.catalog,
            &loaded.bundle,
            &cfg,
        )?)
    })
    .await?;
    Ok(Json(PlaceResponse {
        schema_version: SCHEMA_VERSION,
        seed,
        object: p.object,
        attempt: p.attempt,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainRequest {
    corpus_path: PathBuf,
    #[serde(default)]
    params: TrainConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BundleSummary {
    pub schema_version: u32,
    pub version: String,
    pub categories: Vec<String>,
    pub room_types: Vec<String>,
    pub raster: RasterConfig,
    pub train_config: TrainConfig,
    pub bundle_path: Option<PathBuf>,
    pub catalog_models: usize,
}

fn summary(l: &Loaded) -> BundleSummary {
    let v = &l.bundle.vocabulary;
    BundleSummary {
        schema_version: SCHEMA_VERSION,
        version: l.bundle.version.clone(),
        categories: (0..v.len()).map(|c| v.name(c).to_string()).collect(),
        room_types: l.bundle.room_types.clone(),
        raster: l.bundle.raster,
        train_config: l.bundle.train_config.clone(),
        bundle_path: l.bundle_path.clone(),
        catalog_models: l.catalog.len(),
    }
}

/// Trains on a corpus file, writes `bundle.json` and `catalog.json` into
/// the data directory and swaps the new bundle in. Requests already
/// running keep the bundle they started with.
async fn train_handler(State(state): State<AppState>, body: Bytes) -> ApiResult<BundleSummary> {
    let req: TrainRequest = parse_body(&body)?;
    let Ok(_guard) = state.inner.train_lock.try_lock() else {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "training_in_progress",
            "another training run is in progress",
        ));
    };
    let data_dir = state.inner.data_dir.clone();
    let loaded = blocking(move || {
        let corpus = load_corpus(&req.corpus_path).map_err(|e| match e {
            Error::Io(io) => ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "corpus_unreadable",
                format!("cannot read `{}`: {io}", req.corpus_path.display()),
            ),
            other => other.into(),
        })?;
        let (bundle, _) = train_bundle(&corpus, &req.params)?;
        let catalog = ModelCatalog::from_scenes(&corpus.scenes, corpus.vocabulary.len());
        std::fs::create_dir_all(&data_dir).map_err(|e| ApiError::internal(e.to_string()))?;
        let bundle_path = data_dir.join("bundle.json");
        bundle.save(&bundle_path)?;
        write_document(&data_dir.join("catalog.json"), CATALOG_KIND, &catalog)?;
        Ok(Loaded {
            bundle,
            catalog,
            bundle_path: Some(bundle_path),
        })
    })
    .await?;
    let out = summary(&loaded);
    *state.inner.loaded.write().expect("bundle lock poisoned") = Some(Arc::new(loaded));
    Ok(Json(out))
}

fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no_bundle", "no predictor bundle is loaded")
}

async fn bundle_handler(State(state): State<AppState>) -> ApiResult<BundleSummary> {
    let loaded = state.loaded().ok_or_else(not_found)?;
    Ok(Json(summary(&loaded)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelsResponse {
    pub schema_version: u32,
    pub kind: String,
    pub body: ModelCatalog,
}

async fn models_handler(State(state): State<AppState>) -> ApiResult<ModelsResponse> {
    let loaded = state.loaded().ok_or_else(not_found)?;
    Ok(Json(ModelsResponse {
        schema_version: SCHEMA_VERSION,
        kind: CATALOG_KIND.to_string(),
        body: loaded.catalog.clone(),
    }))
}
