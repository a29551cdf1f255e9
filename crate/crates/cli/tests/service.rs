use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use plansynth_cli::api::{router, AppState, Loaded};
use plansynth_core::corpus::{generate_synthetic_corpus, save_corpus, GeneratorParams};
use plansynth_core::predictors::{train_bundle, TrainConfig};
use plansynth_core::scene::validate_scene;
use plansynth_core::synth::{collision_check, place_object, suggest};
use plansynth_core::{ModelCatalog, PredictorBundle, Room, Scene, SynthesisConfig};

fn small_train_config() -> TrainConfig {
    TrainConfig {
        seed: 3,
        category_examples: 10,
        location_examples: 2,
        orientation_examples: 4,
        dims_examples: 4,
        ..TrainConfig::default()
    }
}

struct Fixture {
    _dir: tempfile::TempDir,
    corpus_path: PathBuf,
    bundle: PredictorBundle,
    catalog: ModelCatalog,
    rooms: Vec<Room>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_synthetic_corpus(&GeneratorParams::default(), 50, 11);
        let corpus_path = dir.path().join("corpus.jsonl");
        save_corpus(&corpus, &corpus_path).unwrap();
        let (bundle, _) = train_bundle(&corpus, &small_train_config()).unwrap();
        let catalog = ModelCatalog::from_scenes(&corpus.scenes, corpus.vocabulary.len());
        Fixture {
            _dir: dir,
            corpus_path,
            bundle,
            catalog,
            rooms: corpus.scenes.iter().map(|s| s.room.clone()).collect(),
        }
    })
}

fn loaded_app() -> Router {
    let f = fixture();
    let loaded = Loaded {
        bundle: f.bundle.clone(),
        catalog: f.catalog.clone(),
        bundle_path: None,
    };
    router(AppState::new(Some(loaded), std::env::temp_dir()))
}

fn empty_app(data_dir: &Path) -> Router {
    router(AppState::new(None, data_dir.to_path_buf()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn call_raw(app: &Router, uri: &str, body: Value) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method("POST")
        .uri(uri)
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn scene_of(v: &Value) -> Scene {
    serde_json::from_value(v["scene"].clone()).unwrap()
}

#[tokio::test]
async fn endpoints_without_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let app = empty_app(dir.path());
    let (s, body) = call(&app, "GET", "/bundle", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(body["schema_version"], 1);
    assert_eq!(call(&app, "GET", "/models", None).await.0, StatusCode::NOT_FOUND);
    let room = serde_json::to_value(Room::rectangle(4.0, 4.0, "bedroom")).unwrap();
    let (s, body) = call(&app, "POST", "/synthesize", Some(json!({ "room": room }))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["error"], "no_bundle");
    let (s, body) = call(&app, "GET", "/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["bundle_loaded"], false);
}

#[tokio::test]
async fn training_persists_a_reproducible_bundle() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let app = empty_app(dir.path());
    let req = json!({ "corpus_path": f.corpus_path, "params": small_train_config() });
    let (s, summary) = call(&app, "POST", "/train", Some(req.clone())).await;
    assert_eq!(s, StatusCode::OK, "{summary}");
    assert_eq!(summary["categories"].as_array().unwrap().len(), f.bundle.vocabulary.len());
    let path = dir.path().join("bundle.json");
    let first = std::fs::read(&path).unwrap();
    let reloaded = PredictorBundle::load(&path).unwrap();
    assert_eq!(reloaded, f.bundle);

    let (s, _) = call(&app, "GET", "/bundle", None).await;
    assert_eq!(s, StatusCode::OK);
    let (s, models) = call(&app, "GET", "/models", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(models["body"]["entries"].as_array().unwrap().len(), f.catalog.len());

    let (s, _) = call(&app, "POST", "/train", Some(req)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[tokio::test]
async fn training_rejects_bad_input_without_state_changes() {
    let dir = tempfile::tempdir().unwrap();
    let app = empty_app(dir.path());
    let (s, body) = call(&app, "POST", "/train", Some(json!({ "corpus_path": dir.path().join("nope.jsonl") }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "corpus_unreadable");
    let (s, body) = call(&app, "POST", "/train", Some(json!({ "corpus": "x" }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["message"].as_str().unwrap().contains("corpus"));
    assert_eq!(call(&app, "GET", "/bundle", None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn concurrent_training_is_rejected() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let app = empty_app(dir.path());
    let req = json!({ "corpus_path": f.corpus_path, "params": small_train_config() });
    // the first request takes the lock before the second is polled
    let (a, b) = tokio::join!(
        call(&app, "POST", "/train", Some(req.clone())),
        call(&app, "POST", "/train", Some(req))
    );
    assert_eq!(a.0, StatusCode::OK);
    assert_eq!(b.0, StatusCode::CONFLICT);
    assert_eq!(b.1["error"], "training_in_progress");
}

#[tokio::test]
async fn synthesize_is_valid_and_seed_deterministic() {
    let f = fixture();
    let app = loaded_app();
    let room = serde_json::to_value(&f.rooms[0]).unwrap();
    let req = json!({ "room": room, "config": { "seed": 42 } });
    let (s1, b1) = call_raw(&app, "/synthesize", req.clone()).await;
    let (s2, b2) = call_raw(&app, "/synthesize", req).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(b1, b2);
    let v: Value = serde_json::from_slice(&b1).unwrap();
    let scene = scene_of(&v);
    assert!(validate_scene(&scene, &f.bundle.vocabulary).is_empty());
    assert_eq!(v["trace"]["seed"], 42);

    // without a seed the server draws one and reports it
    let (s, v) = call(&app, "POST", "/synthesize", Some(json!({ "room": room }))).await;
    assert_eq!(s, StatusCode::OK);
    let seed = v["trace"]["seed"].as_u64().unwrap();
    let (_, again) = call(&app, "POST", "/synthesize", Some(json!({ "room": room, "config": { "seed": seed } }))).await;
    assert_eq!(again["scene"], v["scene"]);
}

#[tokio::test]
async fn schema_errors_name_the_field() {
    let app = loaded_app();
    let (s, body) = call(&app, "POST", "/synthesize", Some(json!({ "room": { "walls": [], "room_type": "bedroom" } }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "schema");
    assert!(body["message"].as_str().unwrap().contains("floor_polygon"), "{body}");

    let room = serde_json::to_value(Room::rectangle(4.0, 4.0, "bedroom")).unwrap();
    let (s, body) = call(&app, "POST", "/synthesize", Some(json!({ "room": room, "config": { "tau": "hot" } }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["message"].as_str().unwrap().contains("tau"), "{body}");

    let (s, _) = call(&app, "POST", "/synthesize", Some(json!({ "room": room, "config": { "tau": -1.0 } }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);

    let req = Request::builder().method("POST").uri("/synthesize").body(Body::from("{not json")).unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn completion_preserves_input_objects() {
    let f = fixture();
    let app = loaded_app();
    let corpus = generate_synthetic_corpus(&GeneratorParams::default(), 5, 99);
    for (i, s) in corpus.scenes.iter().enumerate() {
        let partial = s.subset(&(0..s.objects.len() / 2).collect::<Vec<_>>());
        let req = json!({ "scene": partial, "config": { "seed": i } });
        let (status, v) = call(&app, "POST", "/complete", Some(req)).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        let done = scene_of(&v);
        assert_eq!(done.room, partial.room);
        for (a, b) in partial.objects.iter().zip(&done.objects) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.category_id, b.category_id);
            assert_eq!(a.position, b.position);
            assert_eq!(a.theta, b.theta);
            assert_eq!(a.dims, b.dims);
            assert_eq!(a.height, b.height);
            assert_eq!(a.base_height, b.base_height);
            assert_eq!(a.model_id, b.model_id);
            assert_eq!(a.parent_id, b.parent_id);
        }
        assert!(validate_scene(&done, &f.bundle.vocabulary).is_empty());
    }

    // saturated: the cap is already reached
    let full = &corpus.scenes[0];
    let req = json!({ "scene": full, "config": { "seed": 1, "max_objects": full.objects.len() } });
    let (status, v) = call(&app, "POST", "/complete", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&scene_of(&v), full);

    // two objects sharing an id
    let mut bad = full.clone();
    bad.objects.push(bad.objects[0].clone());
    let (status, v) = call(&app, "POST", "/complete", Some(json!({ "scene": bad }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "invalid_scene");
}

#[tokio::test]
async fn suggestions_match_direct_module_calls() {
    let f = fixture();
    let app = loaded_app();
    let scene = Scene::empty(f.rooms[1].clone());
    let (s, v) = call(&app, "POST", "/suggest", Some(json!({ "scene": scene, "top_k": 2 }))).await;
    assert_eq!(s, StatusCode::OK);
    let direct = suggest(&scene, &f.bundle, 2).unwrap();
    let dist: Vec<f64> = serde_json::from_value(v["category_distribution"].clone()).unwrap();
    assert_eq!(dist, direct.category_distribution);
    assert_eq!(dist.len(), f.bundle.vocabulary.len() + 1);
    assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let maps: Vec<plansynth_core::Heatmap> = serde_json::from_value(v["heatmaps"].clone()).unwrap();
    assert_eq!(maps.len() + direct.unplaceable.len(), 2);
    assert_eq!(maps, direct.heatmaps);
    for h in &maps {
        assert!((h.total() - 1.0).abs() <= 1e-9);
    }

    let (s, v) = call(&app, "POST", "/suggest", Some(json!({ "scene": scene, "top_k": 0 }))).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["heatmaps"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn placement_proposals() {
    let f = fixture();
    let app = loaded_app();
    let scene = Scene::empty(f.rooms[2].clone());
    let bed = plansynth_core::corpus::BED;

    let req = json!({ "scene": scene, "category_id": bed, "location": [-50.0, -50.0] });
    let (s, v) = call(&app, "POST", "/place", Some(req)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "no_valid_location");

    let req = json!({ "scene": scene, "category_id": bed, "config": { "seed": 5 } });
    let (s, v) = call(&app, "POST", "/place", Some(req)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let cfg = SynthesisConfig {
        seed: 5,
        ..Default::default()
    };
    let direct = place_object(&scene, bed, None, &f.catalog, &f.bundle, &cfg).unwrap();
    let object: Option<plansynth_core::SceneObject> = serde_json::from_value(v["object"].clone()).unwrap();
    assert_eq!(object, direct.object);
    let object = object.expect("an empty room accepts a bed");
    assert!(!collision_check(&scene, &object, cfg.collision_tolerance));
    assert_eq!(v["seed"], 5);

    let (s, _) = call(&app, "POST", "/place", Some(json!({ "scene": scene, "category_id": 999 }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}
