//! End-to-end training of a [`PredictorBundle`] from a corpus.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::{PredictorBundle, BUNDLE_VERSION};
use super::category::CategoryModel;
use super::dims::{DimensionsModel, DimsFit};
use super::linear::Dataset;
use super::location::{LocationModel, LocationTrainConfig, LOCATION_DIM};
use super::optim::LbfgsConfig;
use super::orientation::{EmConfig, OrientationFit, OrientationModel, OrientationObservation};
use crate::corpus::{
    corpus_stats, extract_category_examples, extract_location_examples, extract_orientation_examples, Corpus,
};
use crate::error::{Error, Result};
use crate::raster::RasterConfig;
use crate::rng::{derive_seed, seeded, stream};
use crate::scene::{randomized_order, Scene};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub raster: RasterConfig,
    /// Examples drawn per scene for each model.
    pub category_examples: usize,
    pub location_examples: usize,
    pub orientation_examples: usize,
    pub dims_examples: usize,
    pub category_l2: f64,
    pub category_max_iter: usize,
    pub location: LocationTrainConfig,
    pub orientation_components: usize,
    pub dims_components: usize,
    pub em: EmConfig,
    pub rejection_limit: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            raster: RasterConfig::default(),
            category_examples: 30,
            location_examples: 4,
            orientation_examples: 10,
            dims_examples: 10,
            category_l2: 1e-4,
            category_max_iter: 300,
            location: LocationTrainConfig::default(),
            orientation_components: 4,
            dims_components: 3,
            em: EmConfig::default(),
            rejection_limit: 20,
        }
    }
}

/// Optimizer and EM traces from a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub category_history: Vec<f64>,
    pub location_history: Vec<f64>,
    pub orientation_fits: Vec<OrientationFit>,
    pub dims_fits: Vec<DimsFit>,
    pub category_rows: usize,
    pub location_rows: usize,
}

// independent example streams per model
const CATEGORY_STREAM: u64 = 1;
const LOCATION_STREAM: u64 = 2;
const ORIENTATION_STREAM: u64 = 3;
const DIMS_STREAM: u64 = 4;
const DIMS_FIT_STREAM: u64 = 5;

struct SceneExamples {
    category: Dataset,
    location: Dataset,
    orientation: Vec<OrientationObservation>,
    dims: Vec<(usize, [f64; 2])>,
}

/// `(category, [w, d])` of randomly drawn target objects; the same draw
/// as the dims example extractor without rendering images that the
/// unconditional size model would ignore.
fn dims_labels<R: Rng + ?Sized>(scene: &Scene, rng: &mut R, k: usize) -> Result<Vec<(usize, [f64; 2])>> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        if scene.objects.is_empty() {
            break;
        }
        let order = randomized_order(scene, rng)?;
        let keep = rng.random_range(0..order.len());
        let o = &scene.objects[order[keep]];
        out.push((o.category_id, o.dims));
    }
    Ok(out)
}

/// Trains all four models. Per-scene example extraction runs in parallel
/// with one derived generator per (model, scene); results are merged in
/// scene order, so the bundle depends only on the corpus and the seed.
pub fn train_bundle(corpus: &Corpus, cfg: &TrainConfig) -> Result<(PredictorBundle, TrainReport)> {
    if corpus.scenes.is_empty() {
        return Err(Error::EmptyInput("training corpus"));
    }
    let stats = corpus_stats(&corpus.scenes, &corpus.vocabulary);
    let vocab = stats.annotate(&corpus.vocabulary);
    let room_types: Vec<String> = corpus
        .scenes
        .iter()
        .map(|s| s.room_type().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let c = vocab.len();

    let mut category = CategoryModel::untrained(c, room_types.clone());
    let mut location = LocationModel::untrained(&vocab, cfg.location.l2);
    let seed = cfg.seed;

    let per_scene: Vec<Result<SceneExamples>> = corpus
        .scenes
        .par_iter()
        .enumerate()
        .map(|(i, scene)| {
            let i = i as u64;
            let mut rng = stream(derive_seed(seed, CATEGORY_STREAM), i);
            let cat = extract_category_examples(scene, &vocab, &room_types, &mut rng, cfg.category_examples)?;

            let mut rng = stream(derive_seed(seed, LOCATION_STREAM), i);
            let mut loc = Dataset::new(LOCATION_DIM);
            for ex in extract_location_examples(scene, &vocab, &cfg.raster, &mut rng, cfg.location_examples)? {
                location.observations(&ex, cfg.location.empty_keep, &mut rng, &mut loc);
            }

            let mut rng = stream(derive_seed(seed, ORIENTATION_STREAM), i);
            let orientation = extract_orientation_examples(scene, &vocab, &cfg.raster, &mut rng, cfg.orientation_examples)?
                .into_iter()
                .map(|ex| OrientationObservation::from_image(&ex.image, ex.category_id, ex.theta))
                .collect();

            let mut rng = stream(derive_seed(seed, DIMS_STREAM), i);
            let dims = dims_labels(scene, &mut rng, cfg.dims_examples)?;
            Ok(SceneExamples {
                category: category.dataset(&cat),
                location: loc,
                orientation,
                dims,
            })
        })
        .collect();

    let mut cat_data = Dataset::new(category.regression.dim);
    let mut loc_data = Dataset::new(LOCATION_DIM);
    let mut orient = Vec::new();
    let mut dims = Vec::new();
    for ex in per_scene {
        let ex = ex?;
        cat_data.append(ex.category);
        loc_data.append(ex.location);
        orient.extend(ex.orientation);
        dims.extend(ex.dims);
    }

    let lbfgs = LbfgsConfig {
        max_iter: cfg.category_max_iter,
        ..Default::default()
    };
    let category_history = category.train(&cat_data, cfg.category_l2, &lbfgs)?;
    let location_history = location.train(&loc_data, cfg.location.max_iter)?;
    let (orientation, orientation_fits) = OrientationModel::train(&orient, c, cfg.orientation_components, &cfg.em)?;
    let (dims_model, dims_fits) = DimensionsModel::train(
        &dims,
        c,
        cfg.dims_components,
        cfg.rejection_limit,
        &cfg.em,
        &mut seeded(derive_seed(seed, DIMS_FIT_STREAM)),
    )?;

    let report = TrainReport {
        category_history,
        location_history,
        orientation_fits,
        dims_fits,
        category_rows: cat_data.len(),
        location_rows: loc_data.len(),
    };
    let bundle = PredictorBundle {
        version: BUNDLE_VERSION.to_string(),
        vocabulary: vocab,
        stats,
        room_types,
        raster: cfg.raster,
        train_config: cfg.clone(),
        category,
        location,
        orientation,
        dims: dims_model,
    };
    Ok((bundle, report))
}
