//! The insertion loop: category, location, orientation, dimensions, model
//! retrieval and validity checks, repeated until STOP.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::catalog::ModelCatalog;
use super::checks::{collision_check, overhang_check, resolve_contacts};
use super::config::{Attempt, StepOutcome, SynthesisConfig, SynthesisTrace, TraceStep};
use crate::error::{Error, Result};
use crate::geometry::{add, norm, sub, Point};
use crate::predictors::dims::DimsSample;
use crate::predictors::sampling::{sample_index, temper_sample};
use crate::predictors::{OrientationSample, PredictorBundle};
use crate::raster::{recenter, render, rotate, FloorPlanImage, Heatmap, RasterConfig};
use crate::rng::{seeded, SeededRng};
use crate::scene::{validate_scene, CategoryVocabulary, ParentId, Scene, SceneObject, Tier};

/// The four decisions the insertion loop asks for. [`PredictorBundle`]
/// implements it with trained models; tests substitute rigged versions.
pub trait DecisionModules: Sync {
    fn vocabulary(&self) -> &CategoryVocabulary;
    fn raster_config(&self) -> RasterConfig;
    /// Categories whose objects may carry `category_id`.
    fn supporters(&self, category_id: usize) -> Vec<usize>;
    fn max_objects(&self, room_type: &str) -> usize;
    /// Distribution over the `C` categories and STOP (index `C`).
    fn category_distribution(&self, scene: &Scene) -> Result<Vec<f64>>;
    fn heatmap(&self, img: &FloorPlanImage, category_id: usize) -> Result<Heatmap>;
    fn orientation(&self, local: &FloorPlanImage, category_id: usize, rng: &mut SeededRng) -> Result<OrientationSample>;
    fn dimensions(&self, local_rotated: &FloorPlanImage, category_id: usize, rng: &mut SeededRng) -> Result<DimsSample>;
}

impl DecisionModules for PredictorBundle {
    fn vocabulary(&self) -> &CategoryVocabulary {
        &self.vocabulary
    }

    fn raster_config(&self) -> RasterConfig {
        self.raster
    }

    fn supporters(&self, category_id: usize) -> Vec<usize> {
        self.stats
            .supporter_sets
            .get(category_id)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    fn max_objects(&self, room_type: &str) -> usize {
        PredictorBundle::max_objects(self, room_type)
    }

    fn category_distribution(&self, scene: &Scene) -> Result<Vec<f64>> {
        self.category.predict(scene, &self.vocabulary)
    }

    fn heatmap(&self, img: &FloorPlanImage, category_id: usize) -> Result<Heatmap> {
        self.location.predict_heatmap(img, category_id, &self.vocabulary, &self.stats)
    }

    fn orientation(&self, local: &FloorPlanImage, category_id: usize, rng: &mut SeededRng) -> Result<OrientationSample> {
        self.orientation.predict(local, category_id, rng)
    }

    fn dimensions(&self, local_rotated: &FloorPlanImage, category_id: usize, rng: &mut SeededRng) -> Result<DimsSample> {
        self.dims.predict(local_rotated, category_id, &self.vocabulary, rng)
    }
}

/// Result of one insertion step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub object: Option<SceneObject>,
    pub step: TraceStep,
}

/// The object a category attempt produced, or why it failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub object: Option<SceneObject>,
    pub attempt: Attempt,
}

fn is_soft_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NoValidLocation { .. } | Error::NoCatalogEntry(_) | Error::Untrained | Error::PlacementRejected(_)
    )
}

/// Floor object whose footprint contains `p` and whose category may carry
/// `category_id`; the earliest in the scene wins.
fn find_parent<'a>(scene: &'a Scene, p: Point, supporters: &[usize]) -> Option<&'a SceneObject> {
    scene
        .objects
        .iter()
        .filter(|o| o.is_floor_supported() && supporters.contains(&o.category_id))
        .find(|o| o.bounding_box().contains(p))
}

/// Position closest to the candidate's own, on the way to the parent's
/// center and at most `max_shift` from it, where the overhang check passes.
fn settle_on_parent(candidate: &SceneObject, parent: &SceneObject, min_fraction: f64, max_shift: f64) -> Option<Point> {
    if overhang_check(candidate, parent, min_fraction) {
        return Some(candidate.position);
    }
    let to_center = sub(parent.position, candidate.position);
    let reach = norm(to_center).min(max_shift);
    if reach <= 0.0 {
        return None;
    }
    let dir = [to_center[0] / norm(to_center), to_center[1] / norm(to_center)];
    let at = |d: f64| add(candidate.position, [dir[0] * d, dir[1] * d]);
    let passes = |d: f64| {
        let mut moved = candidate.clone();
        moved.position = at(d);
        overhang_check(&moved, parent, min_fraction)
    };
    if !passes(reach) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, reach);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(at(hi))
}

/// Runs the tail of an insertion for a fixed category: location (sampled,
/// or `forced`), orientation, dimensions, retrieval and checks. `img` must
/// be the render of `scene`.
#[allow(clippy::too_many_arguments)]
pub fn place_category(
    scene: &Scene,
    img: &FloorPlanImage,
    category_id: usize,
    forced: Option<Point>,
    catalog: &ModelCatalog,
    modules: &dyn DecisionModules,
    cfg: &SynthesisConfig,
    rng: &mut SeededRng,
) -> Result<Placement> {
    let mut attempt = Attempt {
        category_id,
        pixel: None,
        pixel_probability: None,
        location: None,
        theta: None,
        snapped: None,
        dims: None,
        dims_draws: None,
        models_tried: 0,
        failure: None,
    };
    match place_inner(scene, img, category_id, forced, catalog, modules, cfg, rng, &mut attempt) {
        Ok(object) => Ok(Placement {
            object: Some(object),
            attempt,
        }),
        Err(e) if is_soft_failure(&e) => {
            attempt.failure = Some(e.to_string());
            Ok(Placement { object: None, attempt })
        }
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn place_inner(
    scene: &Scene,
    img: &FloorPlanImage,
    category_id: usize,
    forced: Option<Point>,
    catalog: &ModelCatalog,
    modules: &dyn DecisionModules,
    cfg: &SynthesisConfig,
    rng: &mut SeededRng,
    attempt: &mut Attempt,
) -> Result<SceneObject> {
    let vocab = modules.vocabulary();
    let heat = modules.heatmap(img, category_id)?;
    let (pixel, p) = match forced {
        None => temper_sample(&heat, cfg.tau, rng)?,
        Some(p) => {
            let idx = img
                .frame
                .pixel_of(p)
                .map(|(c, r)| img.frame.index(c, r))
                .filter(|&i| heat.valid[i])
                .ok_or(Error::NoValidLocation { category: category_id })?;
            (idx, p)
        }
    };
    attempt.pixel = Some(pixel);
    attempt.pixel_probability = Some(heat.values[pixel]);
    attempt.location = Some(p);

    let local = recenter(img, p);
    let o = modules.orientation(&local, category_id, rng)?;
    attempt.theta = Some(o.theta);
    attempt.snapped = Some(o.snapped);
    let d = modules.dimensions(&rotate(&local, o.theta), category_id, rng)?;
    attempt.dims = Some(d.dims);
    attempt.dims_draws = Some(d.draws);

    let parent = match vocab.tier(category_id) {
        Some(Tier::Second) => Some(
            find_parent(scene, p, &modules.supporters(category_id))
                .ok_or_else(|| Error::PlacementRejected("no supporting surface under the location".into()))?,
        ),
        Some(Tier::First) => None,
        None => return Err(Error::InvalidArgument(format!("no category {category_id}"))),
    };
    if !scene.room.contains(p) {
        return Err(Error::NoValidLocation { category: category_id });
    }
    let ranked = catalog.ranked(category_id, d.dims, scene)?;
    // the heatmap only resolves position to a pixel
    let max_shift = cfg.contact_slack_pixels * img.meters_per_pixel();
    for model in ranked.into_iter().take(cfg.model_candidates) {
        attempt.models_tried += 1;
        let candidate = SceneObject {
            id: scene.next_object_id(),
            category_id,
            position: p,
            base_height: parent.map_or(0.0, |q| q.top_height()),
            theta: o.theta,
            dims: [model.dims[0], model.dims[1]],
            height: model.dims[2],
            model_id: model.model_id.clone(),
            parent_id: parent.map_or(ParentId::Floor, |q| ParentId::Object(q.id)),
        };
        let mut candidate = candidate;
        if let Some(q) = parent {
            match settle_on_parent(&candidate, q, cfg.overhang_fraction, max_shift) {
                Some(pos) => candidate.position = pos,
                None => continue,
            }
        }
        if collision_check(scene, &candidate, cfg.collision_tolerance) {
            match resolve_contacts(scene, &candidate, cfg.collision_tolerance, max_shift) {
                Some(shift) => candidate.position = add(candidate.position, shift),
                None => continue,
            }
        }
        if let Some(q) = parent {
            if !overhang_check(&candidate, q, cfg.overhang_fraction) {
                continue;
            }
        }
        return Ok(candidate);
    }
    Err(Error::PlacementRejected(format!(
        "all {} model candidates collide or overhang",
        attempt.models_tried
    )))
}

/// One insertion: sample a category (STOP ends the loop), then try to place
/// it; after a failure, a different category is drawn, up to
/// `category_resamples` times.
pub fn insert_step(
    scene: &Scene,
    catalog: &ModelCatalog,
    modules: &dyn DecisionModules,
    cfg: &SynthesisConfig,
    rng: &mut SeededRng,
) -> Result<StepResult> {
    let vocab = modules.vocabulary();
    let stop = vocab.stop_id();
    let dist = modules.category_distribution(scene)?;
    let mut weights = dist.clone();
    let mut img: Option<FloorPlanImage> = None;
    let mut attempts = Vec::new();
    let mut outcome = StepOutcome::Failed;
    let mut object = None;
    for _ in 0..=cfg.category_resamples {
        if !(weights.iter().sum::<f64>() > 0.0) {
            break;
        }
        let k = sample_index(&weights, rng);
        if k == stop {
            outcome = StepOutcome::Stop;
            break;
        }
        weights[k] = 0.0;
        if img.is_none() {
            img = Some(render(scene, vocab.len(), &modules.raster_config())?);
        }
        let image = img.as_ref().expect("rendered above");
        let placement = place_category(scene, image, k, None, catalog, modules, cfg, rng)?;
        attempts.push(placement.attempt);
        if let Some(o) = placement.object {
            object = Some(o);
            outcome = StepOutcome::Inserted;
            break;
        }
    }
    let step = TraceStep {
        category_distribution: dist,
        attempts,
        outcome,
        object_id: object.as_ref().map(|o| o.id),
        model_id: object.as_ref().map(|o| o.model_id.clone()),
        elapsed_secs: None,
    };
    Ok(StepResult { object, step })
}

/// Grows `scene` by repeated insertion. The input objects are kept as an
/// exact prefix of the result.
pub fn complete(
    scene: &Scene,
    catalog: &ModelCatalog,
    modules: &dyn DecisionModules,
    cfg: &SynthesisConfig,
) -> Result<(Scene, SynthesisTrace)> {
    cfg.check()?;
    let violations = validate_scene(scene, modules.vocabulary());
    if let Some(v) = violations.first() {
        return Err(Error::InvalidScene(format!(
            "{} violation(s), first: {v}",
            violations.len()
        )));
    }
    let max_objects = cfg.max_objects.unwrap_or_else(|| modules.max_objects(scene.room_type()));
    let mut rng = seeded(cfg.seed);
    let mut out = scene.clone();
    let mut trace = SynthesisTrace {
        seed: cfg.seed,
        max_objects,
        steps: Vec::new(),
    };
    loop {
        if out.objects.len() >= max_objects {
            trace.steps.push(TraceStep {
                category_distribution: Vec::new(),
                attempts: Vec::new(),
                outcome: StepOutcome::Cap,
                object_id: None,
                model_id: None,
                elapsed_secs: None,
            });
            break;
        }
        let start = Instant::now();
        let StepResult { object, mut step } = insert_step(&out, catalog, modules, cfg, &mut rng)?;
        if cfg.record_timing {
            step.elapsed_secs = Some(start.elapsed().as_secs_f64());
        }
        let done = step.outcome != StepOutcome::Inserted;
        trace.steps.push(step);
        if let Some(o) = object {
            out.objects.push(o);
        }
        if done {
            break;
        }
    }
    Ok((out, trace))
}

/// Synthesizes a scene for an empty room.
pub fn synthesize(
    room: &crate::scene::Room,
    catalog: &ModelCatalog,
    modules: &dyn DecisionModules,
    cfg: &SynthesisConfig,
) -> Result<(Scene, SynthesisTrace)> {
    complete(&Scene::empty(room.clone()), catalog, modules, cfg)
}

/// Next-object suggestion: the category distribution and the heatmaps of
/// the `top_k` most likely categories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub category_distribution: Vec<f64>,
    pub heatmaps: Vec<Heatmap>,
    /// Categories in `heatmaps` order whose heatmap had no valid pixel.
    pub unplaceable: Vec<usize>,
}

pub fn suggest(scene: &Scene, modules: &dyn DecisionModules, top_k: usize) -> Result<Suggestion> {
    let vocab = modules.vocabulary();
    let dist = modules.category_distribution(scene)?;
    let mut order: Vec<usize> = (0..vocab.len()).collect();
    order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    let mut heatmaps = Vec::new();
    let mut unplaceable = Vec::new();
    if top_k > 0 {
        let img = render(scene, vocab.len(), &modules.raster_config())?;
        for &k in order.iter().take(top_k) {
            match modules.heatmap(&img, k) {
                Ok(h) => heatmaps.push(h),
                Err(Error::NoValidLocation { .. }) => unplaceable.push(k),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Suggestion {
        category_distribution: dist,
        heatmaps,
        unplaceable,
    })
}

/// Proposes an object of a chosen category, optionally at a chosen
/// location, without modifying `scene`.
pub fn place_object(
    scene: &Scene,
    category_id: usize,
    location: Option<Point>,
    catalog: &ModelCatalog,
    modules: &dyn DecisionModules,
    cfg: &SynthesisConfig,
) -> Result<Placement> {
    let vocab = modules.vocabulary();
    if category_id >= vocab.len() {
        return Err(Error::InvalidArgument(format!("no category {category_id}")));
    }
    let img = render(scene, vocab.len(), &modules.raster_config())?;
    if let Some(p) = location {
        // a location that cannot hold the category is an input error
        let heat = modules.heatmap(&img, category_id)?;
        let ok = img
            .frame
            .pixel_of(p)
            .is_some_and(|(c, r)| heat.valid[img.frame.index(c, r)]);
        if !ok {
            return Err(Error::NoValidLocation { category: category_id });
        }
    }
    let mut rng = seeded(cfg.seed);
    place_category(scene, &img, category_id, location, catalog, modules, cfg, &mut rng)
}
