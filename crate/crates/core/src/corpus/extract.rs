//! Training-example extraction from complete scenes.

use rand::Rng;

use crate::error::Result;
use crate::geometry::Point;
use crate::predictors::category::CategoryExample;
use crate::predictors::features::category_features;
use crate::predictors::location::LocationExample;
use crate::predictors::orientation::is_snapped;
use crate::raster::{recenter, render, rotate, FloorPlanImage, RasterConfig, FLOOR};
use crate::scene::{canonical_order, randomized_order, CategoryVocabulary, ParentId, Scene};

/// Loss weight of empty in-room pixels in location examples.
pub const EMPTY_PIXEL_WEIGHT: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct OrientationExample {
    /// Prefix scene recentered on the target's position.
    pub image: FloorPlanImage,
    pub category_id: usize,
    pub theta: f64,
    pub snap_label: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimsExample {
    /// Prefix scene recentered on the target and rotated into its frame.
    pub image: FloorPlanImage,
    pub category_id: usize,
    pub dims: [f64; 2],
}

/// Category examples: keep a uniformly random prefix of the canonical
/// order; the label is the next object's category, or STOP when the whole
/// scene was kept.
pub fn extract_category_examples<R: Rng + ?Sized>(
    scene: &Scene,
    vocab: &CategoryVocabulary,
    room_types: &[String],
    rng: &mut R,
    k: usize,
) -> Result<Vec<CategoryExample>> {
    let order = canonical_order(scene, vocab)?;
    let n = order.len();
    Ok((0..k)
        .map(|_| {
            let keep = rng.random_range(0..=n);
            let prefix = scene.subset(&order[..keep]);
            let label = if keep == n {
                vocab.stop_id()
            } else {
                scene.objects[order[keep]].category_id
            };
            CategoryExample {
                features: category_features(&prefix, vocab, room_types),
                label,
            }
        })
        .collect())
}

/// Location examples over a randomized order. Every removed object whose
/// support (the floor, or a parent in the kept prefix) is present marks its
/// centroid pixel with its category; other in-room pixels are empty space.
pub fn extract_location_examples<R: Rng + ?Sized>(
    scene: &Scene,
    vocab: &CategoryVocabulary,
    cfg: &RasterConfig,
    rng: &mut R,
    k: usize,
) -> Result<Vec<LocationExample>> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let order = randomized_order(scene, rng)?;
        let keep = rng.random_range(0..=order.len());
        out.push(location_example(scene, vocab, cfg, &order, keep)?);
    }
    Ok(out)
}

/// Location example for the split of `order` after `keep` objects.
pub fn location_example(
    scene: &Scene,
    vocab: &CategoryVocabulary,
    cfg: &RasterConfig,
    order: &[usize],
    keep: usize,
) -> Result<LocationExample> {
    let prefix = scene.subset(&order[..keep]);
    let image = render(&prefix, vocab.len(), cfg)?;
    let n = image.frame.num_pixels();
    let floor = image.channel(FLOOR);
    let mut target = vec![vocab.empty_id(); n];
    let mut weight: Vec<f64> = floor
        .iter()
        .map(|&f| if f != 0.0 { EMPTY_PIXEL_WEIGHT } else { 0.0 })
        .collect();
    for &i in &order[keep..] {
        let obj = &scene.objects[i];
        let supported = match obj.parent_id {
            ParentId::Floor => true,
            ParentId::Object(pid) => prefix.object(pid).is_some(),
        };
        if !supported {
            continue;
        }
        let Some((col, row)) = image.frame.pixel_of(obj.position) else {
            continue;
        };
        let px = image.frame.index(col, row);
        if floor[px] == 0.0 || target[px] != vocab.empty_id() {
            continue;
        }
        target[px] = obj.category_id;
        weight[px] = 1.0;
    }
    Ok(LocationExample { image, target, weight })
}

/// Draws a random prefix/target split of a randomized order: returns the
/// prefix scene and the target object's index.
fn split<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> Result<Option<(Scene, usize)>> {
    if scene.objects.is_empty() {
        return Ok(None);
    }
    let order = randomized_order(scene, rng)?;
    let keep = rng.random_range(0..order.len());
    Ok(Some((scene.subset(&order[..keep]), order[keep])))
}

fn local_image(prefix: &Scene, vocab: &CategoryVocabulary, cfg: &RasterConfig, at: Point) -> Result<FloorPlanImage> {
    Ok(recenter(&render(prefix, vocab.len(), cfg)?, at))
}

pub fn extract_orientation_examples<R: Rng + ?Sized>(
    scene: &Scene,
    vocab: &CategoryVocabulary,
    cfg: &RasterConfig,
    rng: &mut R,
    k: usize,
) -> Result<Vec<OrientationExample>> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let Some((prefix, target)) = split(scene, rng)? else {
            break;
        };
        let obj = &scene.objects[target];
        out.push(OrientationExample {
            image: local_image(&prefix, vocab, cfg, obj.position)?,
            category_id: obj.category_id,
            theta: obj.theta,
            snap_label: is_snapped(obj.theta),
        });
    }
    Ok(out)
}

pub fn extract_dims_examples<R: Rng + ?Sized>(
    scene: &Scene,
    vocab: &CategoryVocabulary,
    cfg: &RasterConfig,
    rng: &mut R,
    k: usize,
) -> Result<Vec<DimsExample>> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let Some((prefix, target)) = split(scene, rng)? else {
            break;
        };
        let obj = &scene.objects[target];
        let image = rotate(&local_image(&prefix, vocab, cfg, obj.position)?, obj.theta);
        out.push(DimsExample {
            image,
            category_id: obj.category_id,
            dims: obj.dims,
        });
    }
    Ok(out)
}
