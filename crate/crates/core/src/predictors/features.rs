use crate::geometry::convex_intersection_area;
use crate::raster::{distance_transform, FloorPlanImage, CATEGORY_BASE, FLOOR, OCCUPANCY, OPENING, WALL};
use crate::scene::{CategoryVocabulary, Scene};

/// Number of anchor categories whose distances enter the pixel features.
pub const NUM_ANCHORS: usize = 8;
/// Length of a raw pixel feature vector.
pub const PIXEL_FEATURES: usize = 4 + NUM_ANCHORS;

/// Floor area covered by floor-standing objects, counting pairwise
/// overlaps once.
pub fn occupied_area(scene: &Scene) -> f64 {
    let polys: Vec<_> = scene
        .objects
        .iter()
        .filter(|o| o.is_floor_supported())
        .map(|o| o.footprint_polygon())
        .collect();
    let mut area: f64 = polys.iter().map(|p| crate::geometry::polygon_area(p)).sum();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            area -= convex_intersection_area(&polys[i], &polys[j]);
        }
    }
    area.max(0.0)
}

/// Bag-of-categories summary: per-category counts, floor area (m²),
/// occupied-area fraction, then a one-hot over `room_types`.
pub fn category_features(scene: &Scene, vocab: &CategoryVocabulary, room_types: &[String]) -> Vec<f64> {
    let mut f: Vec<f64> = scene.category_counts(vocab.len()).into_iter().map(|c| c as f64).collect();
    let area = scene.room.area();
    f.push(area);
    f.push(if area > 0.0 { occupied_area(scene) / area } else { 0.0 });
    f.extend(room_types.iter().map(|t| (t == scene.room_type()) as u8 as f64));
    f
}

/// Distance maps of one image, computed once and queried per pixel.
pub struct PixelFeatureMaps {
    resolution: usize,
    wall: Vec<f64>,
    opening: Vec<f64>,
    occupancy_window: Vec<f64>,
    anchors: Vec<Vec<f64>>,
    inside: Vec<bool>,
}

fn distances_m(img: &FloorPlanImage, channel: usize, cap: f64) -> Vec<f64> {
    let mpp = img.meters_per_pixel();
    distance_transform(&img.mask(channel), img.resolution())
        .into_iter()
        .map(|d| (d * mpp).min(cap))
        .collect()
}

impl PixelFeatureMaps {
    /// `anchors` lists up to [`NUM_ANCHORS`] category ids; missing slots
    /// report the cap distance.
    pub fn new(img: &FloorPlanImage, anchors: &[usize]) -> Self {
        let r = img.resolution();
        let cap = r as f64 * img.meters_per_pixel();
        // summed-area table for 5×5 occupancy windows
        let occ = img.channel(OCCUPANCY);
        let mut sat = vec![0.0f64; (r + 1) * (r + 1)];
        for row in 0..r {
            for col in 0..r {
                let v = (occ[row * r + col] != 0.0) as u8 as f64;
                sat[(row + 1) * (r + 1) + col + 1] =
                    v + sat[row * (r + 1) + col + 1] + sat[(row + 1) * (r + 1) + col] - sat[row * (r + 1) + col];
            }
        }
        let mut occupancy_window = vec![0.0; r * r];
        for row in 0..r {
            for col in 0..r {
                let (r0, r1) = (row.saturating_sub(2), (row + 3).min(r));
                let (c0, c1) = (col.saturating_sub(2), (col + 3).min(r));
                let s = sat[r1 * (r + 1) + c1] - sat[r0 * (r + 1) + c1] - sat[r1 * (r + 1) + c0] + sat[r0 * (r + 1) + c0];
                occupancy_window[row * r + col] = s / 25.0;
            }
        }
        let anchors = (0..NUM_ANCHORS)
            .map(|k| match anchors.get(k) {
                Some(&c) if c < img.num_categories() => distances_m(img, CATEGORY_BASE + c, cap),
                _ => vec![cap; r * r],
            })
            .collect();
        Self {
            resolution: r,
            wall: distances_m(img, WALL, cap),
            opening: distances_m(img, OPENING, cap),
            occupancy_window,
            anchors,
            inside: img.mask(FLOOR),
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `[wall distance, opening distance, 5×5 occupancy fraction,
    /// anchor distances…, inside flag]`, distances in meters.
    pub fn at(&self, index: usize) -> [f64; PIXEL_FEATURES] {
        let mut f = [0.0; PIXEL_FEATURES];
        f[0] = self.wall[index];
        f[1] = self.opening[index];
        f[2] = self.occupancy_window[index];
        for (k, a) in self.anchors.iter().enumerate() {
            f[3 + k] = a[index];
        }
        f[3 + NUM_ANCHORS] = self.inside[index] as u8 as f64;
        f
    }

    pub fn is_inside(&self, index: usize) -> bool {
        self.inside[index]
    }
}

/// Raw features of one pixel.
pub fn pixel_features(img: &FloorPlanImage, anchors: &[usize], col: usize, row: usize) -> [f64; PIXEL_FEATURES] {
    PixelFeatureMaps::new(img, anchors).at(row * img.resolution() + col)
}
