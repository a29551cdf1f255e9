//! Rule-based bedroom generator used as a training corpus.
//!
//! Rooms are axis-aligned rectangles with one door and one window. Objects
//! are placed against walls facing into the room: a bed (head to the wall,
//! clear of the door), optional nightstands at the bed-head corners, a
//! wardrobe, a dresser, a desk with a chair facing it, and table lamps on
//! nightstands and desks.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::io::Corpus;
use crate::geometry::{self, normalize_angle, sat_penetration, OrientedBox, Point};
use crate::rng::{derive_seed, seeded, SeededRng};
use crate::scene::{CategoryVocabulary, Opening, OpeningKind, ParentId, Room, Scene, SceneObject};

pub const BED: usize = 0;
pub const NIGHTSTAND: usize = 1;
pub const WARDROBE: usize = 2;
pub const DESK: usize = 3;
pub const OFFICE_CHAIR: usize = 4;
pub const DRESSER: usize = 5;
pub const TABLE_LAMP: usize = 6;

pub const CATEGORY_NAMES: [&str; 7] = [
    "double_bed",
    "nightstand",
    "wardrobe",
    "desk",
    "office_chair",
    "dresser",
    "table_lamp",
];

pub fn bedroom_vocabulary() -> CategoryVocabulary {
    CategoryVocabulary::new(&CATEGORY_NAMES, &["table_lamp"])
}

/// `(w range, d range, h range)` per category; `w` runs along the facing axis.
const SIZE_RANGES: [[(f64, f64); 3]; 7] = [
    [(1.95, 2.2), (1.4, 1.8), (0.45, 0.6)],
    [(0.4, 0.5), (0.4, 0.55), (0.5, 0.6)],
    [(0.55, 0.65), (1.0, 1.8), (1.9, 2.2)],
    [(0.6, 0.75), (1.0, 1.4), (0.72, 0.78)],
    [(0.5, 0.6), (0.5, 0.6), (0.85, 1.0)],
    [(0.45, 0.55), (0.9, 1.4), (0.75, 0.9)],
    [(0.2, 0.32), (0.2, 0.32), (0.4, 0.6)],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub room_width: (f64, f64),
    pub room_depth: (f64, f64),
    pub door_width: f64,
    pub window_width: f64,
    /// Depth of the keep-clear zone in front of the door.
    pub door_clearance: f64,
    pub p_nightstand: f64,
    pub p_wardrobe: f64,
    pub p_desk: f64,
    pub p_chair: f64,
    pub p_dresser: f64,
    pub p_lamp: f64,
    pub p_desk_lamp: f64,
    /// Gap range between an object and the wall behind it.
    pub wall_gap: (f64, f64),
    pub models_per_category: usize,
    /// Seed of the model pool, independent of the scene seed.
    pub catalog_seed: u64,
    /// Probability that an object carries a per-axis scale factor.
    pub p_scaled: f64,
    /// Largest deviation of such a scale factor from 1.
    pub max_scale: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            room_width: (3.0, 5.0),
            room_depth: (3.0, 5.0),
            door_width: 0.9,
            window_width: 1.2,
            door_clearance: 0.9,
            p_nightstand: 0.9,
            p_wardrobe: 0.7,
            p_desk: 0.5,
            p_chair: 0.8,
            p_dresser: 0.3,
            p_lamp: 0.8,
            p_desk_lamp: 0.4,
            wall_gap: (0.0, 0.03),
            models_per_category: 8,
            catalog_seed: 0x5eed,
            p_scaled: 0.0,
            max_scale: 0.0,
        }
    }
}

/// A model in the generator's pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub category_id: usize,
    /// `(w, d, h)` in meters.
    pub dims: [f64; 3],
}

/// Deterministic model pool for the given parameters.
pub fn model_pool(params: &GeneratorParams) -> Vec<ModelSpec> {
    let mut rng = seeded(params.catalog_seed);
    let mut out = Vec::new();
    for (cat, ranges) in SIZE_RANGES.iter().enumerate() {
        for k in 0..params.models_per_category.max(1) {
            let dims = ranges.map(|(lo, hi)| round_cm(rng.random_range(lo..=hi)));
            out.push(ModelSpec {
                model_id: format!("{}-{:03}", CATEGORY_NAMES[cat], k),
                category_id: cat,
                dims,
            });
        }
    }
    out
}

fn round_cm(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

struct Builder<'a> {
    params: &'a GeneratorParams,
    pool: &'a [ModelSpec],
    rng: SeededRng,
    width: f64,
    depth: f64,
    room: Room,
    objects: Vec<SceneObject>,
    keep_clear: Vec<[Point; 4]>,
}

/// Inward normal angle of each wall of a rectangle room at the origin
/// (bottom, right, top, left).
const INWARD: [f64; 4] = [FRAC_PI_2, PI, 3.0 * FRAC_PI_2, 0.0];

impl<'a> Builder<'a> {
    fn wall_len(&self, wall: usize) -> f64 {
        if wall.is_multiple_of(2) {
            self.width
        } else {
            self.depth
        }
    }

    fn pick_model(&mut self, category: usize) -> ModelSpec {
        let choices: Vec<&ModelSpec> = self.pool.iter().filter(|m| m.category_id == category).collect();
        choices[self.rng.random_range(0..choices.len())].clone()
    }

    /// Object of `model` with its back against `wall`, centered `t` meters
    /// along the wall, facing into the room.
    fn against_wall(&mut self, model: &ModelSpec, wall: usize, t: f64) -> SceneObject {
        let w = &self.room.walls[wall];
        let along = w.point_at(t);
        let theta = normalize_angle(INWARD[wall]);
        let gap = self.rng.random_range(self.params.wall_gap.0..=self.params.wall_gap.1);
        let offset = model.dims[0] / 2.0 + gap;
        let position = [along[0] + offset * theta.cos(), along[1] + offset * theta.sin()];
        self.object(model, position, theta, ParentId::Floor, 0.0)
    }

    fn object(&mut self, model: &ModelSpec, position: Point, theta: f64, parent: ParentId, base: f64) -> SceneObject {
        let mut dims = [model.dims[0], model.dims[1]];
        let mut height = model.dims[2];
        if self.params.p_scaled > 0.0 && self.rng.random_bool(self.params.p_scaled) {
            let m = self.params.max_scale;
            for v in dims.iter_mut().chain(std::iter::once(&mut height)) {
                *v *= 1.0 + self.rng.random_range(-m..=m);
            }
        }
        SceneObject {
            id: self.objects.len() as u32,
            category_id: model.category_id,
            position: [round_mm(position[0]), round_mm(position[1])],
            base_height: base,
            theta,
            dims,
            height,
            model_id: model.model_id.clone(),
            parent_id: parent,
        }
    }

    /// True when `obj` lies inside the room, clear of keep-clear zones and
    /// of every floor object.
    fn fits(&self, obj: &SceneObject) -> bool {
        let poly = obj.footprint_polygon();
        let eps = 1e-9;
        if poly
            .iter()
            .any(|p| p[0] < -eps || p[1] < -eps || p[0] > self.width + eps || p[1] > self.depth + eps)
        {
            return false;
        }
        if self.keep_clear.iter().any(|z| sat_penetration(&poly, z) > 0.0) {
            return false;
        }
        self.objects
            .iter()
            .filter(|o| o.is_floor_supported())
            .all(|o| sat_penetration(&poly, &o.footprint_polygon()) <= 0.0)
    }

    fn push(&mut self, obj: SceneObject) -> u32 {
        let id = obj.id;
        self.objects.push(obj);
        id
    }

    /// Tries random wall positions for `model`; returns the placed id.
    fn place_on_some_wall(&mut self, model: &ModelSpec, attempts: usize) -> Option<u32> {
        for _ in 0..attempts {
            let wall = self.rng.random_range(0..4);
            let len = self.wall_len(wall);
            let half = model.dims[1] / 2.0;
            if len < 2.0 * half {
                continue;
            }
            let t = self.rng.random_range(half..=len - half);
            let obj = self.against_wall(model, wall, t);
            if self.fits(&obj) {
                return Some(self.push(obj));
            }
        }
        None
    }

    fn lamp_on(&mut self, parent_id: u32) {
        let parent = self.objects[parent_id as usize].clone();
        let model = self.pick_model(TABLE_LAMP);
        let slack = [
            ((parent.dims[0] - model.dims[0]) / 2.0).max(0.0),
            ((parent.dims[1] - model.dims[1]) / 2.0).max(0.0),
        ];
        if parent.category_id == DESK {
            // toward one end of the desk
            let side = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let local = [self.rng.random_range(-slack[0]..=slack[0]), side * slack[1] * 0.8];
            let pos = geometry::add(parent.position, geometry::rotate(local, parent.theta));
            let lamp = self.object(&model, pos, parent.theta, ParentId::Object(parent_id), parent.top_height());
            self.push(lamp);
        } else {
            let local = [
                self.rng.random_range(-slack[0]..=slack[0]) * 0.5,
                self.rng.random_range(-slack[1]..=slack[1]) * 0.5,
            ];
            let pos = geometry::add(parent.position, geometry::rotate(local, parent.theta));
            let lamp = self.object(&model, pos, parent.theta, ParentId::Object(parent_id), parent.top_height());
            self.push(lamp);
        }
    }
}

fn round_mm(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn door_zone(room: &Room, opening: &Opening, depth: f64, wall: usize) -> [Point; 4] {
    let w = &room.walls[opening.wall];
    let a = w.point_at((opening.start - 0.1).max(0.0));
    let b = w.point_at((opening.end + 0.1).min(w.length()));
    let n = INWARD[wall];
    let off = [depth * n.cos(), depth * n.sin()];
    [a, b, geometry::add(b, off), geometry::add(a, off)]
}

fn generate_scene(params: &GeneratorParams, pool: &[ModelSpec], seed: u64) -> Scene {
    let mut rng = seeded(seed);
    loop {
        let width = round_cm(rng.random_range(params.room_width.0..=params.room_width.1));
        let depth = round_cm(rng.random_range(params.room_depth.0..=params.room_depth.1));
        let mut room = Room::rectangle(width, depth, "bedroom");
        let door_wall = rng.random_range(0..4);
        let len = |w: usize| if w.is_multiple_of(2) { width } else { depth };
        let door_start = round_cm(rng.random_range(0.1..=len(door_wall) - params.door_width - 0.1));
        room.openings.push(Opening {
            wall: door_wall,
            start: door_start,
            end: door_start + params.door_width,
            kind: OpeningKind::Door,
        });
        let window_wall = (door_wall + rng.random_range(1..4)) % 4;
        let wl = len(window_wall);
        let ww = params.window_width.min(wl - 0.4);
        let window_start = round_cm(rng.random_range(0.2..=wl - ww - 0.2));
        room.openings.push(Opening {
            wall: window_wall,
            start: window_start,
            end: window_start + ww,
            kind: OpeningKind::Window,
        });
        let zone = door_zone(&room, &room.openings[0], params.door_clearance, door_wall);
        let mut b = Builder {
            params,
            pool,
            rng: seeded(rng.random()),
            width,
            depth,
            room,
            objects: Vec::new(),
            keep_clear: vec![zone],
        };
        if let Some(scene) = furnish(&mut b) {
            return scene;
        }
    }
}

fn furnish(b: &mut Builder) -> Option<Scene> {
    // bed: head against a wall, roughly centered
    let bed_model = b.pick_model(BED);
    let mut bed = None;
    for _ in 0..40 {
        let wall = b.rng.random_range(0..4);
        let len = b.wall_len(wall);
        let half = bed_model.dims[1] / 2.0;
        let margin = 0.5 + half;
        if len < 2.0 * margin {
            continue;
        }
        let t = b.rng.random_range(margin..=len - margin);
        let obj = b.against_wall(&bed_model, wall, t);
        if b.fits(&obj) {
            bed = Some((b.push(obj), wall, t));
            break;
        }
    }
    let (bed_id, bed_wall, bed_t) = bed?;
    let bed_half = b.objects[bed_id as usize].dims[1] / 2.0;

    let mut supporters = Vec::new();
    for side in [-1.0, 1.0] {
        if !b.rng.random_bool(b.params.p_nightstand) {
            continue;
        }
        let model = b.pick_model(NIGHTSTAND);
        let gap = b.rng.random_range(0.01..=0.05);
        let t = bed_t + side * (bed_half + gap + model.dims[1] / 2.0);
        let obj = b.against_wall(&model, bed_wall, t);
        if b.fits(&obj) {
            supporters.push(b.push(obj));
        }
    }

    if b.rng.random_bool(b.params.p_wardrobe) {
        let model = b.pick_model(WARDROBE);
        b.place_on_some_wall(&model, 60);
    }
    if b.rng.random_bool(b.params.p_desk) {
        let model = b.pick_model(DESK);
        if let Some(desk) = b.place_on_some_wall(&model, 60) {
            if b.rng.random_bool(b.params.p_chair) {
                let d = b.objects[desk as usize].clone();
                let chair_model = b.pick_model(OFFICE_CHAIR);
                let dist = d.dims[0] / 2.0 + chair_model.dims[0] / 2.0 + b.rng.random_range(0.02..=0.15);
                let lateral = b.rng.random_range(-0.15..=0.15);
                let pos = geometry::add(d.position, geometry::rotate([dist, lateral], d.theta));
                let chair = b.object(&chair_model, pos, normalize_angle(d.theta + PI), ParentId::Floor, 0.0);
                if b.fits(&chair) {
                    b.push(chair);
                }
            }
            if b.rng.random_bool(b.params.p_desk_lamp) {
                b.lamp_on(desk);
            }
        }
    }
    if b.rng.random_bool(b.params.p_dresser) {
        let model = b.pick_model(DRESSER);
        b.place_on_some_wall(&model, 60);
    }
    for s in supporters {
        if b.rng.random_bool(b.params.p_lamp) {
            b.lamp_on(s);
        }
    }
    // parents must precede children
    let mut objects = std::mem::take(&mut b.objects);
    order_parents_first(&mut objects);
    Some(Scene {
        room: b.room.clone(),
        objects,
    })
}

fn order_parents_first(objects: &mut [SceneObject]) {
    objects.sort_by_key(|o| !o.is_floor_supported());
}

/// `n` bedrooms, deterministic under `seed`. Scene `i` depends only on
/// `(params, seed, i)`.
pub fn generate_synthetic_corpus(params: &GeneratorParams, n: usize, seed: u64) -> Corpus {
    let pool = model_pool(params);
    let scenes = (0..n)
        .map(|i| generate_scene(params, &pool, derive_seed(seed, i as u64)))
        .collect();
    Corpus {
        vocabulary: bedroom_vocabulary(),
        scenes,
    }
}

/// Oriented box of a model placed at `position`.
pub fn model_box(model: &ModelSpec, position: Point, theta: f64) -> OrientedBox {
    OrientedBox::new(position, [model.dims[0] / 2.0, model.dims[1] / 2.0], theta)
}
