use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, OrientedBox, Point};

/// Whether a category rests on the floor or on another object's top surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub id: usize,
    pub name: String,
    pub tier: Tier,
    /// Number of instances observed in the training corpus.
    #[serde(default)]
    pub frequency: u64,
    /// Mean footprint area in square meters.
    #[serde(default)]
    pub mean_footprint_area: f64,
}

impl Category {
    /// Ordering key for canonical object orderings.
    pub fn importance(&self) -> f64 {
        self.mean_footprint_area * self.frequency as f64
    }
}

/// Placeable categories plus the two reserved classes: STOP at index `C`
/// and empty space at index `C + 1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryVocabulary {
    categories: Vec<Category>,
}

impl CategoryVocabulary {
    /// Builds a vocabulary; a category is second-tier iff its name is in
    /// `second_tier_whitelist`.
    pub fn new<S: AsRef<str>>(names: &[S], second_tier_whitelist: &[S]) -> Self {
        let categories = names
            .iter()
            .enumerate()
            .map(|(id, name)| {
                let name = name.as_ref().to_string();
                let tier = if second_tier_whitelist.iter().any(|w| w.as_ref() == name) {
                    Tier::Second
                } else {
                    Tier::First
                };
                Category {
                    id,
                    name,
                    tier,
                    frequency: 0,
                    mean_footprint_area: 0.0,
                }
            })
            .collect();
        Self { categories }
    }

    pub fn from_categories(categories: Vec<Category>) -> Result<Self> {
        let vocab = Self { categories };
        vocab.check()?;
        Ok(vocab)
    }

    /// Checks id contiguity and name uniqueness.
    pub fn check(&self) -> Result<()> {
        for (i, c) in self.categories.iter().enumerate() {
            if c.id != i {
                return Err(Error::VocabularyMismatch(format!(
                    "category '{}' has id {} at position {}",
                    c.name, c.id, i
                )));
            }
            if self.categories[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::VocabularyMismatch(format!("duplicate category '{}'", c.name)));
            }
        }
        Ok(())
    }

    /// Number of placeable categories, `C`.
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn stop_id(&self) -> usize {
        self.categories.len()
    }

    pub fn empty_id(&self) -> usize {
        self.categories.len() + 1
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn get(&self, id: usize) -> Option<&Category> {
        self.categories.get(id)
    }

    pub fn tier(&self, id: usize) -> Option<Tier> {
        self.categories.get(id).map(|c| c.tier)
    }

    pub fn is_second_tier(&self, id: usize) -> bool {
        self.tier(id) == Some(Tier::Second)
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c.name == name)
    }

    pub fn name(&self, id: usize) -> &str {
        if id == self.stop_id() {
            return "<STOP>";
        }
        self.categories.get(id).map(|c| c.name.as_str()).unwrap_or("<unknown>")
    }

    pub fn importance(&self, id: usize) -> f64 {
        self.categories.get(id).map(Category::importance).unwrap_or(0.0)
    }

    /// Sets per-category corpus frequency and mean footprint area.
    pub fn set_statistics(&mut self, frequency: &[u64], mean_area: &[f64]) {
        for (c, (&f, &a)) in self.categories.iter_mut().zip(frequency.iter().zip(mean_area)) {
            c.frequency = f;
            c.mean_footprint_area = a;
        }
    }

    /// Category ids sorted by descending importance, ties by id.
    pub fn by_importance(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.len()).collect();
        ids.sort_by(|&a, &b| self.importance(b).total_cmp(&self.importance(a)).then(a.cmp(&b)));
        ids
    }
}

/// Support parent of an object; serialized as `null` for the floor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<u32>", into = "Option<u32>")]
pub enum ParentId {
    #[default]
    Floor,
    Object(u32),
}

impl From<Option<u32>> for ParentId {
    fn from(v: Option<u32>) -> Self {
        v.map_or(ParentId::Floor, ParentId::Object)
    }
}

impl From<ParentId> for Option<u32> {
    fn from(p: ParentId) -> Self {
        match p {
            ParentId::Floor => None,
            ParentId::Object(id) => Some(id),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    pub category_id: usize,
    /// Footprint center in world meters.
    pub position: Point,
    pub base_height: f64,
    /// Facing angle, counter-clockwise from +x, in `[0, 2π)`.
    pub theta: f64,
    /// Footprint extents `(w, d)`: `w` along the facing axis, `d` across it.
    pub dims: [f64; 2],
    pub height: f64,
    pub model_id: String,
    #[serde(default)]
    pub parent_id: ParentId,
}

impl SceneObject {
    pub fn bounding_box(&self) -> OrientedBox {
        OrientedBox {
            center: self.position,
            half_extents: [self.dims[0] / 2.0, self.dims[1] / 2.0],
            theta: self.theta,
        }
    }

    /// The four footprint corners, counter-clockwise.
    pub fn footprint_polygon(&self) -> [Point; 4] {
        self.bounding_box().corners()
    }

    pub fn footprint_area(&self) -> f64 {
        self.dims[0] * self.dims[1]
    }

    pub fn top_height(&self) -> f64 {
        self.base_height + self.height
    }

    pub fn is_floor_supported(&self) -> bool {
        self.parent_id == ParentId::Floor
    }
}

pub fn bounding_box(obj: &SceneObject) -> OrientedBox {
    obj.bounding_box()
}

pub fn footprint_polygon(obj: &SceneObject) -> [Point; 4] {
    obj.footprint_polygon()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpeningKind {
    Door,
    Window,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub start: Point,
    pub end: Point,
    #[serde(default = "default_wall_height")]
    pub height: f64,
}

fn default_wall_height() -> f64 {
    2.7
}

impl Wall {
    pub fn length(&self) -> f64 {
        geometry::distance(self.start, self.end)
    }

    pub fn point_at(&self, t: f64) -> Point {
        let len = self.length();
        let f = if len > 0.0 { t / len } else { 0.0 };
        [
            self.start[0] + f * (self.end[0] - self.start[0]),
            self.start[1] + f * (self.end[1] - self.start[1]),
        ]
    }
}

/// An interval `[start, end]` in meters along wall `wall`, measured from
/// the wall's start point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    pub wall: usize,
    pub start: f64,
    pub end: f64,
    pub kind: OpeningKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    /// Counter-clockwise floor outline.
    pub floor_polygon: Vec<Point>,
    #[serde(default)]
    pub walls: Vec<Wall>,
    #[serde(default)]
    pub openings: Vec<Opening>,
    pub room_type: String,
}

impl Room {
    /// Room whose walls follow every edge of `polygon`.
    pub fn from_polygon(polygon: Vec<Point>, room_type: &str) -> Self {
        let floor_polygon = geometry::to_ccw(polygon);
        let n = floor_polygon.len();
        let walls = (0..n)
            .map(|i| Wall {
                start: floor_polygon[i],
                end: floor_polygon[(i + 1) % n],
                height: default_wall_height(),
            })
            .collect();
        Self {
            floor_polygon,
            walls,
            openings: Vec::new(),
            room_type: room_type.to_string(),
        }
    }

    /// Axis-aligned `width × depth` room with its lower-left corner at the origin.
    pub fn rectangle(width: f64, depth: f64, room_type: &str) -> Self {
        Self::from_polygon(
            vec![[0.0, 0.0], [width, 0.0], [width, depth], [0.0, depth]],
            room_type,
        )
    }

    pub fn area(&self) -> f64 {
        geometry::polygon_area(&self.floor_polygon)
    }

    pub fn centroid(&self) -> Point {
        geometry::polygon_centroid(&self.floor_polygon)
    }

    pub fn contains(&self, p: Point) -> bool {
        geometry::point_in_polygon(p, &self.floor_polygon)
    }

    /// Wall pieces not covered by any opening, as world segments.
    pub fn solid_wall_segments(&self) -> Vec<[Point; 2]> {
        let mut out = Vec::new();
        for (i, wall) in self.walls.iter().enumerate() {
            let len = wall.length();
            let mut cuts: Vec<(f64, f64)> = self
                .openings
                .iter()
                .filter(|o| o.wall == i)
                .map(|o| (o.start.max(0.0), o.end.min(len)))
                .collect();
            cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut t = 0.0;
            for (s, e) in cuts {
                if s > t {
                    out.push([wall.point_at(t), wall.point_at(s)]);
                }
                t = t.max(e);
            }
            if t < len {
                out.push([wall.point_at(t), wall.point_at(len)]);
            }
        }
        out
    }

    /// Opening intervals as world segments, with their kind.
    pub fn opening_segments(&self) -> Vec<([Point; 2], OpeningKind)> {
        self.openings
            .iter()
            .filter_map(|o| {
                let wall = self.walls.get(o.wall)?;
                Some(([wall.point_at(o.start), wall.point_at(o.end)], o.kind))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub room: Room,
    /// Objects in insertion order.
    #[serde(default)]
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn empty(room: Room) -> Self {
        Self {
            room,
            objects: Vec::new(),
        }
    }

    pub fn room_type(&self) -> &str {
        &self.room.room_type
    }

    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn next_object_id(&self) -> u32 {
        self.objects.iter().map(|o| o.id + 1).max().unwrap_or(0)
    }

    /// Copy containing only the objects at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Scene {
        Scene {
            room: self.room.clone(),
            objects: indices.iter().map(|&i| self.objects[i].clone()).collect(),
        }
    }

    pub fn category_counts(&self, num_categories: usize) -> Vec<usize> {
        let mut counts = vec![0; num_categories];
        for o in &self.objects {
            if let Some(c) = counts.get_mut(o.category_id) {
                *c += 1;
            }
        }
        counts
    }
}
