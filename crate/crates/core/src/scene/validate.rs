use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::{CategoryVocabulary, ParentId, Scene, SceneObject, Tier};
use crate::geometry::{self, sat_penetration};

/// Default collision tolerance: allowed penetration depth in meters.
pub const COLLISION_TOLERANCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    InvalidRoom,
    InvalidOpening,
    DuplicateId,
    UnknownCategory,
    InvalidDimensions,
    InvalidAngle,
    TierMismatch,
    MissingParent,
    ParentOrder,
    OutOfRoom,
    Overlap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub objects: Vec<u32>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}: {}", self.rule, self.objects, self.detail)
    }
}

/// True when two footprints penetrate deeper than `tolerance`.
pub fn footprints_collide(a: &SceneObject, b: &SceneObject, tolerance: f64) -> bool {
    sat_penetration(&a.footprint_polygon(), &b.footprint_polygon()) > tolerance
}

/// Two objects are collision peers when both stand on the floor, or both
/// rest on the same parent.
pub fn same_collision_group(a: &SceneObject, b: &SceneObject) -> bool {
    a.parent_id == b.parent_id
}

/// Every broken scene invariant; empty iff the scene is valid.
pub fn validate_scene(scene: &Scene, vocab: &CategoryVocabulary) -> Vec<Violation> {
    validate_scene_with(scene, vocab, COLLISION_TOLERANCE)
}

pub fn validate_scene_with(scene: &Scene, vocab: &CategoryVocabulary, tolerance: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule, objects: Vec<u32>, detail: String| out.push(Violation { rule, objects, detail });
    let room = &scene.room;

    let poly = &room.floor_polygon;
    if poly.len() < 3 || !geometry::is_simple_polygon(poly) || geometry::signed_area(poly) <= 0.0 {
        push(
            Rule::InvalidRoom,
            vec![],
            "floor polygon must be simple, counter-clockwise, with positive area".into(),
        );
    }
    for (k, o) in room.openings.iter().enumerate() {
        let ok = room
            .walls
            .get(o.wall)
            .map(|w| o.start >= 0.0 && o.start < o.end && o.end <= w.length() + 1e-9)
            .unwrap_or(false);
        if !ok {
            push(
                Rule::InvalidOpening,
                vec![],
                format!("opening {k} does not lie on wall {}", o.wall),
            );
        }
    }

    let mut seen = BTreeSet::new();
    let mut position: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, o) in scene.objects.iter().enumerate() {
        if !seen.insert(o.id) {
            push(Rule::DuplicateId, vec![o.id], "object id repeats".into());
        }
        position.entry(o.id).or_insert(i);
    }

    for (i, o) in scene.objects.iter().enumerate() {
        let tier = vocab.tier(o.category_id);
        if tier.is_none() {
            push(
                Rule::UnknownCategory,
                vec![o.id],
                format!("category {} is not placeable", o.category_id),
            );
        }
        let dims_ok = o.dims.iter().chain(std::iter::once(&o.height)).all(|&v| v > 0.0 && v.is_finite());
        if !dims_ok {
            push(Rule::InvalidDimensions, vec![o.id], "w, d and height must be positive".into());
        }
        if !(0.0..TAU).contains(&o.theta) {
            push(Rule::InvalidAngle, vec![o.id], format!("theta {} outside [0, 2π)", o.theta));
        }
        match (tier, o.parent_id) {
            (Some(Tier::Second), ParentId::Floor) => push(
                Rule::TierMismatch,
                vec![o.id],
                "second-tier object stands on the floor".into(),
            ),
            (Some(Tier::First), ParentId::Object(_)) => push(
                Rule::TierMismatch,
                vec![o.id],
                "first-tier object has a parent".into(),
            ),
            _ => {}
        }
        if let ParentId::Object(pid) = o.parent_id {
            match position.get(&pid) {
                None => push(Rule::MissingParent, vec![o.id, pid], "parent does not exist".into()),
                Some(&pi) if pi >= i => push(
                    Rule::ParentOrder,
                    vec![o.id, pid],
                    "parent appears after child".into(),
                ),
                _ => {}
            }
        }
        if !room.contains(o.position) {
            push(Rule::OutOfRoom, vec![o.id], "centroid outside floor polygon".into());
        }
    }

    for (i, a) in scene.objects.iter().enumerate() {
        for b in &scene.objects[i + 1..] {
            if same_collision_group(a, b) && footprints_collide(a, b, tolerance) {
                push(
                    Rule::Overlap,
                    vec![a.id, b.id],
                    format!("footprints overlap by more than {tolerance} m"),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::types::{Opening, OpeningKind, Room};

    fn vocab() -> CategoryVocabulary {
        CategoryVocabulary::new(&["wardrobe", "lamp"], &["lamp"])
    }

    fn wardrobe(id: u32, pos: [f64; 2]) -> SceneObject {
        SceneObject {
            id,
            category_id: 0,
            position: pos,
            base_height: 0.0,
            theta: 0.0,
            dims: [0.6, 1.2],
            height: 2.0,
            model_id: "w".into(),
            parent_id: ParentId::Floor,
        }
    }

    fn room() -> Room {
        Room::rectangle(4.0, 3.0, "bedroom")
    }

    #[test]
    fn empty_room_is_valid() {
        assert!(validate_scene(&Scene::empty(room()), &vocab()).is_empty());
    }

    #[test]
    fn coincident_wardrobes_overlap() {
        let s = Scene {
            room: room(),
            objects: vec![wardrobe(0, [1.0, 1.0]), wardrobe(1, [1.0, 1.0])],
        };
        let v = validate_scene(&s, &vocab());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::Overlap);
        assert_eq!(v[0].objects, vec![0, 1]);
    }

    #[test]
    fn centroid_just_outside() {
        let s = Scene {
            room: room(),
            objects: vec![wardrobe(0, [4.1, 1.0])],
        };
        // point-in-polygon oracle for an axis-aligned rectangle
        let p = s.objects[0].position;
        let inside = p[0] > 0.0 && p[0] < 4.0 && p[1] > 0.0 && p[1] < 3.0;
        assert!(!inside);
        let v = validate_scene(&s, &vocab());
        assert!(v.iter().any(|x| x.rule == Rule::OutOfRoom && x.objects == vec![0]));
    }

    #[test]
    fn tier_and_parent_rules() {
        let mut lamp = wardrobe(1, [1.0, 1.0]);
        lamp.category_id = 1;
        lamp.dims = [0.2, 0.2];
        let s = Scene {
            room: room(),
            objects: vec![lamp.clone()],
        };
        assert!(validate_scene(&s, &vocab()).iter().any(|x| x.rule == Rule::TierMismatch));
        lamp.parent_id = ParentId::Object(0);
        let s = Scene {
            room: room(),
            objects: vec![lamp.clone(), wardrobe(0, [1.0, 1.0])],
        };
        assert!(validate_scene(&s, &vocab()).iter().any(|x| x.rule == Rule::ParentOrder));
        let s = Scene {
            room: room(),
            objects: vec![wardrobe(0, [1.0, 1.0]), lamp],
        };
        assert!(validate_scene(&s, &vocab()).is_empty());
    }

    #[test]
    fn bad_opening_and_room() {
        let mut r = room();
        r.openings.push(Opening {
            wall: 0,
            start: 3.5,
            end: 4.5,
            kind: OpeningKind::Door,
        });
        r.floor_polygon.reverse();
        let v = validate_scene(&Scene::empty(r), &vocab());
        assert!(v.iter().any(|x| x.rule == Rule::InvalidOpening));
        assert!(v.iter().any(|x| x.rule == Rule::InvalidRoom));
    }
}
