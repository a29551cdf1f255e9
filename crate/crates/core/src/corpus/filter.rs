use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::geometry::{self, normalize_angle, Point};
use crate::scene::{validate_scene, CategoryVocabulary, ParentId, Room, Scene, Tier};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterRules {
    /// Largest allowed relative deviation from a model's canonical size,
    /// per axis.
    pub scale_tolerance: f64,
    /// Canonical `(w, d, h)` per model id. Objects whose model is not
    /// listed are taken as unscaled.
    pub canonical_dims: BTreeMap<String, [f64; 3]>,
    /// Room types emitted in four rotated copies.
    pub augment_room_types: BTreeSet<String>,
}

impl Default for FilterRules {
    fn default() -> Self {
        Self {
            scale_tolerance: 0.1,
            canonical_dims: BTreeMap::new(),
            augment_room_types: BTreeSet::new(),
        }
    }
}

/// Applies the corpus cleaning rules, in order:
///
/// 1. drop any scene holding an object scaled beyond the tolerance on any
///    axis, and reset the remaining objects to canonical size;
/// 2. drop objects of unknown categories, objects resting on another
///    object whose category is not second-tier, and second-tier objects
///    standing on the floor;
/// 3. drop supported objects whose parent is gone, transitively;
/// 4. drop scenes that no longer validate;
/// 5. emit configured room types at 0°, 90°, 180° and 270°.
pub fn filter_corpus(scenes: &[Scene], vocab: &CategoryVocabulary, rules: &FilterRules) -> Vec<Scene> {
    let mut out = Vec::new();
    for scene in scenes {
        let Some(scene) = normalize_scale(scene, rules) else { continue };
        let scene = prune(scene, vocab);
        if !validate_scene(&scene, vocab).is_empty() {
            continue;
        }
        if rules.augment_room_types.contains(scene.room_type()) {
            for k in 0..4 {
                out.push(rotate_quarter_turns(&scene, k));
            }
        } else {
            out.push(scene);
        }
    }
    out
}

fn normalize_scale(scene: &Scene, rules: &FilterRules) -> Option<Scene> {
    let mut s = scene.clone();
    for o in &mut s.objects {
        let Some(canon) = rules.canonical_dims.get(&o.model_id) else { continue };
        let actual = [o.dims[0], o.dims[1], o.height];
        let scaled = actual
            .iter()
            .zip(canon)
            .any(|(&a, &c)| c <= 0.0 || (a / c - 1.0).abs() > rules.scale_tolerance + 1e-12);
        if scaled {
            return None;
        }
        o.dims = [canon[0], canon[1]];
        o.height = canon[2];
    }
    // children follow their parent's new top
    let tops: BTreeMap<u32, f64> = s.objects.iter().map(|o| (o.id, o.top_height())).collect();
    for o in &mut s.objects {
        if let ParentId::Object(pid) = o.parent_id {
            if let Some(&top) = tops.get(&pid) {
                o.base_height = top;
            }
        }
    }
    Some(s)
}

fn prune(mut scene: Scene, vocab: &CategoryVocabulary) -> Scene {
    scene.objects.retain(|o| match (vocab.tier(o.category_id), o.parent_id) {
        (None, _) => false,
        (Some(Tier::First), ParentId::Object(_)) => false,
        (Some(Tier::Second), ParentId::Floor) => false,
        _ => true,
    });
    loop {
        let ids: BTreeSet<u32> = scene.objects.iter().map(|o| o.id).collect();
        let before = scene.objects.len();
        scene.objects.retain(|o| match o.parent_id {
            ParentId::Floor => true,
            ParentId::Object(pid) => ids.contains(&pid),
        });
        if scene.objects.len() == before {
            return scene;
        }
    }
}

/// Exact rotation by `k` quarter turns about the floor centroid.
pub fn rotate_quarter_turns(scene: &Scene, k: usize) -> Scene {
    let c = scene.room.centroid();
    let turn = |p: Point| -> Point {
        let mut d = geometry::sub(p, c);
        for _ in 0..k % 4 {
            d = [-d[1], d[0]];
        }
        geometry::add(c, d)
    };
    let room = Room {
        floor_polygon: scene.room.floor_polygon.iter().map(|&p| turn(p)).collect(),
        walls: scene
            .room
            .walls
            .iter()
            .map(|w| {
                let mut w = w.clone();
                w.start = turn(w.start);
                w.end = turn(w.end);
                w
            })
            .collect(),
        openings: scene.room.openings.clone(),
        room_type: scene.room.room_type.clone(),
    };
    let objects = scene
        .objects
        .iter()
        .map(|o| {
            let mut o = o.clone();
            o.position = turn(o.position);
            o.theta = normalize_angle(o.theta + FRAC_PI_2 * (k % 4) as f64);
            o
        })
        .collect();
    Scene { room, objects }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SceneObject;

    fn vocab() -> CategoryVocabulary {
        CategoryVocabulary::new(&["sofa", "stand", "lamp"], &["lamp"])
    }

    fn obj(id: u32, cat: usize, pos: [f64; 2], dims: [f64; 2], model: &str) -> SceneObject {
        SceneObject {
            id,
            category_id: cat,
            position: pos,
            base_height: 0.0,
            theta: 0.0,
            dims,
            height: 0.5,
            model_id: model.into(),
            parent_id: ParentId::Floor,
        }
    }

    fn rules() -> FilterRules {
        FilterRules {
            canonical_dims: BTreeMap::from([
                ("sofa-1".to_string(), [1.0, 2.0, 0.5]),
                ("stand-1".to_string(), [0.5, 0.5, 0.5]),
                ("lamp-1".to_string(), [0.2, 0.2, 0.4]),
            ]),
            ..Default::default()
        }
    }

    fn room_scene(objects: Vec<SceneObject>, room_type: &str) -> Scene {
        Scene {
            room: Room::rectangle(5.0, 4.0, room_type),
            objects,
        }
    }

    #[test]
    fn over_scaled_scene_is_dropped() {
        let s = room_scene(vec![obj(0, 0, [2.0, 2.0], [1.15, 2.0], "sofa-1")], "bedroom");
        assert!(filter_corpus(&[s], &vocab(), &rules()).is_empty());
    }

    #[test]
    fn small_scaling_is_removed() {
        let s = room_scene(vec![obj(0, 0, [2.0, 2.0], [1.05, 2.0], "sofa-1")], "bedroom");
        let out = filter_corpus(&[s], &vocab(), &rules());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].objects[0].dims, [1.0, 2.0]);
    }

    #[test]
    fn orphans_and_misplaced_tiers_removed() {
        let mut lamp = obj(2, 2, [1.0, 1.0], [0.2, 0.2], "lamp-1");
        lamp.parent_id = ParentId::Object(9);
        lamp.base_height = 0.5;
        lamp.height = 0.4;
        let mut on_sofa = obj(3, 1, [2.0, 2.0], [0.5, 0.5], "stand-1");
        on_sofa.parent_id = ParentId::Object(0);
        let mut floor_lamp = obj(4, 2, [4.0, 3.0], [0.2, 0.2], "lamp-1");
        floor_lamp.height = 0.4;
        let s = room_scene(
            vec![obj(0, 0, [2.0, 2.0], [1.0, 2.0], "sofa-1"), on_sofa, lamp, floor_lamp],
            "bedroom",
        );
        let out = filter_corpus(&[s], &vocab(), &rules());
        assert_eq!(out[0].objects.iter().map(|o| o.id).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn orphan_chain_of_removed_parent() {
        // the stand is dropped for scaling-free reasons (unknown category),
        // taking its lamp with it
        let mut stand = obj(1, 7, [1.0, 1.0], [0.5, 0.5], "x");
        stand.id = 1;
        let mut lamp = obj(2, 2, [1.0, 1.0], [0.2, 0.2], "lamp-1");
        lamp.parent_id = ParentId::Object(1);
        lamp.base_height = 0.5;
        lamp.height = 0.4;
        let s = room_scene(vec![stand, lamp], "bedroom");
        let out = filter_corpus(&[s], &vocab(), &rules());
        assert!(out[0].objects.is_empty());
    }

    #[test]
    fn living_room_augmented_four_ways() {
        let s = room_scene(vec![obj(0, 0, [1.0, 1.5], [1.0, 2.0], "sofa-1")], "living");
        let r = FilterRules {
            augment_room_types: BTreeSet::from(["living".to_string()]),
            ..rules()
        };
        let out = filter_corpus(std::slice::from_ref(&s), &vocab(), &r);
        assert_eq!(out.len(), 4);
        assert_eq!(out[0], s);
        for (k, scene) in out.iter().enumerate() {
            assert!(validate_scene(scene, &vocab()).is_empty());
            let expect = normalize_angle(FRAC_PI_2 * k as f64);
            assert!((scene.objects[0].theta - expect).abs() < 1e-12);
            assert!((scene.room.area() - 20.0).abs() < 1e-9);
        }
    }
}
