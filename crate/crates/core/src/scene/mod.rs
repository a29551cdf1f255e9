//! World-space rooms and objects, support inference, and the orderings
//! used to turn scenes into training sequences.

mod order;
mod support;
mod types;
mod validate;

pub use order::{canonical_order, randomized_order};
pub use support::{apply_supports, infer_supports, SupportParams};
pub use types::{
    bounding_box, footprint_polygon, Category, CategoryVocabulary, Opening, OpeningKind, ParentId, Room, Scene,
    SceneObject, Tier, Wall,
};
pub use validate::{
    footprints_collide, same_collision_group, validate_scene, validate_scene_with, Rule, Violation,
    COLLISION_TOLERANCE,
};
