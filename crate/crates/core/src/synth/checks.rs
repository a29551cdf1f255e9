use crate::geometry::{add, convex_intersection_area, dot, norm, point_in_polygon, sat_penetration, sat_separation, sub, Point};
use crate::scene::{same_collision_group, Scene, SceneObject};

/// Minimum share of a supported object's footprint that must rest on its
/// parent.
pub const OVERHANG_SUPPORT_FRACTION: f64 = 0.8;

/// True when `candidate` penetrates a collision peer deeper than
/// `tolerance`, or crosses a solid wall piece.
pub fn collision_check(scene: &Scene, candidate: &SceneObject, tolerance: f64) -> bool {
    let fp = candidate.footprint_polygon();
    let hits_object = scene
        .objects
        .iter()
        .filter(|o| same_collision_group(o, candidate))
        .any(|o| sat_penetration(&fp, &o.footprint_polygon()) > tolerance);
    hits_object
        || scene
            .room
            .solid_wall_segments()
            .iter()
            .any(|seg| sat_penetration(&fp, seg) > tolerance)
}

/// Translation moving `candidate` out of every contact deeper than
/// `tolerance`, or `None` when the contacts cannot be resolved with a shift
/// of at most `max_shift`.
///
/// Walls push inward along their normal by the depth the footprint reaches
/// past them; objects push along the separating axis of least overlap. A
/// few rounds handle contacts that a single push creates.
pub fn resolve_contacts(scene: &Scene, candidate: &SceneObject, tolerance: f64, max_shift: f64) -> Option<Point> {
    let walls: Vec<([Point; 2], Point)> = scene
        .room
        .solid_wall_segments()
        .into_iter()
        .map(|seg| (seg, inward_normal(scene, seg)))
        .collect();
    let mut shift = [0.0, 0.0];
    for _ in 0..4 {
        let mut moved = candidate.clone();
        moved.position = add(candidate.position, shift);
        let fp = moved.footprint_polygon();
        let mut push = [0.0f64, 0.0f64];
        let mut contacts = 0;
        for (seg, n) in &walls {
            if sat_penetration(&fp, seg) > tolerance {
                let reach = fp.iter().map(|&c| -dot(sub(c, seg[0]), *n)).fold(0.0, f64::max);
                push = add(push, [n[0] * reach, n[1] * reach]);
                contacts += 1;
            }
        }
        for o in scene.objects.iter().filter(|o| same_collision_group(o, candidate)) {
            let (depth, dir) = sat_separation(&fp, &o.footprint_polygon());
            if depth > tolerance {
                push = add(push, [dir[0] * depth, dir[1] * depth]);
                contacts += 1;
            }
        }
        if contacts == 0 {
            return (norm(shift) <= max_shift && scene.room.contains(moved.position)).then_some(shift);
        }
        shift = add(shift, push);
        if norm(shift) > max_shift {
            return None;
        }
    }
    None
}

/// Unit normal of a wall segment pointing into the room.
fn inward_normal(scene: &Scene, seg: [Point; 2]) -> Point {
    let e = sub(seg[1], seg[0]);
    let len = norm(e).max(f64::MIN_POSITIVE);
    let n = [-e[1] / len, e[0] / len];
    let mid = [(seg[0][0] + seg[1][0]) / 2.0, (seg[0][1] + seg[1][1]) / 2.0];
    if scene.room.contains(add(mid, [n[0] * 1e-3, n[1] * 1e-3])) {
        n
    } else {
        [-n[0], -n[1]]
    }
}

/// Passes when at least `min_fraction` of the candidate's footprint lies on
/// the parent's top and its centroid is over the parent.
pub fn overhang_check(candidate: &SceneObject, parent: &SceneObject, min_fraction: f64) -> bool {
    let fp = candidate.footprint_polygon();
    let pf = parent.footprint_polygon();
    let area = candidate.footprint_area();
    area > 0.0 && convex_intersection_area(&fp, &pf) / area >= min_fraction && point_in_polygon(candidate.position, &pf)
}
