use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{add, rotate};
use crate::scene::{Room, Scene};

/// Copies of `scenes` with every object's centroid jittered by Gaussian
/// noise whose standard deviation is `sigma_frac` times the object's width
/// along its own x axis and depth along its own y axis.
///
/// A jittered centroid that leaves the room is pulled back toward the
/// original position until it is inside again. Orientation, size and the
/// support graph are left alone.
pub fn perturb_scenes<R: Rng + ?Sized>(scenes: &[Scene], sigma_frac: f64, rng: &mut R) -> Vec<Scene> {
    scenes
        .iter()
        .map(|scene| {
            let mut out = scene.clone();
            for o in &mut out.objects {
                let zu: f64 = rng.sample(StandardNormal);
                let zv: f64 = rng.sample(StandardNormal);
                let local = [zu * sigma_frac * o.dims[0], zv * sigma_frac * o.dims[1]];
                let target = add(o.position, rotate(local, o.theta));
                o.position = clamp_into_room(&scene.room, o.position, target);
            }
            out
        })
        .collect()
}

/// The point furthest along `from → to` that lies inside the room, found by
/// bisection. Returns `from` when it is outside itself.
fn clamp_into_room(room: &Room, from: [f64; 2], to: [f64; 2]) -> [f64; 2] {
    if room.contains(to) || !room.contains(from) {
        return if room.contains(to) { to } else { from };
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let p = [from[0] + mid * (to[0] - from[0]), from[1] + mid * (to[1] - from[1])];
        if room.contains(p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    [from[0] + lo * (to[0] - from[0]), from[1] + lo * (to[1] - from[1])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::scene::{ParentId, SceneObject};

    fn scene_with(n: usize, theta: f64) -> Scene {
        let mut s = Scene::empty(Room::rectangle(1000.0, 1000.0, "x"));
        for i in 0..n {
            s.objects.push(SceneObject {
                id: i as u32,
                category_id: i % 3,
                position: [500.0, 500.0],
                base_height: 0.0,
                theta,
                dims: [2.0, 1.0],
                height: 0.5,
                model_id: "m".into(),
                parent_id: ParentId::Floor,
            });
        }
        s
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = scene_with(5, 0.3);
        let out = perturb_scenes(std::slice::from_ref(&s), 0.0, &mut seeded(1));
        assert_eq!(out[0], s);
    }

    #[test]
    fn reproducible_and_structure_preserving() {
        let s = vec![scene_with(7, 0.0)];
        let a = perturb_scenes(&s, 0.1, &mut seeded(9));
        let b = perturb_scenes(&s, 0.1, &mut seeded(9));
        assert_eq!(a, b);
        assert_eq!(a[0].objects.len(), 7);
        for (x, y) in a[0].objects.iter().zip(&s[0].objects) {
            assert_eq!(x.category_id, y.category_id);
        }
    }

    #[test]
    fn empirical_sigma_matches_target() {
        let theta = 0.7;
        let s = vec![scene_with(10_000, theta)];
        let out = perturb_scenes(&s, 0.1, &mut seeded(5));
        let (mut su, mut sv) = (0.0, 0.0);
        for o in &out[0].objects {
            let d = rotate([o.position[0] - 500.0, o.position[1] - 500.0], -theta);
            su += d[0] * d[0];
            sv += d[1] * d[1];
        }
        let n = out[0].objects.len() as f64;
        assert!(((su / n).sqrt() / 0.2 - 1.0).abs() < 0.05);
        assert!(((sv / n).sqrt() / 0.1 - 1.0).abs() < 0.05);
    }

    #[test]
    fn clamped_inside_room() {
        let mut s = Scene::empty(Room::rectangle(2.0, 2.0, "x"));
        s.objects = scene_with(200, 0.0).objects;
        for o in &mut s.objects {
            o.position = [0.05, 1.0];
        }
        let out = perturb_scenes(&[s], 0.5, &mut seeded(2));
        assert!(out[0].objects.iter().all(|o| out[0].room.contains(o.position)));
    }
}
