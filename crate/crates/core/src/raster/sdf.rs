use super::image::ImageFrame;
use crate::geometry::OrientedBox;

/// Signed distance in meters from each pixel center to the box boundary,
/// row-major; negative inside.
pub fn sdf_box(frame: &ImageFrame, obb: &OrientedBox) -> Vec<f64> {
    let r = frame.resolution;
    let mut out = Vec::with_capacity(r * r);
    for row in 0..r {
        for col in 0..r {
            out.push(obb.signed_distance(frame.pixel_center_world(col, row)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance, point_in_polygon};
    use std::f64::consts::SQRT_2;

    #[test]
    fn reference_values() {
        let b = OrientedBox::new([0.0, 0.0], [1.0, 1.0], 0.0);
        assert!((b.signed_distance([0.0, 0.0]) + 1.0).abs() < 1e-12);
        assert!(b.signed_distance([1.0, 0.0]).abs() < 1e-12);
        let p = [2.0, 2.0];
        // densely sampled perimeter oracle
        let corners = b.corners();
        let mut best = f64::INFINITY;
        for k in 0..4 {
            let (a, c) = (corners[k], corners[(k + 1) % 4]);
            for i in 0..=10_000 {
                let t = i as f64 / 10_000.0;
                best = best.min(distance(p, [a[0] + t * (c[0] - a[0]), a[1] + t * (c[1] - a[1])]));
            }
        }
        assert!((b.signed_distance(p) - best).abs() < 1e-9);
        assert!((best - SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn sign_matches_containment() {
        let frame = ImageFrame::new(32, 0.1, [0.3, -0.2]);
        let b = OrientedBox::new([0.5, 0.0], [0.7, 0.4], 0.9);
        let sdf = sdf_box(&frame, &b);
        let poly = b.corners();
        for row in 0..32 {
            for col in 0..32 {
                let p = frame.pixel_center_world(col, row);
                let d = sdf[row * 32 + col];
                assert_eq!(d > 0.0, !point_in_polygon(p, &poly), "({col},{row}) d={d}");
            }
        }
    }
}
