//! Planar geometry used throughout the pipeline: polygons, oriented boxes,
//! convex clipping and separating-axis penetration.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A point or vector in world meters.
pub type Point = [f64; 2];

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub fn distance(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Rotates `p` counter-clockwise by `angle` about the origin.
pub fn rotate(p: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

/// Signed shoelace area; positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    signed_area(poly).abs()
}

/// Area centroid of a simple polygon. Falls back to the vertex mean for
/// degenerate input.
pub fn polygon_centroid(poly: &[Point]) -> Point {
    let a = signed_area(poly);
    if a.abs() < 1e-12 {
        let n = poly.len().max(1) as f64;
        let sx: f64 = poly.iter().map(|p| p[0]).sum();
        let sy: f64 = poly.iter().map(|p| p[1]).sum();
        return [sx / n, sy / n];
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let f = cross(p, q);
        cx += (p[0] + q[0]) * f;
        cy += (p[1] + q[1]) * f;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

/// Even-odd crossing test. Points exactly on an edge may land either way.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    distance(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Proper or touching intersection of two closed segments.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    (d1 == 0.0 && on(c, d, a))
        || (d2 == 0.0 && on(c, d, b))
        || (d3 == 0.0 && on(a, b, c))
        || (d4 == 0.0 && on(a, b, d))
}

/// True when no two non-adjacent edges intersect and no vertex repeats.
pub fn is_simple_polygon(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if poly[i] == poly[j] {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Returns the polygon with counter-clockwise winding.
pub fn to_ccw(mut poly: Vec<Point>) -> Vec<Point> {
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    poly
}

/// Sutherland–Hodgman clipping of `subject` against a convex `clip`
/// polygon (either winding).
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let ccw = signed_area(clip) >= 0.0;
    let mut output: Vec<Point> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let (a, b) = if ccw {
            (clip[i], clip[(i + 1) % n])
        } else {
            (clip[(i + 1) % n], clip[i])
        };
        let input = std::mem::take(&mut output);
        let inside = |p: Point| orient(a, b, p) >= 0.0;
        let m = input.len();
        for k in 0..m {
            let cur = input[k];
            let prev = input[(k + m - 1) % m];
            let (ci, pi) = (inside(cur), inside(prev));
            if ci {
                if !pi {
                    output.push(line_intersection(prev, cur, a, b));
                }
                output.push(cur);
            } else if pi {
                output.push(line_intersection(prev, cur, a, b));
            }
        }
    }
    output
}

fn line_intersection(p: Point, q: Point, a: Point, b: Point) -> Point {
    let r = sub(q, p);
    let s = sub(b, a);
    let denom = cross(r, s);
    if denom == 0.0 {
        return q;
    }
    let t = cross(sub(a, p), s) / denom;
    [p[0] + t * r[0], p[1] + t * r[1]]
}

/// Intersection area of two convex polygons.
pub fn convex_intersection_area(a: &[Point], b: &[Point]) -> f64 {
    polygon_area(&clip_convex(a, b))
}

fn edge_normals(poly: &[Point]) -> impl Iterator<Item = Point> + '_ {
    let n = poly.len();
    (0..n).filter_map(move |i| {
        let e = sub(poly[(i + 1) % n], poly[i]);
        let len = norm(e);
        (len > 0.0).then(|| [-e[1] / len, e[0] / len])
    })
}

fn project(poly: &[Point], axis: Point) -> (f64, f64) {
    poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
        let d = dot(p, axis);
        (lo.min(d), hi.max(d))
    })
}

/// Separating-axis penetration depth of two convex polygons: the smallest
/// separating translation over all edge normals. Non-positive when
/// separated.
/// A two-point "polygon" is treated as a segment.
pub fn sat_penetration(a: &[Point], b: &[Point]) -> f64 {
    let mut depth = f64::INFINITY;
    for axis in edge_normals(a).chain(edge_normals(b)) {
        let (amin, amax) = project(a, axis);
        let (bmin, bmax) = project(b, axis);
        // translation needed to separate along this axis
        let overlap = (amax - bmin).min(bmax - amin);
        if overlap < depth {
            depth = overlap;
        }
        if depth <= 0.0 {
            return depth;
        }
    }
    depth
}

/// Like [`sat_penetration`], also returning the unit direction in which
/// `a` must move by the returned depth to separate from `b`.
pub fn sat_separation(a: &[Point], b: &[Point]) -> (f64, Point) {
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for axis in edge_normals(a).chain(edge_normals(b)) {
        let (amin, amax) = project(a, axis);
        let (bmin, bmax) = project(b, axis);
        let (down, up) = (amax - bmin, bmax - amin);
        let cand = if down < up { (down, [-axis[0], -axis[1]]) } else { (up, axis) };
        if cand.0 < best.0 {
            best = cand;
        }
        if best.0 <= 0.0 {
            break;
        }
    }
    best
}

/// Closest distance between two convex polygons; zero when they overlap.
pub fn convex_polygon_distance(a: &[Point], b: &[Point]) -> f64 {
    if sat_penetration(a, b) > 0.0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        let n = q.len();
        for &v in p {
            for i in 0..n {
                best = best.min(point_segment_distance(v, q[i], q[(i + 1) % n]));
            }
        }
    }
    best
}

/// Box with a center, positive half extents, and a counter-clockwise angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Point,
    pub half_extents: [f64; 2],
    pub theta: f64,
}

impl OrientedBox {
    pub fn new(center: Point, half_extents: [f64; 2], theta: f64) -> Self {
        Self {
            center,
            half_extents,
            theta: normalize_angle(theta),
        }
    }

    /// Corners in counter-clockwise order, starting at local (−hx, −hy).
    pub fn corners(&self) -> [Point; 4] {
        let [hx, hy] = self.half_extents;
        let (s, c) = self.theta.sin_cos();
        [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)].map(|(sx, sy)| {
            let (lx, ly) = (sx * hx, sy * hy);
            [self.center[0] + c * lx - s * ly, self.center[1] + s * lx + c * ly]
        })
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_extents[0] * self.half_extents[1]
    }

    /// Expresses a world point in the box frame.
    pub fn to_local(&self, p: Point) -> Point {
        rotate(sub(p, self.center), -self.theta)
    }

    pub fn contains(&self, p: Point) -> bool {
        let l = self.to_local(p);
        l[0].abs() <= self.half_extents[0] && l[1].abs() <= self.half_extents[1]
    }

    /// Signed distance to the boundary: negative inside, positive outside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let l = self.to_local(p);
        let qx = l[0].abs() - self.half_extents[0];
        let qy = l[1].abs() - self.half_extents[1];
        let outside = qx.max(0.0).hypot(qy.max(0.0));
        let inside = qx.max(qy).min(0.0);
        outside + inside
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn square(c: Point, h: f64, theta: f64) -> Vec<Point> {
        OrientedBox::new(c, [h, h], theta).corners().to_vec()
    }

    #[test]
    fn shoelace_and_centroid() {
        let poly = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 3.0]];
        assert_eq!(signed_area(&poly), 12.0);
        assert_eq!(polygon_centroid(&poly), [2.0, 1.5]);
        let mut cw = poly.clone();
        cw.reverse();
        assert_eq!(signed_area(&cw), -12.0);
        assert_eq!(to_ccw(cw), poly);
    }

    #[test]
    fn point_in_l_shape() {
        let l = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 2.0], [2.0, 2.0], [2.0, 4.0], [0.0, 4.0]];
        assert!(point_in_polygon([1.0, 3.0], &l));
        assert!(point_in_polygon([3.0, 1.0], &l));
        assert!(!point_in_polygon([3.0, 3.0], &l));
        assert!(!point_in_polygon([-0.1, 1.0], &l));
    }

    #[test]
    fn simple_polygon_detection() {
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!is_simple_polygon(&bowtie));
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(is_simple_polygon(&sq));
    }

    #[test]
    fn clipping_axis_aligned_overlap() {
        let a = square([0.0, 0.0], 1.0, 0.0);
        let b = square([1.0, 0.5], 1.0, 0.0);
        // overlap is [0,1] x [-0.5,1]
        assert!((convex_intersection_area(&a, &b) - 1.5).abs() < 1e-12);
        let far = square([5.0, 0.0], 1.0, 0.0);
        assert_eq!(convex_intersection_area(&a, &far), 0.0);
    }

    #[test]
    fn sat_depth_for_rotated_squares() {
        // squares rotated 45 degrees have face normals along the diagonal
        let s = 1.0;
        let u = [FRAC_PI_4.cos(), FRAC_PI_4.sin()];
        let a = square([0.0, 0.0], s / 2.0, FRAC_PI_4);
        let shift = s - 0.005;
        let b = square([u[0] * shift, u[1] * shift], s / 2.0, FRAC_PI_4);
        let depth = sat_penetration(&a, &b);
        assert!((depth - 0.005).abs() < 1e-9, "{depth}");
        let c = square([u[0] * 1.2, u[1] * 1.2], s / 2.0, FRAC_PI_4);
        assert!(sat_penetration(&a, &c) <= 0.0);
    }

    #[test]
    fn sat_against_segment() {
        let a = square([0.0, 0.0], 1.0, 0.0);
        let seg = [[0.98, -5.0], [0.98, 5.0]];
        assert!((sat_penetration(&a, &seg) - 0.02).abs() < 1e-12);
        let seg_out = [[1.5, -5.0], [1.5, 5.0]];
        assert!(sat_penetration(&a, &seg_out) <= 0.0);
    }

    #[test]
    fn box_sdf_sign_and_values() {
        let b = OrientedBox::new([0.0, 0.0], [1.0, 1.0], 0.0);
        assert_eq!(b.signed_distance([0.0, 0.0]), -1.0);
        assert_eq!(b.signed_distance([1.0, 0.0]), 0.0);
        assert!((b.signed_distance([2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-12);
        let r = OrientedBox::new([0.0, 0.0], [2.0, 0.5], PI / 2.0);
        assert!(r.contains([0.0, 1.9]));
        assert!(!r.contains([1.9, 0.0]));
    }

    #[test]
    fn angles() {
        assert_eq!(normalize_angle(-1e-18), 0.0);
        assert!((normalize_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-12);
        assert!((circular_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn polygon_distance() {
        let a = square([0.0, 0.0], 1.0, 0.0);
        let b = square([3.0, 0.0], 1.0, 0.0);
        assert!((convex_polygon_distance(&a, &b) - 1.0).abs() < 1e-12);
        let c = square([1.5, 0.0], 1.0, 0.0);
        assert_eq!(convex_polygon_distance(&a, &c), 0.0);
    }
}
