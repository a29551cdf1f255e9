use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::scene::Scene;

pub const FLOOR: usize = 0;
pub const WALL: usize = 1;
pub const OPENING: usize = 2;
pub const OCCUPANCY: usize = 3;
/// First per-category occupancy channel.
pub const CATEGORY_BASE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RasterConfig {
    /// Pixels per side.
    pub resolution: usize,
    /// Physical side length covered by the image, meters.
    pub extent: f64,
    pub wall_thickness: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            extent: 12.0,
            wall_thickness: 0.1,
        }
    }
}

impl RasterConfig {
    pub fn meters_per_pixel(&self) -> f64 {
        self.extent / self.resolution as f64
    }
}

/// Similarity transform between world meters and continuous pixel
/// coordinates `(u, v)` = (column, row).
///
/// Pixel `(c, r)` covers `[c, c+1) × [r, r+1)`; the world point `center`
/// sits at `(R/2, R/2)`, and the image axes are the world axes rotated
/// counter-clockwise by `angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageFrame {
    pub resolution: usize,
    pub meters_per_pixel: f64,
    pub center: Point,
    pub angle: f64,
}

impl ImageFrame {
    pub fn new(resolution: usize, meters_per_pixel: f64, center: Point) -> Self {
        Self {
            resolution,
            meters_per_pixel,
            center,
            angle: 0.0,
        }
    }

    pub fn half(&self) -> f64 {
        self.resolution as f64 / 2.0
    }

    pub fn world_to_pixel(&self, p: Point) -> [f64; 2] {
        let local = geometry::rotate(geometry::sub(p, self.center), -self.angle);
        [
            local[0] / self.meters_per_pixel + self.half(),
            local[1] / self.meters_per_pixel + self.half(),
        ]
    }

    pub fn pixel_to_world(&self, uv: [f64; 2]) -> Point {
        let local = [
            (uv[0] - self.half()) * self.meters_per_pixel,
            (uv[1] - self.half()) * self.meters_per_pixel,
        ];
        geometry::add(self.center, geometry::rotate(local, self.angle))
    }

    pub fn pixel_center_world(&self, col: usize, row: usize) -> Point {
        self.pixel_to_world([col as f64 + 0.5, row as f64 + 0.5])
    }

    /// Pixel containing a world point, if inside the image.
    pub fn pixel_of(&self, p: Point) -> Option<(usize, usize)> {
        let [u, v] = self.world_to_pixel(p);
        let (c, r) = (u.floor(), v.floor());
        let n = self.resolution as f64;
        (c >= 0.0 && r >= 0.0 && c < n && r < n).then_some((c as usize, r as usize))
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.resolution + col
    }

    pub fn num_pixels(&self) -> usize {
        self.resolution * self.resolution
    }
}

/// Multi-channel top-down raster. Channel layout: floor, wall, opening,
/// aggregate occupancy, one occupancy channel per category, then sin θ and
/// cos θ of the occupying object.
#[derive(Clone, Debug, PartialEq)]
pub struct FloorPlanImage {
    pub frame: ImageFrame,
    num_categories: usize,
    data: Vec<f32>,
}

impl FloorPlanImage {
    pub fn zeros(frame: ImageFrame, num_categories: usize) -> Self {
        let channels = num_categories + 6;
        Self {
            frame,
            num_categories,
            data: vec![0.0; channels * frame.num_pixels()],
        }
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    pub fn num_channels(&self) -> usize {
        self.num_categories + 6
    }

    pub fn resolution(&self) -> usize {
        self.frame.resolution
    }

    pub fn meters_per_pixel(&self) -> f64 {
        self.frame.meters_per_pixel
    }

    pub fn sin_channel(&self) -> usize {
        CATEGORY_BASE + self.num_categories
    }

    pub fn cos_channel(&self) -> usize {
        CATEGORY_BASE + self.num_categories + 1
    }

    pub fn category_channel(&self, category: usize) -> usize {
        CATEGORY_BASE + category
    }

    pub fn channel(&self, ch: usize) -> &[f32] {
        let n = self.frame.num_pixels();
        &self.data[ch * n..(ch + 1) * n]
    }

    pub fn channel_mut(&mut self, ch: usize) -> &mut [f32] {
        let n = self.frame.num_pixels();
        &mut self.data[ch * n..(ch + 1) * n]
    }

    pub fn get(&self, ch: usize, col: usize, row: usize) -> f32 {
        self.data[ch * self.frame.num_pixels() + self.frame.index(col, row)]
    }

    pub fn set(&mut self, ch: usize, col: usize, row: usize, value: f32) {
        let n = self.frame.num_pixels();
        let i = self.frame.index(col, row);
        self.data[ch * n + i] = value;
    }

    pub fn mask(&self, ch: usize) -> Vec<bool> {
        self.channel(ch).iter().map(|&v| v != 0.0).collect()
    }

    pub fn count_nonzero(&self, ch: usize) -> usize {
        self.channel(ch).iter().filter(|&&v| v != 0.0).count()
    }

    pub(crate) fn raw(&self) -> &[f32] {
        &self.data
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }
}

/// Calls `visit(col, row)` for every pixel whose center lies inside the
/// polygon, using scanline conversion in pixel space.
pub fn scan_polygon(frame: &ImageFrame, polygon: &[Point], mut visit: impl FnMut(usize, usize)) {
    let pts: Vec<[f64; 2]> = polygon.iter().map(|&p| frame.world_to_pixel(p)).collect();
    let n = pts.len();
    if n < 3 {
        return;
    }
    let res = frame.resolution as i64;
    let vmin = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let vmax = pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let r0 = ((vmin - 0.5).ceil() as i64).max(0);
    let r1 = ((vmax - 0.5).floor() as i64).min(res - 1);
    let mut xs: Vec<f64> = Vec::with_capacity(n);
    for row in r0..=r1 {
        let y = row as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            if (a[1] <= y && y < b[1]) || (b[1] <= y && y < a[1]) {
                xs.push(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let c0 = ((pair[0] - 0.5).ceil() as i64).max(0);
            let c1 = ((pair[1] - 0.5).ceil() as i64).min(res);
            for col in c0..c1 {
                visit(col as usize, row as usize);
            }
        }
    }
}

/// Calls `visit` for every pixel whose center lies within `half_width`
/// meters of the segment.
pub fn scan_segment(frame: &ImageFrame, a: Point, b: Point, half_width: f64, mut visit: impl FnMut(usize, usize)) {
    let pa = frame.world_to_pixel(a);
    let pb = frame.world_to_pixel(b);
    let hw = half_width / frame.meters_per_pixel;
    let res = frame.resolution as i64;
    let c0 = ((pa[0].min(pb[0]) - hw - 1.0).floor() as i64).max(0);
    let c1 = ((pa[0].max(pb[0]) + hw + 1.0).ceil() as i64).min(res - 1);
    let r0 = ((pa[1].min(pb[1]) - hw - 1.0).floor() as i64).max(0);
    let r1 = ((pa[1].max(pb[1]) + hw + 1.0).ceil() as i64).min(res - 1);
    for row in r0..=r1 {
        for col in c0..=c1 {
            let p = [col as f64 + 0.5, row as f64 + 0.5];
            if geometry::point_segment_distance(p, pa, pb) <= hw {
                visit(col as usize, row as usize);
            }
        }
    }
}

/// Renders a scene into a fixed-extent raster centered on the floor
/// polygon's centroid.
pub fn render(scene: &Scene, num_categories: usize, cfg: &RasterConfig) -> Result<FloorPlanImage> {
    let center = scene.room.centroid();
    let half = cfg.extent / 2.0;
    let fits = scene
        .room
        .floor_polygon
        .iter()
        .all(|p| (p[0] - center[0]).abs() <= half && (p[1] - center[1]).abs() <= half);
    if !fits {
        return Err(Error::RoomTooLarge { extent: cfg.extent });
    }
    let frame = ImageFrame::new(cfg.resolution, cfg.meters_per_pixel(), center);
    Ok(render_in_frame(scene, num_categories, frame, cfg.wall_thickness))
}

/// Renders a scene into an arbitrary frame without extent checks.
pub fn render_in_frame(scene: &Scene, num_categories: usize, frame: ImageFrame, wall_thickness: f64) -> FloorPlanImage {
    let mut img = FloorPlanImage::zeros(frame, num_categories);
    let room = &scene.room;
    let n = frame.num_pixels();
    let half_width = (wall_thickness / 2.0).max(frame.meters_per_pixel / 2.0);
    {
        let floor = img.channel_mut(FLOOR);
        scan_polygon(&frame, &room.floor_polygon, |c, r| floor[r * frame.resolution + c] = 1.0);
    }
    for [a, b] in room.solid_wall_segments() {
        let wall = img.channel_mut(WALL);
        scan_segment(&frame, a, b, half_width, |c, r| wall[r * frame.resolution + c] = 1.0);
    }
    for ([a, b], _) in room.opening_segments() {
        let opening = img.channel_mut(OPENING);
        scan_segment(&frame, a, b, half_width, |c, r| opening[r * frame.resolution + c] = 1.0);
    }
    let sin_ch = img.sin_channel();
    let cos_ch = img.cos_channel();
    for obj in &scene.objects {
        if obj.category_id >= num_categories {
            continue;
        }
        let cat_ch = CATEGORY_BASE + obj.category_id;
        let (s, c) = obj.theta.sin_cos();
        let data = &mut img.data;
        scan_polygon(&frame, &obj.footprint_polygon(), |col, row| {
            let i = row * frame.resolution + col;
            data[OCCUPANCY * n + i] = 1.0;
            data[cat_ch * n + i] = 1.0;
            data[sin_ch * n + i] = s as f32;
            data[cos_ch * n + i] = c as f32;
        });
    }
    img
}
