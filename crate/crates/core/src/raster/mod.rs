//! Top-down multi-channel floor-plan rasters and the transforms applied to
//! them during synthesis.

mod distance;
mod heatmap;
mod image;
mod mask;
mod sdf;
mod transform;

pub use distance::distance_transform;
pub use heatmap::Heatmap;
pub use image::{
    render, render_in_frame, scan_polygon, scan_segment, FloorPlanImage, ImageFrame, RasterConfig, CATEGORY_BASE,
    FLOOR, OCCUPANCY, OPENING, WALL,
};
pub use mask::support_mask;
pub use sdf::sdf_box;
pub use transform::{recenter, resample, rotate};
