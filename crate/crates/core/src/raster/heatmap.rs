use serde::{Deserialize, Serialize};

use super::image::ImageFrame;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Normalized per-pixel placement distribution for one category.
///
/// `values` sums to one over `valid` pixels and is exactly zero elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub frame: ImageFrame,
    pub category_id: usize,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl Heatmap {
    /// Masks nonnegative `scores` with `valid` and normalizes.
    pub fn from_scores(frame: ImageFrame, category_id: usize, scores: &[f64], valid: Vec<bool>) -> Result<Self> {
        let n = frame.num_pixels();
        if scores.len() != n || valid.len() != n {
            return Err(Error::InvalidArgument(format!(
                "heatmap needs {n} scores and mask entries, got {} and {}",
                scores.len(),
                valid.len()
            )));
        }
        let mut values: Vec<f64> = scores
            .iter()
            .zip(&valid)
            .map(|(&s, &ok)| if ok && s.is_finite() && s > 0.0 { s } else { 0.0 })
            .collect();
        let total: f64 = values.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NoValidLocation { category: category_id });
        }
        values.iter_mut().for_each(|v| *v /= total);
        // a second pass removes the residual rounding drift of the first
        let total: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= total);
        Ok(Self {
            frame,
            category_id,
            values,
            valid,
        })
    }

    pub fn resolution(&self) -> usize {
        self.frame.resolution
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// World point at the center of pixel `index`.
    pub fn pixel_world(&self, index: usize) -> Point {
        let r = self.frame.resolution;
        self.frame.pixel_center_world(index % r, index / r)
    }
}
