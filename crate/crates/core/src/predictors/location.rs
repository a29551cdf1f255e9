use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{PixelFeatureMaps, NUM_ANCHORS, PIXEL_FEATURES};
use super::linear::{loss_and_gradient, Dataset, SoftmaxRegression};
use super::optim::LbfgsConfig;
use crate::corpus::CorpusStats;
use crate::error::{Error, Result};
use crate::raster::{support_mask, FloorPlanImage, Heatmap};
use crate::scene::CategoryVocabulary;

/// Training pair: a partial-scene image, a per-pixel class grid (category
/// ids, or the vocabulary's empty id) and per-pixel loss weights.
#[derive(Clone, Debug, PartialEq)]
pub struct LocationExample {
    pub image: FloorPlanImage,
    pub target: Vec<usize>,
    pub weight: Vec<f64>,
}

const CENTERS: [f64; 8] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];
const WIDTHS: [f64; 8] = [0.15, 0.15, 0.15, 0.15, 0.15, 0.3, 0.3, 0.5];
const DISTANCES: usize = 2 + NUM_ANCHORS;
/// Length of an expanded pixel feature vector.
pub const LOCATION_DIM: usize = DISTANCES * (CENTERS.len() + 1) + 4;

/// Radial-basis expansion of the raw pixel features, so that a linear
/// scorer can prefer particular distances (e.g. "a bed-width from the
/// wall") rather than only nearer or farther.
pub fn expand_pixel(raw: &[f64; PIXEL_FEATURES]) -> [f64; LOCATION_DIM] {
    let mut x = [0.0; LOCATION_DIM];
    let mut k = 0;
    let distance_slots = (0..2).chain(3..3 + NUM_ANCHORS);
    for j in distance_slots {
        let d = raw[j];
        for (c, w) in CENTERS.iter().zip(WIDTHS) {
            let z = (d - c) / w;
            x[k] = (-0.5 * z * z).exp();
            k += 1;
        }
        x[k] = d.min(4.0) / 4.0;
        k += 1;
    }
    let occ = raw[2];
    x[k] = occ;
    x[k + 1] = occ * occ;
    x[k + 2] = raw[PIXEL_FEATURES - 1];
    x[k + 3] = 1.0;
    x
}

/// Per-pixel softmax over the `C` categories plus empty space (class `C`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocationModel {
    pub num_categories: usize,
    /// Categories whose distance maps enter the features, by importance.
    pub anchors: Vec<usize>,
    pub l2: f64,
    pub regression: SoftmaxRegression,
    pub trained: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocationTrainConfig {
    pub l2: f64,
    /// Loss weight of empty-space pixels relative to object pixels.
    pub empty_weight: f64,
    /// Fraction of empty in-room pixels kept as observations; kept pixels
    /// are reweighted by its inverse so the expected loss is unchanged.
    pub empty_keep: f64,
    pub max_iter: usize,
}

impl Default for LocationTrainConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            empty_weight: 0.1,
            empty_keep: 0.1,
            max_iter: 150,
        }
    }
}

impl LocationModel {
    pub fn untrained(vocab: &CategoryVocabulary, l2: f64) -> Self {
        let anchors: Vec<usize> = vocab.by_importance().into_iter().take(NUM_ANCHORS).collect();
        Self {
            num_categories: vocab.len(),
            anchors,
            l2,
            regression: SoftmaxRegression::zeros(vocab.len() + 1, LOCATION_DIM),
            trained: false,
        }
    }

    fn class_of(&self, target: usize) -> usize {
        target.min(self.num_categories)
    }

    /// Converts one example into weighted observations, subsampling empty
    /// pixels with probability `keep`.
    pub fn observations<R: Rng + ?Sized>(&self, ex: &LocationExample, keep: f64, rng: &mut R, out: &mut Dataset) {
        let maps = PixelFeatureMaps::new(&ex.image, &self.anchors);
        let empty = self.num_categories;
        for (i, (&t, &w)) in ex.target.iter().zip(&ex.weight).enumerate() {
            if w == 0.0 {
                continue;
            }
            let class = self.class_of(t);
            let weight = if class == empty {
                if !rng.random_bool(keep) {
                    continue;
                }
                w / keep
            } else {
                w
            };
            out.push(&expand_pixel(&maps.at(i)), class, weight);
        }
    }

    /// Regularized weighted cross-entropy of weights `w` on `data`.
    pub fn loss_and_gradient(&self, w: &[f64], data: &Dataset, grad: &mut [f64]) -> f64 {
        loss_and_gradient(w, self.regression.classes, LOCATION_DIM, data, self.l2, grad)
    }

    pub fn train(&mut self, data: &Dataset, max_iter: usize) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::EmptyInput("location examples"));
        }
        let cfg = LbfgsConfig {
            max_iter,
            ..Default::default()
        };
        let r = self.regression.fit(data, self.l2, &cfg);
        self.trained = true;
        Ok(r.history)
    }

    /// Per-pixel probability of `category_id` over the valid pixels.
    pub fn predict_heatmap(
        &self,
        img: &FloorPlanImage,
        category_id: usize,
        vocab: &CategoryVocabulary,
        stats: &CorpusStats,
    ) -> Result<Heatmap> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        if category_id >= self.num_categories {
            return Err(Error::InvalidArgument(format!("no category {category_id}")));
        }
        let valid = support_mask(img, category_id, vocab, stats);
        let maps = PixelFeatureMaps::new(img, &self.anchors);
        let mut scores = vec![0.0; valid.len()];
        let mut s = vec![0.0; self.regression.classes];
        for (i, ok) in valid.iter().enumerate() {
            if !ok {
                continue;
            }
            self.regression.scores_into(&expand_pixel(&maps.at(i)), &mut s);
            let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = s.iter().map(|v| (v - m).exp()).sum();
            scores[i] = (s[category_id] - m).exp() / z;
        }
        Heatmap::from_scores(img.frame, category_id, &scores, valid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_stats;
    use crate::raster::{render, RasterConfig};
    use crate::rng::seeded;
    use crate::scene::{Room, Scene};

    #[test]
    fn overfits_single_target() {
        let vocab = CategoryVocabulary::new(&["bed"], &[]);
        let img = render(&Scene::empty(Room::rectangle(4.0, 4.0, "bedroom")), 1, &RasterConfig::default()).unwrap();
        let n = img.frame.num_pixels();
        let floor = img.mask(crate::raster::FLOOR);
        // target against the left wall
        let target_px = 32 * 64 + 22;
        assert!(floor[target_px]);
        let target: Vec<usize> = (0..n).map(|i| if i == target_px { 0 } else { vocab.empty_id() }).collect();
        let weight: Vec<f64> = (0..n).map(|i| if !floor[i] { 0.0 } else if i == target_px { 1.0 } else { 0.1 }).collect();
        let ex = LocationExample { image: img.clone(), target, weight };
        let mut m = LocationModel::untrained(&vocab, 1e-6);
        let mut d = Dataset::new(LOCATION_DIM);
        m.observations(&ex, 1.0, &mut seeded(1), &mut d);
        let hist = m.train(&d, 300).unwrap();
        assert!(hist.windows(2).all(|w| w[1] <= w[0]));
        let stats = corpus_stats(&[], &vocab);
        let h = m.predict_heatmap(&img, 0, &vocab, &stats).unwrap();
        let center = 32 * 64 + 32;
        assert!(h.values[target_px] > h.values[center]);
        assert!((h.total() - 1.0).abs() < 1e-9);
    }
}
