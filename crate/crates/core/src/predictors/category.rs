use serde::{Deserialize, Serialize};

use super::features::category_features;
use super::linear::{Dataset, SoftmaxRegression};
use super::optim::LbfgsConfig;
use crate::error::{Error, Result};
use crate::scene::{CategoryVocabulary, Scene};

/// Training pair: bag-of-categories features of a partial scene and the
/// category added next (`C` = STOP).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryExample {
    pub features: Vec<f64>,
    pub label: usize,
}

const MAX_TOTAL: usize = 15;

/// Softmax over the `C` categories plus STOP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryModel {
    pub num_categories: usize,
    pub room_types: Vec<String>,
    pub regression: SoftmaxRegression,
    pub trained: bool,
}

impl CategoryModel {
    pub fn expanded_dim(num_categories: usize, num_room_types: usize) -> usize {
        4 * num_categories + (MAX_TOTAL + 1) + 2 + num_room_types + 1
    }

    pub fn untrained(num_categories: usize, room_types: Vec<String>) -> Self {
        let dim = Self::expanded_dim(num_categories, room_types.len());
        Self {
            num_categories,
            room_types,
            regression: SoftmaxRegression::zeros(num_categories + 1, dim),
            trained: false,
        }
    }

    /// Model with given weights, usable for prediction.
    pub fn from_weights(num_categories: usize, room_types: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::untrained(num_categories, room_types);
        if weights.len() != m.regression.weights.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights, got {}",
                m.regression.weights.len(),
                weights.len()
            )));
        }
        m.regression.weights = weights;
        m.trained = true;
        Ok(m)
    }

    /// Maps raw category features to the scorer's inputs: per-category
    /// count indicators (0, 1, 2, ≥3), a one-hot of the total object count,
    /// scaled floor area, occupied fraction, room type and a bias.
    pub fn expand(&self, raw: &[f64]) -> Vec<f64> {
        let c = self.num_categories;
        let mut x = Vec::with_capacity(self.regression.dim);
        let mut total = 0usize;
        for &count in &raw[..c] {
            let k = (count.max(0.0) as usize).min(3);
            total += count.max(0.0) as usize;
            for j in 0..4 {
                x.push((j == k) as u8 as f64);
            }
        }
        for j in 0..=MAX_TOTAL {
            x.push((j == total.min(MAX_TOTAL)) as u8 as f64);
        }
        x.push(raw[c] / 20.0);
        x.push(raw[c + 1]);
        x.extend_from_slice(&raw[c + 2..]);
        x.push(1.0);
        x
    }

    pub fn predict_from_features(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        Ok(self.regression.probabilities(&self.expand(raw)))
    }

    /// Distribution over the next category; index `C` is STOP.
    pub fn predict(&self, scene: &Scene, vocab: &CategoryVocabulary) -> Result<Vec<f64>> {
        self.predict_from_features(&category_features(scene, vocab, &self.room_types))
    }

    pub fn dataset(&self, examples: &[CategoryExample]) -> Dataset {
        let mut d = Dataset::new(self.regression.dim);
        for e in examples {
            d.push(&self.expand(&e.features), e.label, 1.0);
        }
        d
    }

    /// Fits the softmax weights by L2-regularized maximum likelihood.
    pub fn train(&mut self, data: &Dataset, l2: f64, cfg: &LbfgsConfig) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::EmptyInput("category examples"));
        }
        let r = self.regression.fit(data, l2, cfg);
        self.trained = true;
        Ok(r.history)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Room;

    #[test]
    fn untrained_errors_and_zero_weights_are_uniform() {
        let v = CategoryVocabulary::new(&["a", "b", "c"], &[]);
        let s = Scene::empty(Room::rectangle(3.0, 3.0, "bedroom"));
        let m = CategoryModel::untrained(3, vec!["bedroom".into()]);
        assert!(matches!(m.predict(&s, &v), Err(Error::Untrained)));
        let n = m.regression.weights.len();
        let m = CategoryModel::from_weights(3, vec!["bedroom".into()], vec![0.0; n]).unwrap();
        assert_eq!(m.predict(&s, &v).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn learns_first_object() {
        let v = CategoryVocabulary::new(&["bed", "lamp"], &[]);
        let rooms = vec!["bedroom".to_string()];
        let mut m = CategoryModel::untrained(2, rooms.clone());
        let mut ex = Vec::new();
        let mut s = Scene::empty(Room::rectangle(3.0, 3.0, "bedroom"));
        ex.push(CategoryExample {
            features: category_features(&s, &v, &rooms),
            label: 0,
        });
        s.objects.push(crate::scene::SceneObject {
            id: 0,
            category_id: 0,
            position: [1.5, 1.5],
            base_height: 0.0,
            theta: 0.0,
            dims: [2.0, 1.5],
            height: 0.5,
            model_id: "b".into(),
            parent_id: crate::scene::ParentId::Floor,
        });
        ex.push(CategoryExample {
            features: category_features(&s, &v, &rooms),
            label: 2,
        });
        let data = m.dataset(&ex);
        let hist = m.train(&data, 1e-3, &LbfgsConfig::default()).unwrap();
        assert!(hist.windows(2).all(|w| w[1] <= w[0]));
        let p = m.predict(&Scene::empty(Room::rectangle(3.0, 3.0, "bedroom")), &v).unwrap();
        assert!(p[0] > 0.9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.predict(&s, &v).unwrap()[2] > 0.9);
    }
}
