use super::engine::DecisionModules;
use crate::error::Result;
use crate::predictors::dims::DimsSample;
use crate::predictors::{decode_orientation, OrientationSample};
use crate::raster::{FloorPlanImage, Heatmap, RasterConfig, FLOOR, OCCUPANCY};
use crate::rng::SeededRng;
use crate::scene::{CategoryVocabulary, Scene};

/// Hand-set decision modules: a constant category distribution, a uniform
/// heatmap over free floor, a fixed angle and fixed dimensions. Used to
/// drive the insertion loop without training.
#[derive(Clone, Debug)]
pub struct FixedModules {
    pub vocabulary: CategoryVocabulary,
    pub raster: RasterConfig,
    /// Over `C + 1` classes, STOP last.
    pub distribution: Vec<f64>,
    pub theta: f64,
    pub dims: [f64; 2],
    pub max_objects: usize,
}

impl FixedModules {
    /// Modules that always answer STOP.
    pub fn always_stop(vocabulary: CategoryVocabulary) -> Self {
        let mut distribution = vec![0.0; vocabulary.len() + 1];
        distribution[vocabulary.len()] = 1.0;
        Self::with_distribution(vocabulary, distribution)
    }

    /// Modules that never answer STOP and pick categories uniformly.
    pub fn never_stop(vocabulary: CategoryVocabulary) -> Self {
        let c = vocabulary.len();
        let mut distribution = vec![1.0 / c as f64; c + 1];
        distribution[c] = 0.0;
        Self::with_distribution(vocabulary, distribution)
    }

    pub fn with_distribution(vocabulary: CategoryVocabulary, distribution: Vec<f64>) -> Self {
        Self {
            vocabulary,
            raster: RasterConfig::default(),
            distribution,
            theta: 0.0,
            dims: [0.5, 0.5],
            max_objects: 10,
        }
    }
}

impl DecisionModules for FixedModules {
    fn vocabulary(&self) -> &CategoryVocabulary {
        &self.vocabulary
    }

    fn raster_config(&self) -> RasterConfig {
        self.raster
    }

    fn supporters(&self, _category_id: usize) -> Vec<usize> {
        Vec::new()
    }

    fn max_objects(&self, _room_type: &str) -> usize {
        self.max_objects
    }

    fn category_distribution(&self, _scene: &Scene) -> Result<Vec<f64>> {
        Ok(self.distribution.clone())
    }

    fn heatmap(&self, img: &FloorPlanImage, category_id: usize) -> Result<Heatmap> {
        let (floor, occ) = (img.channel(FLOOR), img.channel(OCCUPANCY));
        let valid: Vec<bool> = floor.iter().zip(occ).map(|(&f, &o)| f != 0.0 && o == 0.0).collect();
        let scores = vec![1.0; valid.len()];
        Heatmap::from_scores(img.frame, category_id, &scores, valid)
    }

    fn orientation(&self, _local: &FloorPlanImage, _category_id: usize, _rng: &mut SeededRng) -> Result<OrientationSample> {
        Ok(decode_orientation(self.theta.cos(), self.theta.sin(), false))
    }

    fn dimensions(&self, _local: &FloorPlanImage, _category_id: usize, _rng: &mut SeededRng) -> Result<DimsSample> {
        Ok(DimsSample {
            dims: self.dims,
            component: 0,
            draws: 1,
            clamped: false,
        })
    }
}
