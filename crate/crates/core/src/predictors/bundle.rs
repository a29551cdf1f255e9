use std::path::Path;

use serde::{Deserialize, Serialize};

use super::category::CategoryModel;
use super::dims::DimensionsModel;
use super::location::LocationModel;
use super::orientation::OrientationModel;
use super::train::TrainConfig;
use crate::corpus::CorpusStats;
use crate::error::{Error, Result};
use crate::formats::{from_document_str, to_document_string};
use crate::raster::RasterConfig;
use crate::scene::CategoryVocabulary;

/// Version tag of the bundle layout; bumped whenever a model's parameter
/// layout changes.
pub const BUNDLE_VERSION: &str = "plansynth-bundle/1";
pub const BUNDLE_KIND: &str = "predictor_bundle";

/// The four trained decision models with the statistics and vocabulary
/// they were trained on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorBundle {
    pub version: String,
    /// Vocabulary annotated with corpus frequencies and mean areas.
    pub vocabulary: CategoryVocabulary,
    pub stats: CorpusStats,
    pub room_types: Vec<String>,
    pub raster: RasterConfig,
    pub train_config: TrainConfig,
    pub category: CategoryModel,
    pub location: LocationModel,
    pub orientation: OrientationModel,
    pub dims: DimensionsModel,
}

impl PredictorBundle {
    pub fn to_json(&self) -> Result<String> {
        to_document_string(BUNDLE_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: PredictorBundle = from_document_str(BUNDLE_KIND, text)?;
        if b.version != BUNDLE_VERSION {
            return Err(Error::InvalidArgument(format!(
                "bundle version {} is not supported (expected {BUNDLE_VERSION})",
                b.version
            )));
        }
        b.check_consistency()?;
        Ok(b)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Loads a bundle and rejects it unless its vocabulary has the same
    /// category names and tiers as `expected`.
    pub fn load_for(path: &Path, expected: &CategoryVocabulary) -> Result<Self> {
        let b = Self::load(path)?;
        let same = b.vocabulary.len() == expected.len()
            && b
                .vocabulary
                .categories()
                .iter()
                .zip(expected.categories())
                .all(|(a, e)| a.name == e.name && a.tier == e.tier);
        if !same {
            return Err(Error::VocabularyMismatch(
                "bundle categories differ from the expected vocabulary".into(),
            ));
        }
        Ok(b)
    }

    fn check_consistency(&self) -> Result<()> {
        let c = self.vocabulary.len();
        let ok = self.stats.num_categories() == c
            && self.category.num_categories == c
            && self.location.num_categories == c
            && self.orientation.per_category.len() == c
            && self.dims.per_category.len() == c;
        if ok {
            Ok(())
        } else {
            Err(Error::VocabularyMismatch(format!(
                "models disagree with the {c}-category vocabulary"
            )))
        }
    }

    /// Object-count cap for a room type: twice the largest count observed
    /// in training, falling back to the largest over all room types.
    pub fn max_objects(&self, room_type: &str) -> usize {
        let seen = self
            .stats
            .max_object_count
            .get(room_type)
            .copied()
            .unwrap_or_else(|| self.stats.overall_max_objects());
        (2 * seen).max(1)
    }
}
