//! Evaluation harness: category KL, scene similarity, a feature-based
//! real-vs-synthetic classifier with perturbation baselines, and timing.

mod bench;
mod classifier;
mod kl;
mod perturb;
mod similarity;

use serde::{Deserialize, Serialize};

pub use bench::{bench_synthesis, BenchReport};
pub use classifier::{
    feature_classifier_eval, mean_nearest_neighbor_distance, occupied_floor_area, scene_features, ClassifierReport,
    AREA_GRID, CV_FOLDS,
};
pub use kl::{
    category_counts, category_distribution, category_kl, distribution_kl, kl_divergence, reference_distribution,
    uniform_baseline_kl, uniform_distribution, CategoryDistribution, DistributionSource, KL_SMOOTHING,
};
pub use perturb::perturb_scenes;
pub use similarity::{
    category_overlap, geometric_overlap, histogram, max_similarity_profile, scene_similarity, SimilarityProfile,
    HISTOGRAM_BINS, SIMILARITY_SIGMA,
};

/// Collected evaluation results; absent entries were not computed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_kl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifier_accuracy: Option<f64>,
    /// Accuracy against perturbed copies of the real scenes, keyed by the
    /// perturbation fraction.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbed_accuracy: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_synthesis_seconds: Option<f64>,
}

impl EvalReport {
    pub fn is_finite(&self) -> bool {
        let scalars = [self.kl, self.uniform_kl, self.classifier_accuracy, self.mean_synthesis_seconds];
        scalars.iter().flatten().all(|v| v.is_finite())
            && self.perturbed_accuracy.iter().all(|(a, b)| a.is_finite() && b.is_finite())
            && self
                .similarity
                .as_ref()
                .is_none_or(|p| p.maxima.iter().all(|v| v.is_finite()))
    }
}
