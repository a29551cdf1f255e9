use serde::{Deserialize, Serialize};

use super::checks::OVERHANG_SUPPORT_FRACTION;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::predictors::DEFAULT_TAU;
use crate::scene::COLLISION_TOLERANCE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Heatmap sampling temperature.
    pub tau: f64,
    /// Object cap; `None` uses twice the largest count seen in training for
    /// the room type.
    pub max_objects: Option<usize>,
    /// Catalog models tried per sampled category.
    pub model_candidates: usize,
    /// Category re-draws after a category's candidates all fail.
    pub category_resamples: usize,
    pub collision_tolerance: f64,
    pub overhang_fraction: f64,
    /// How far, in heatmap pixels, a placement may slide off the sampled
    /// location to clear shallow contacts or settle onto its parent.
    pub contact_slack_pixels: f64,
    pub seed: u64,
    /// Record per-step wall-clock time in the trace. Off by default so that
    /// traces are reproducible byte for byte.
    pub record_timing: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            max_objects: None,
            model_candidates: 10,
            category_resamples: 5,
            collision_tolerance: COLLISION_TOLERANCE,
            overhang_fraction: OVERHANG_SUPPORT_FRACTION,
            contact_slack_pixels: 2.0,
            seed: 0,
            record_timing: false,
        }
    }
}

impl SynthesisConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.contact_slack_pixels >= 0.0 && self.contact_slack_pixels.is_finite()) {
            return Err(Error::InvalidArgument("contact_slack_pixels must be non-negative".into()));
        }
        if self.model_candidates == 0 || self.category_resamples == 0 {
            return Err(Error::InvalidArgument(
                "model_candidates and category_resamples must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Inserted,
    /// STOP was sampled.
    Stop,
    /// Every category attempt failed; the loop ends.
    Failed,
    /// The object cap was reached.
    Cap,
}

/// One category attempt inside a step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub category_id: usize,
    pub pixel: Option<usize>,
    /// Heatmap probability of the sampled pixel before tempering.
    pub pixel_probability: Option<f64>,
    pub location: Option<Point>,
    pub theta: Option<f64>,
    pub snapped: Option<bool>,
    pub dims: Option<[f64; 2]>,
    pub dims_draws: Option<usize>,
    pub models_tried: usize,
    /// Why the attempt failed; `None` for the successful one.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Category distribution over `C + 1` classes (last = STOP).
    pub category_distribution: Vec<f64>,
    pub attempts: Vec<Attempt>,
    pub outcome: StepOutcome,
    pub object_id: Option<u32>,
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_secs: Option<f64>,
}

impl TraceStep {
    /// Category attempts after the first.
    pub fn category_resamples(&self) -> usize {
        self.attempts.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthesisTrace {
    pub seed: u64,
    pub max_objects: usize,
    pub steps: Vec<TraceStep>,
}

impl SynthesisTrace {
    pub fn inserted(&self) -> usize {
        self.steps.iter().filter(|s| s.outcome == StepOutcome::Inserted).count()
    }

    pub fn final_outcome(&self) -> Option<StepOutcome> {
        self.steps.last().map(|s| s.outcome)
    }
}
