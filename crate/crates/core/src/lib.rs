//! Sequential indoor scene synthesis over top-down floor-plan rasters.
//!
//! A scene is grown one object at a time: a category model picks what to
//! add next (or STOP), a location model produces a per-pixel heatmap that
//! is sampled with temperature, and orientation and dimension models decide
//! how the object faces and how large it is, each conditioned on the raster
//! re-centered (and then rotated) into the new object's frame. A catalog
//! lookup turns the predicted box into a concrete model, subject to
//! collision and overhang checks.

pub mod corpus;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod metrics;
pub mod predictors;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{OrientedBox, Point};
pub use predictors::PredictorBundle;
pub use raster::{FloorPlanImage, Heatmap, ImageFrame, RasterConfig};
pub use scene::{Category, CategoryVocabulary, ParentId, Room, Scene, SceneObject, Tier};
pub use synth::{ModelCatalog, ModelEntry, SynthesisConfig, SynthesisTrace};
