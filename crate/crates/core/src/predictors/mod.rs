//! The four decision models (category, location, orientation, dimensions)
//! and the machinery to train and persist them.

pub mod bundle;
pub mod category;
pub mod dims;
pub mod features;
pub mod linear;
pub mod location;
pub mod optim;
pub mod orientation;
pub mod sampling;
pub mod train;

pub use bundle::{PredictorBundle, BUNDLE_VERSION};
pub use category::{CategoryExample, CategoryModel};
pub use dims::{clearance, DimensionsModel, DimsSample, Gmm2};
pub use features::{category_features, pixel_features, PixelFeatureMaps};
pub use location::{LocationExample, LocationModel, LocationTrainConfig};
pub use orientation::{
    decode_orientation, is_snapped, snap_cardinal, EmConfig, OrientationModel, OrientationSample, WrappedMixture,
};
pub use sampling::{temper_sample, tempered_probabilities, DEFAULT_TAU};
pub use train::{train_bundle, TrainConfig, TrainReport};
