//! Neural shape-parameter prediction.

pub mod cost;
pub mod dataset;
pub mod features;
pub mod io;
pub mod mlp;
pub mod train;

pub use cost::{cost_single, stencil_cond, CondBand};
pub use dataset::Dataset;
pub use features::{DistanceTransform, FeatureMode, FeatureSpec};
pub use io::{load_model, model_from_str, model_to_string, save_model};
pub use mlp::{MlpModel, OutputMap};
pub use train::{train, TrainConfig, TrainTrace};
