//! Prototype-distance features over random convolutional kernels.
//!
//! Each random kernel convolves the training series; a handful of the
//! resulting activations become prototypes, and every series is described by
//! its elastic (or Euclidean) distance to each prototype. A cross-validated
//! ridge classifier is trained on those features.
//!
//! ```no_run
//! use sprocket::{fit_ridge_cv, fit_sprocket, apply_sprocket, RunConfig, DEFAULT_ALPHAS};
//! # fn main() -> sprocket::Result<()> {
//! let train = sprocket::io::parse_ts("GunPoint_TRAIN.ts")?;
//! let test = sprocket::io::parse_ts("GunPoint_TEST.ts")?.relabel_to(train.class_names())?;
//! let fit = fit_sprocket(&train, &RunConfig::default())?;
//! let ridge = fit_ridge_cv(&fit.features, train.labels(), &DEFAULT_ALPHAS)?;
//! let predicted = ridge.predict(&apply_sprocket(&fit.model, &test)?)?;
//! println!("{}", sprocket::accuracy(&predicted, test.labels())?);
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod config;
pub mod data;
pub mod distances;
pub mod error;
pub mod features;
pub mod io;
pub mod kernels;
pub mod pipeline;
pub mod prototypes;
pub mod ridge;
pub mod rng;
pub mod transform;

pub use config::{parse_distance_spec, window_for, DistanceShare, RunConfig, WindowRule};
pub use data::{TimeSeries, TimeSeriesDataset};
pub use distances::{dispatch, DistanceCallCounter, DistanceMeasure, MeasureKind};
pub use error::{Error, Result};
pub use features::{concat_features, ColumnDescriptor, FeatureKind, FeatureMatrix};
pub use kernels::{generate_kernels, rocket_transform, Kernel, KernelSet};
pub use prototypes::{prototype_count, PrototypeSet, SelectionStrategy};
pub use ridge::{accuracy, fit_ridge_cv, predict, RidgeModel, DEFAULT_ALPHAS};
pub use rng::{derive_stream, RandomStream};
pub use transform::{
    apply_sprocket, apply_sprocket_with_stats, fit_sprocket, PrototypeModel, RocketModel,
    SprocketFit, TransformStats,
};
