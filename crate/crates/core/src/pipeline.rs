//! Train/evaluate runs for single transforms and feature-concatenation
//! ensembles.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::config::{DistanceShare, RunConfig};
use crate::data::TimeSeriesDataset;
use crate::distances::MeasureKind;
use crate::error::{Error, Result};
use crate::features::{concat_features, FeatureMatrix};
use crate::io::ResultRecord;
use crate::ridge::{accuracy, fit_ridge_cv, RidgeModel};
use crate::transform::{apply_sprocket, fit_sprocket, RocketModel};

/// One transform inside an algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    /// PPV/max pooling over random kernels.
    Rocket,
    /// Prototype distances; `None` uses the run's distance spec.
    Sprocket(Option<MeasureKind>),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rocket => f.write_str("rocket"),
            Self::Sprocket(None) => f.write_str("sprocket"),
            Self::Sprocket(Some(m)) => write!(f, "sprocket-{m}"),
        }
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "rocket" => Ok(Self::Rocket),
            "sprocket" => Ok(Self::Sprocket(None)),
            _ => match s.strip_prefix("sprocket-") {
                Some(m) => Ok(Self::Sprocket(Some(m.parse()?))),
                None => Err(Error::InvalidConfig(format!(
                    "unknown algorithm part {s:?}, expected rocket, sprocket or sprocket-<distance>"
                ))),
            },
        }
    }
}

/// Components whose features are concatenated under one ridge classifier,
/// written `rocket+sprocket`.
#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm {
    pub parts: Vec<Component>,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s.split('+').map(str::parse).collect::<Result<Vec<_>>>()?;
        if parts.is_empty() {
            return Err(Error::InvalidConfig("empty algorithm name".into()));
        }
        Ok(Self { parts })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        f.write_str(&names.join("+"))
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub record: ResultRecord,
    pub predicted: Vec<usize>,
    pub truth: Vec<usize>,
    pub ridge: RidgeModel,
}

fn component_config(component: Component, base: &RunConfig) -> RunConfig {
    match component {
        Component::Sprocket(Some(kind)) => RunConfig {
            distance_spec: vec![DistanceShare {
                measure: kind,
                kernels: base.kernel_count,
            }],
            ..base.clone()
        },
        _ => base.clone(),
    }
}

struct Transformed {
    train: FeatureMatrix,
    test: FeatureMatrix,
    distance_calls: u64,
}

fn transform_component(
    component: Component,
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    config: &RunConfig,
) -> Result<Transformed> {
    match component {
        Component::Rocket => {
            let model = RocketModel::new(config.kernel_count, train, config.seed, config.thread_count)?;
            Ok(Transformed {
                train: model.apply(train)?,
                test: model.apply(test)?,
                distance_calls: 0,
            })
        }
        Component::Sprocket(_) => {
            let cfg = component_config(component, config);
            let fit = fit_sprocket(train, &cfg)?;
            let test_features = apply_sprocket(&fit.model, test)?;
            // the training transform only, so the count matches predict_distance_calls
            Ok(Transformed {
                train: fit.features,
                test: test_features,
                distance_calls: fit.stats.distance_calls,
            })
        }
    }
}

/// Fit on `train`, score on `test`. Test labels are mapped onto the
/// training classes by name.
pub fn evaluate(
    algorithm: &Algorithm,
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    config: &RunConfig,
    alphas: &[f64],
) -> Result<Evaluation> {
    config.validate()?;
    train.validate_for_training()?;
    let test = test.relabel_to(train.class_names())?;

    let t0 = Instant::now();
    let mut train_parts = Vec::with_capacity(algorithm.parts.len());
    let mut test_parts = Vec::with_capacity(algorithm.parts.len());
    let mut distance_calls = 0;
    for &component in &algorithm.parts {
        let t = transform_component(component, train, &test, config)?;
        train_parts.push(t.train);
        test_parts.push(t.test);
        distance_calls += t.distance_calls;
    }
    let train_x = concat_features(&train_parts.iter().collect::<Vec<_>>())?;
    let test_x = concat_features(&test_parts.iter().collect::<Vec<_>>())?;
    let transform_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let ridge = fit_ridge_cv(&train_x, train.labels(), alphas)?;
    let fit_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let predicted = ridge.predict(&test_x)?;
    let predict_s = t2.elapsed().as_secs_f64();

    let record = ResultRecord {
        dataset: train.name().to_string(),
        algorithm: algorithm.to_string(),
        seed: config.seed,
        accuracy: accuracy(&predicted, test.labels())?,
        transform_s,
        fit_s,
        predict_s,
        distance_calls,
        feature_count: train_x.cols(),
    };
    Ok(Evaluation {
        record,
        predicted,
        truth: test.labels().to_vec(),
        ridge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for name in ["rocket", "sprocket", "sprocket-msm", "rocket+sprocket", "sprocket-dtw+sprocket-euclidean"] {
            assert_eq!(name.parse::<Algorithm>().unwrap().to_string(), name);
        }
        assert!("quant".parse::<Algorithm>().is_err());
        assert!("sprocket-foo".parse::<Algorithm>().is_err());
    }
}
