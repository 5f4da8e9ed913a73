//! The prototype-distance transform.
//!
//! For every random kernel the training set is convolved, `⌈log_b n⌉`
//! training activations are kept as prototypes, and each series is described
//! by its distances to those prototypes. Multichannel series are convolved
//! channel by channel with the same kernel; one feature is the sum of the
//! per-channel distances, and each channel counts as one distance call.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::{TimeSeries, TimeSeriesDataset};
use crate::distances::{CostMatrixWorkspace, DistanceCallCounter, DistanceMeasure};
use crate::error::{Error, Result};
use crate::features::{ColumnDescriptor, FeatureKind, FeatureMatrix};
use crate::kernels::{generate_kernels, rocket_transform, Kernel, KernelSet};
use crate::prototypes::{
    kmeanspp_init_by, prototype_count, select_stratified, select_uniform, Activation,
    PrototypeSet, SelectionStrategy,
};
use crate::rng::RandomStream;

pub use crate::config::{window_for, WindowRule};
pub use crate::features::concat_features;

const MODEL_FORMAT: &str = "sprocket-prototype-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeModel {
    pub config: RunConfig,
    pub kernels: KernelSet,
    pub prototypes: Vec<PrototypeSet>,
    pub measures: Vec<DistanceMeasure>,
    pub input_length: usize,
    pub channels: usize,
}

/// Counters and per-phase timings of one fit or apply. Phase times are
/// summed over kernels, so on several threads they exceed the wall time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformStats {
    /// Distance evaluations that produced features.
    pub distance_calls: u64,
    /// Distance evaluations spent choosing prototypes.
    pub selection_calls: u64,
    pub convolution_s: f64,
    pub selection_s: f64,
    pub distance_s: f64,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct SprocketFit {
    pub model: PrototypeModel,
    pub features: FeatureMatrix,
    pub stats: TransformStats,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: PrototypeModel,
}

impl PrototypeModel {
    pub fn feature_count(&self) -> usize {
        self.prototypes.iter().map(PrototypeSet::len).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::ShapeMismatch(format!(
                "not a prototype model file: {:?}",
                file.format
            )));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::UnsupportedVersion(file.version));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn columns(&self) -> Vec<ColumnDescriptor> {
        self.prototypes
            .iter()
            .enumerate()
            .flat_map(|(k, set)| {
                (0..set.len()).map(move |p| ColumnDescriptor {
                    source: "sprocket".into(),
                    kernel: k,
                    feature: FeatureKind::Prototype(p),
                })
            })
            .collect()
    }
}

pub(crate) fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

fn prepare(data: &TimeSeriesDataset, normalize: bool) -> std::borrow::Cow<'_, TimeSeriesDataset> {
    if normalize {
        std::borrow::Cow::Owned(data.z_normalized())
    } else {
        std::borrow::Cow::Borrowed(data)
    }
}

fn activation(kernel: &Kernel, series: &TimeSeries) -> Result<Activation> {
    (0..series.channels())
        .map(|c| kernel.convolve(series.channel(c)))
        .collect()
}

/// Sum of per-channel distances from a prototype to an activation.
fn activation_distance(
    measure: &DistanceMeasure,
    prototype: &Activation,
    target: &Activation,
    ws: &mut CostMatrixWorkspace,
    counter: &DistanceCallCounter,
) -> Result<f64> {
    let mut total = 0.0;
    for (p, t) in prototype.iter().zip(target) {
        total += counter.measure(measure, p, t, ws)?;
    }
    Ok(total)
}

/// Distances of every activation to every prototype, one column per
/// prototype, laid out column after column.
fn distance_block(
    measure: &DistanceMeasure,
    prototypes: &PrototypeSet,
    activations: &[Activation],
    ws: &mut CostMatrixWorkspace,
    counter: &DistanceCallCounter,
) -> Result<Vec<f64>> {
    let mut block = Vec::with_capacity(prototypes.len() * activations.len());
    for proto in &prototypes.activations {
        for act in activations {
            block.push(activation_distance(measure, proto, act, ws, counter)?);
        }
    }
    Ok(block)
}

struct KernelFit {
    block: Vec<f64>,
    prototypes: PrototypeSet,
    convolution_s: f64,
    selection_s: f64,
    distance_s: f64,
}

#[allow(clippy::too_many_arguments)]
fn fit_kernel(
    index: usize,
    kernel: &Kernel,
    measure: &DistanceMeasure,
    train: &TimeSeriesDataset,
    count: usize,
    selection: SelectionStrategy,
    master: &RandomStream,
    feature_calls: &DistanceCallCounter,
    selection_calls: &DistanceCallCounter,
) -> Result<KernelFit> {
    let mut ws = CostMatrixWorkspace::new();
    let t0 = Instant::now();
    let activations = train
        .series()
        .iter()
        .map(|s| activation(kernel, s))
        .collect::<Result<Vec<_>>>()?;
    let t1 = Instant::now();
    let stream = master.derive("proto", index as u64);
    let chosen = match selection {
        SelectionStrategy::UniformRandom => select_uniform(train.len(), count, &stream)?,
        SelectionStrategy::Stratified => select_stratified(train.labels(), count, &stream)?,
        SelectionStrategy::KmeansppInit => kmeanspp_init_by(train.len(), count, &stream, |x, c| {
            activation_distance(measure, &activations[c], &activations[x], &mut ws, selection_calls)
        })?,
    };
    let prototypes = PrototypeSet {
        activations: chosen.iter().map(|&i| activations[i].clone()).collect(),
        source_indices: chosen,
    };
    let t2 = Instant::now();
    let block = distance_block(measure, &prototypes, &activations, &mut ws, feature_calls)?;
    let t3 = Instant::now();
    Ok(KernelFit {
        block,
        prototypes,
        convolution_s: (t1 - t0).as_secs_f64(),
        selection_s: (t2 - t1).as_secs_f64(),
        distance_s: (t3 - t2).as_secs_f64(),
    })
}

/// Fit prototypes on `train` and return the training feature matrix.
pub fn fit_sprocket(train: &TimeSeriesDataset, config: &RunConfig) -> Result<SprocketFit> {
    config.validate()?;
    train.validate_for_training()?;
    let start = Instant::now();
    let data = prepare(train, config.normalize_input);
    let (n, length, channels) = (data.len(), data.series_length(), data.channels());
    let count = prototype_count(n, config.prototype_log_base);
    if count > n {
        return Err(Error::TooFewInstances {
            requested: count,
            available: n,
        });
    }
    let master = RandomStream::new(config.seed);
    let kernels = generate_kernels(config.kernel_count, length, channels, &master)?;
    let measures = config.kernel_measures(length);
    let feature_calls = DistanceCallCounter::new();
    let selection_calls = DistanceCallCounter::new();

    let fits = thread_pool(config.thread_count)?.install(|| {
        kernels
            .kernels
            .par_iter()
            .zip(measures.par_iter())
            .enumerate()
            .map(|(i, (kernel, measure))| {
                fit_kernel(
                    i,
                    kernel,
                    measure,
                    &data,
                    count,
                    config.selection,
                    &master,
                    &feature_calls,
                    &selection_calls,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut stats = TransformStats::default();
    let mut blocks = Vec::with_capacity(fits.len());
    let mut prototypes = Vec::with_capacity(fits.len());
    for fit in fits {
        stats.convolution_s += fit.convolution_s;
        stats.selection_s += fit.selection_s;
        stats.distance_s += fit.distance_s;
        blocks.push(fit.block);
        prototypes.push(fit.prototypes);
    }
    let model = PrototypeModel {
        config: config.clone(),
        kernels,
        prototypes,
        measures,
        input_length: length,
        channels,
    };
    let features = FeatureMatrix::from_column_blocks(n, blocks, model.columns());
    stats.distance_calls = feature_calls.get();
    stats.selection_calls = selection_calls.get();
    stats.wall_s = start.elapsed().as_secs_f64();
    Ok(SprocketFit {
        model,
        features,
        stats,
    })
}

/// Distance features of `data` against a fitted model.
pub fn apply_sprocket(model: &PrototypeModel, data: &TimeSeriesDataset) -> Result<FeatureMatrix> {
    apply_sprocket_with_stats(model, data).map(|(f, _)| f)
}

pub fn apply_sprocket_with_stats(
    model: &PrototypeModel,
    data: &TimeSeriesDataset,
) -> Result<(FeatureMatrix, TransformStats)> {
    if data.series_length() != model.input_length || data.channels() != model.channels {
        return Err(Error::ShapeMismatch(format!(
            "model expects ({}, {}) series, data has ({}, {})",
            model.channels,
            model.input_length,
            data.channels(),
            data.series_length()
        )));
    }
    let start = Instant::now();
    let data = prepare(data, model.config.normalize_input);
    let counter = DistanceCallCounter::new();
    let results = thread_pool(model.config.thread_count)?.install(|| {
        model
            .kernels
            .kernels
            .par_iter()
            .zip(model.measures.par_iter())
            .zip(model.prototypes.par_iter())
            .map(|((kernel, measure), protos)| {
                let mut ws = CostMatrixWorkspace::new();
                let t0 = Instant::now();
                let activations = data
                    .series()
                    .iter()
                    .map(|s| activation(kernel, s))
                    .collect::<Result<Vec<_>>>()?;
                let t1 = Instant::now();
                let block = distance_block(measure, protos, &activations, &mut ws, &counter)?;
                Ok((block, (t1 - t0).as_secs_f64(), t1.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut stats = TransformStats::default();
    let mut blocks = Vec::with_capacity(results.len());
    for (block, conv, dist) in results {
        stats.convolution_s += conv;
        stats.distance_s += dist;
        blocks.push(block);
    }
    let features = FeatureMatrix::from_column_blocks(data.len(), blocks, model.columns());
    stats.distance_calls = counter.get();
    stats.wall_s = start.elapsed().as_secs_f64();
    Ok((features, stats))
}

/// Pooled-feature baseline with its own kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocketModel {
    pub kernels: KernelSet,
    pub thread_count: usize,
}

impl RocketModel {
    /// Kernels draw from `seed`'s `("rocket", 0)` substream, so they differ
    /// from the prototype transform's kernels under the same seed.
    pub fn new(kernel_count: usize, train: &TimeSeriesDataset, seed: u64, thread_count: usize) -> Result<Self> {
        let stream = RandomStream::new(seed).derive("rocket", 0);
        Ok(Self {
            kernels: generate_kernels(kernel_count, train.series_length(), train.channels(), &stream)?,
            thread_count: thread_count.max(1),
        })
    }

    pub fn apply(&self, data: &TimeSeriesDataset) -> Result<FeatureMatrix> {
        if data.series_length() != self.kernels.input_length {
            return Err(Error::ShapeMismatch(format!(
                "kernels built for length {}, data has {}",
                self.kernels.input_length,
                data.series_length()
            )));
        }
        thread_pool(self.thread_count)?.install(|| rocket_transform(data, &self.kernels))
    }
}
