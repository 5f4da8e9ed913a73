//! Series and labeled datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shortest series length accepted anywhere in the pipeline.
pub const MIN_SERIES_LENGTH: usize = 9;

/// A multichannel series stored channel-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    channels: usize,
    length: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Build from one vector per channel. All channels must share a length
    /// of at least [`MIN_SERIES_LENGTH`] and hold only finite values.
    pub fn new(channels: Vec<Vec<f64>>) -> Result<Self> {
        let m = channels.len();
        if m == 0 {
            return Err(Error::InvalidDataset("series has no channels".into()));
        }
        let length = channels[0].len();
        if channels.iter().any(|c| c.len() != length) {
            return Err(Error::InvalidDataset(
                "channels of one series differ in length".into(),
            ));
        }
        if length < MIN_SERIES_LENGTH {
            return Err(Error::InputTooShort {
                length,
                min: MIN_SERIES_LENGTH,
            });
        }
        let values: Vec<f64> = channels.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("series holds a non-finite value".into()));
        }
        Ok(Self {
            channels: m,
            length,
            values,
        })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(vec![values])
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c * self.length..(c + 1) * self.length]
    }

    /// Z-normalize every channel independently. Constant channels become zero.
    pub fn z_normalized(&self) -> Self {
        let mut values = self.values.clone();
        for chunk in values.chunks_exact_mut(self.length) {
            let n = chunk.len() as f64;
            let mean = chunk.iter().sum::<f64>() / n;
            let var = chunk.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            for v in chunk.iter_mut() {
                *v = if sd > 1e-12 { (*v - mean) / sd } else { 0.0 };
            }
        }
        Self {
            channels: self.channels,
            length: self.length,
            values,
        }
    }
}

/// Equal-length labeled series. Labels are dense indices into `class_names`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesDataset {
    name: String,
    series: Vec<TimeSeries>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl TimeSeriesDataset {
    /// Checks shape uniformity and label range. Use
    /// [`validate_for_training`](Self::validate_for_training) for the stricter
    /// conditions a training set has to meet.
    pub fn new(
        name: impl Into<String>,
        series: Vec<TimeSeries>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        }
        if series.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        let (m, l) = (series[0].channels(), series[0].len());
        if let Some(i) = series.iter().position(|s| s.channels() != m || s.len() != l) {
            return Err(Error::InvalidDataset(format!(
                "series {i} has shape ({}, {}), expected ({m}, {l})",
                series[i].channels(),
                series[i].len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} outside 0..{}",
                class_names.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            series,
            labels,
            class_names,
        })
    }

    /// Re-encode arbitrary label strings to dense indices, ordered by first
    /// appearance unless `class_names` is given.
    pub fn from_raw_labels(
        name: impl Into<String>,
        series: Vec<TimeSeries>,
        raw: &[String],
    ) -> Result<Self> {
        let mut class_names: Vec<String> = Vec::new();
        let labels = raw
            .iter()
            .map(|r| match class_names.iter().position(|c| c == r) {
                Some(i) => i,
                None => {
                    class_names.push(r.clone());
                    class_names.len() - 1
                }
            })
            .collect();
        Self::new(name, series, labels, class_names)
    }

    /// At least two instances and every class represented.
    pub fn validate_for_training(&self) -> Result<()> {
        if self.series.len() < 2 {
            return Err(Error::InvalidDataset(
                "training needs at least two instances".into(),
            ));
        }
        let mut seen = vec![false; self.class_names.len()];
        for &y in &self.labels {
            seen[y] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDataset(format!(
                "class {:?} has no instances",
                self.class_names[c]
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.series[0].channels()
    }

    pub fn series_length(&self) -> usize {
        self.series[0].len()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Express this dataset's labels in `reference`'s class indexing, so test
    /// sets line up with the classes a model was trained on.
    pub fn relabel_to(&self, reference: &[String]) -> Result<Self> {
        let labels = self
            .labels
            .iter()
            .map(|&y| {
                let name = &self.class_names[y];
                reference.iter().position(|r| r == name).ok_or_else(|| {
                    Error::InvalidDataset(format!("class {name:?} unknown to the training set"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            self.name.clone(),
            self.series.clone(),
            labels,
            reference.to_vec(),
        )
    }

    /// Copy with every series z-normalized per channel.
    pub fn z_normalized(&self) -> Self {
        Self {
            name: self.name.clone(),
            series: self.series.iter().map(TimeSeries::z_normalized).collect(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        }
    }
}
