//! Dataset readers (`.ts`, CSV), result files, manifests and correctness
//! sidecars.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{TimeSeries, TimeSeriesDataset};
use crate::error::{Error, Result};

fn header_error(line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedHeader {
        line,
        msg: msg.into(),
    }
}

fn parse_value(cell: &str, line: usize, column: usize) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::NonNumericCell {
            line,
            column,
            cell: cell.trim().to_string(),
        })
}

fn parse_bool(value: &str, line: usize) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(header_error(line, format!("expected true or false, found {other:?}"))),
    }
}

/// Parse the text of a `.ts` file. `fallback_name` is used when the file has
/// no `@problemName`.
pub fn parse_ts_str(text: &str, fallback_name: &str) -> Result<TimeSeriesDataset> {
    let mut name = fallback_name.to_string();
    let mut class_names: Option<Vec<String>> = None;
    let mut declared_length: Option<usize> = None;
    let mut declared_univariate: Option<bool> = None;
    let mut in_data = false;
    let mut shape: Option<(usize, usize)> = None;
    let mut series = Vec::new();
    let mut labels = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !in_data {
            let Some(directive) = trimmed.strip_prefix('@') else {
                return Err(header_error(line, "data before @data"));
            };
            let (key, value) = directive
                .split_once(char::is_whitespace)
                .map_or((directive, ""), |(k, v)| (k, v.trim()));
            match key.to_ascii_lowercase().as_str() {
                "problemname" => name = value.to_string(),
                "univariate" => declared_univariate = Some(parse_bool(value, line)?),
                "equallength" => {
                    if !parse_bool(value, line)? {
                        return Err(header_error(line, "unequal-length series are not supported"));
                    }
                }
                "serieslength" => {
                    declared_length = Some(value.parse().map_err(|_| {
                        header_error(line, format!("bad series length {value:?}"))
                    })?)
                }
                "classlabel" => {
                    let mut words = value.split_whitespace();
                    if !parse_bool(words.next().unwrap_or(""), line)? {
                        return Err(header_error(line, "unlabeled data is not supported"));
                    }
                    let names: Vec<String> = words.map(str::to_string).collect();
                    if names.is_empty() {
                        return Err(header_error(line, "@classLabel true lists no classes"));
                    }
                    class_names = Some(names);
                }
                "data" => {
                    if class_names.is_none() {
                        return Err(header_error(line, "@data before @classLabel"));
                    }
                    in_data = true;
                }
                // @timeStamps, @missing, @dimension(s) and anything else
                _ => {}
            }
            continue;
        }

        let classes = class_names.as_ref().expect("checked at @data");
        let mut parts: Vec<&str> = trimmed.split(':').collect();
        let label = parts.pop().unwrap_or("").trim();
        if parts.is_empty() {
            return Err(header_error(line, "record has no class label"));
        }
        let Some(y) = classes.iter().position(|c| c == label) else {
            return Err(Error::UnknownClassLabel {
                line,
                label: label.to_string(),
            });
        };
        let mut channels = Vec::with_capacity(parts.len());
        let mut column = 0;
        for part in &parts {
            let values = part
                .split(',')
                .map(|cell| {
                    column += 1;
                    parse_value(cell, line, column)
                })
                .collect::<Result<Vec<f64>>>()?;
            channels.push(values);
        }
        let m = channels.len();
        let l = channels[0].len();
        let (em, el) = *shape.get_or_insert((m, declared_length.unwrap_or(l)));
        if m != em {
            return Err(Error::RaggedLengths {
                line,
                what: "channels",
                expected: em,
                found: m,
            });
        }
        if let Some(bad) = channels.iter().find(|c| c.len() != el) {
            return Err(Error::RaggedLengths {
                line,
                what: "values",
                expected: el,
                found: bad.len(),
            });
        }
        if declared_univariate == Some(true) && m != 1 {
            return Err(header_error(line, "@univariate true but record has several channels"));
        }
        series.push(TimeSeries::new(channels)?);
        labels.push(y);
    }
    if !in_data {
        return Err(header_error(last_line.max(1), "missing @data"));
    }
    if series.is_empty() {
        return Err(header_error(last_line.max(1), "no records after @data"));
    }
    TimeSeriesDataset::new(name, series, labels, class_names.expect("checked at @data"))
}

/// Parse raw bytes; invalid UTF-8 is replaced rather than rejected.
pub fn parse_ts_bytes(bytes: &[u8], fallback_name: &str) -> Result<TimeSeriesDataset> {
    parse_ts_str(&String::from_utf8_lossy(bytes), fallback_name)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn parse_ts(path: impl AsRef<Path>) -> Result<TimeSeriesDataset> {
    let path = path.as_ref();
    parse_ts_bytes(&std::fs::read(path)?, &file_stem(path))
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelColumn {
    First,
    #[default]
    Last,
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" => Ok(Self::First),
            "last" => Ok(Self::Last),
            other => Err(Error::InvalidConfig(format!("label column {other:?} is not first or last"))),
        }
    }
}

/// Univariate CSV: one series per row, label in the first or last column.
pub fn parse_csv_str(text: &str, layout: LabelColumn, name: &str) -> Result<TimeSeriesDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut series = Vec::new();
    let mut raw_labels = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < 2 {
            return Err(header_error(line, "row needs a label and at least one value"));
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedLengths {
                line,
                what: "cells",
                expected,
                found: record.len(),
            });
        }
        let cells: Vec<&str> = record.iter().collect();
        let (label, values, first_col) = match layout {
            LabelColumn::First => (cells[0], &cells[1..], 2),
            LabelColumn::Last => (cells[cells.len() - 1], &cells[..cells.len() - 1], 1),
        };
        let values = values
            .iter()
            .enumerate()
            .map(|(k, c)| parse_value(c, line, first_col + k))
            .collect::<Result<Vec<_>>>()?;
        series.push(TimeSeries::univariate(values)?);
        raw_labels.push(label.to_string());
    }
    if series.is_empty() {
        return Err(header_error(1, "no rows"));
    }
    TimeSeriesDataset::from_raw_labels(name, series, &raw_labels)
}

pub fn parse_csv(path: impl AsRef<Path>, layout: LabelColumn) -> Result<TimeSeriesDataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    parse_csv_str(&String::from_utf8_lossy(&bytes), layout, &file_stem(path))
}

/// Pick a reader by extension: `.csv` is CSV with a trailing label, anything
/// else is `.ts`.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<TimeSeriesDataset> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
        Some(ext) if ext == "csv" => parse_csv(path, LabelColumn::Last),
        _ => parse_ts(path),
    }
}

/// One (dataset, algorithm, seed) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub dataset: String,
    pub algorithm: String,
    pub seed: u64,
    pub accuracy: f64,
    pub transform_s: f64,
    pub fit_s: f64,
    pub predict_s: f64,
    pub distance_calls: u64,
    pub feature_count: usize,
}

impl ResultRecord {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.accuracy) {
            return Err(Error::InvalidConfig(format!("accuracy {} outside [0, 1]", self.accuracy)));
        }
        for t in [self.transform_s, self.fit_s, self.predict_s] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidConfig(format!("negative or non-finite time {t}")));
            }
        }
        Ok(())
    }
}

pub const RESULT_COLUMNS: [&str; 9] = [
    "dataset",
    "algorithm",
    "seed",
    "accuracy",
    "transform_s",
    "fit_s",
    "predict_s",
    "distance_calls",
    "feature_count",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResultFormat {
    #[default]
    Json,
    Csv,
}

impl ResultFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Json,
        }
    }
}

impl FromStr for ResultFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidConfig(format!("format {other:?} is not json or csv"))),
        }
    }
}

impl fmt::Display for ResultFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

pub fn results_to_string(records: &[ResultRecord], format: ResultFormat) -> Result<String> {
    match format {
        ResultFormat::Json => Ok(serde_json::to_string_pretty(records)?),
        ResultFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record(RESULT_COLUMNS)?;
            for r in records {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
    }
}

pub fn results_from_str(text: &str, format: ResultFormat) -> Result<Vec<ResultRecord>> {
    let records: Vec<ResultRecord> = match format {
        ResultFormat::Json => serde_json::from_str(text)?,
        ResultFormat::Csv => {
            let mut reader = csv::Reader::from_reader(text.as_bytes());
            let headers = reader.headers()?.clone();
            let missing: Vec<&str> = RESULT_COLUMNS
                .iter()
                .copied()
                .filter(|c| !headers.iter().any(|h| h == *c))
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingColumns(missing.join(", ")));
            }
            reader.deserialize().collect::<std::result::Result<_, _>>()?
        }
    };
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

pub fn write_results(records: &[ResultRecord], path: impl AsRef<Path>, format: ResultFormat) -> Result<()> {
    std::fs::write(path, results_to_string(records, format)?)?;
    Ok(())
}

/// Read a results file, choosing the format from its extension.
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    results_from_str(&std::fs::read_to_string(path)?, ResultFormat::from_path(path))
}

/// One dataset of a benchmark suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub train: PathBuf,
    pub test: PathBuf,
    /// Expected number of training instances.
    pub train_size: usize,
    pub length: usize,
    #[serde(default = "one")]
    pub channels: usize,
    pub classes: usize,
}

fn one() -> usize {
    1
}

impl ManifestEntry {
    /// Check a loaded training set against the expected metadata.
    pub fn check(&self, train: &TimeSeriesDataset) -> Result<()> {
        let found = (train.len(), train.series_length(), train.channels(), train.class_count());
        let expected = (self.train_size, self.length, self.channels, self.classes);
        if found != expected {
            return Err(Error::Manifest(format!(
                "{}: expected (n, l, m, classes) = {expected:?}, found {found:?}",
                self.name
            )));
        }
        Ok(())
    }
}

/// JSON list of datasets; relative paths resolve against the manifest's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut manifest: DatasetManifest =
            serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        for e in &mut manifest.entries {
            if e.train_size == 0 || e.length == 0 || e.channels == 0 || e.classes == 0 {
                return Err(Error::Manifest(format!("{}: expected metadata must be positive", e.name)));
            }
            if e.train == e.test {
                return Err(Error::Manifest(format!("{}: train and test paths coincide", e.name)));
            }
            if e.train.is_relative() {
                e.train = base.join(&e.train);
            }
            if e.test.is_relative() {
                e.test = base.join(&e.test);
            }
        }
        let mut names = std::collections::HashSet::new();
        if let Some(dup) = manifest.entries.iter().find(|e| !names.insert(&e.name)) {
            return Err(Error::Manifest(format!("duplicate dataset {:?}", dup.name)));
        }
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Per-instance correctness of one (dataset, algorithm, seed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectnessRow {
    pub dataset: String,
    pub algorithm: String,
    pub seed: u64,
    pub instance: usize,
    pub correct: u8,
}

pub fn correctness_rows(dataset: &str, algorithm: &str, seed: u64, predicted: &[usize], truth: &[usize]) -> Vec<CorrectnessRow> {
    predicted
        .iter()
        .zip(truth)
        .enumerate()
        .map(|(instance, (p, t))| CorrectnessRow {
            dataset: dataset.to_string(),
            algorithm: algorithm.to_string(),
            seed,
            instance,
            correct: u8::from(p == t),
        })
        .collect()
}

pub fn write_correctness(rows: &[CorrectnessRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["dataset", "algorithm", "seed", "instance", "correct"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_correctness(path: impl AsRef<Path>) -> Result<Vec<CorrectnessRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows: Vec<CorrectnessRow> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    if let Some(bad) = rows.iter().find(|r| r.correct > 1) {
        return Err(Error::InvalidConfig(format!("correctness value {} is not 0 or 1", bad.correct)));
    }
    Ok(rows)
}

/// Group correctness rows into 0/1 vectors keyed by (dataset, algorithm, seed),
/// ordered by instance.
pub fn correctness_vectors(rows: &[CorrectnessRow]) -> BTreeMap<(String, String, u64), Vec<bool>> {
    let mut grouped: BTreeMap<(String, String, u64), Vec<(usize, bool)>> = BTreeMap::new();
    for r in rows {
        grouped
            .entry((r.dataset.clone(), r.algorithm.clone(), r.seed))
            .or_default()
            .push((r.instance, r.correct == 1));
    }
    grouped
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|(i, _)| *i);
            (k, v.into_iter().map(|(_, c)| c).collect())
        })
        .collect()
}
