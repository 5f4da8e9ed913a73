//! Experiment statistics: classifier diversity, average ranks, the sign
//! test, and the distance-call and cost predictors.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distances::MeasureKind;
use crate::error::{Error, Result};
use crate::prototypes::prototype_count;

/// Agreement statistics between two classifiers' per-instance correctness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseStats {
    /// Pearson correlation of the 0/1 vectors; absent if either is constant.
    pub correlation: Option<f64>,
    /// Yule's Q; absent when `N11·N00 + N01·N10 = 0`.
    pub q_statistic: Option<f64>,
    pub disagreement: f64,
    pub double_fault: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Contingency {
    pub both: u64,
    pub neither: u64,
    pub only_a: u64,
    pub only_b: u64,
}

impl Contingency {
    pub fn from_vectors(a: &[bool], b: &[bool]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let mut t = Self::default();
        for (&x, &y) in a.iter().zip(b) {
            match (x, y) {
                (true, true) => t.both += 1,
                (false, false) => t.neither += 1,
                (true, false) => t.only_a += 1,
                (false, true) => t.only_b += 1,
            }
        }
        Ok(t)
    }

    pub fn total(&self) -> u64 {
        self.both + self.neither + self.only_a + self.only_b
    }

    pub fn stats(&self) -> PairwiseStats {
        let (n11, n00, n10, n01) = (
            self.both as f64,
            self.neither as f64,
            self.only_a as f64,
            self.only_b as f64,
        );
        let n = n11 + n00 + n10 + n01;
        let q_den = n11 * n00 + n01 * n10;
        let q_statistic = (q_den > 0.0).then(|| (n11 * n00 - n01 * n10) / q_den);
        let corr_den = ((n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00)).sqrt();
        let correlation = (corr_den > 0.0).then(|| (n11 * n00 - n10 * n01) / corr_den);
        PairwiseStats {
            correlation,
            q_statistic,
            disagreement: (n01 + n10) / n,
            double_fault: n00 / n,
        }
    }
}

pub fn pairwise_stats(a: &[bool], b: &[bool]) -> Result<PairwiseStats> {
    if a.is_empty() {
        return Err(Error::EmptyTable);
    }
    Ok(Contingency::from_vectors(a, b)?.stats())
}

/// Mean ranks per algorithm and how often each finished first (ties count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub mean_ranks: Vec<f64>,
    pub best_counts: Vec<usize>,
}

/// Rank algorithms (rows) within each dataset (column), 1 = most accurate,
/// tied entries sharing the mean of their ranks, then average per algorithm.
pub fn average_ranks(table: &[Vec<f64>]) -> Result<RankSummary> {
    let algorithms = table.len();
    let datasets = table.first().map_or(0, Vec::len);
    if algorithms < 2 || datasets == 0 {
        return Err(Error::EmptyTable);
    }
    if table.iter().any(|row| row.len() != datasets) {
        return Err(Error::ShapeMismatch("ragged accuracy table".into()));
    }
    let mut sums = vec![0.0; algorithms];
    let mut best_counts = vec![0; algorithms];
    for d in 0..datasets {
        let column: Vec<f64> = table.iter().map(|row| row[d]).collect();
        for (a, rank) in rank_descending(&column).into_iter().enumerate() {
            sums[a] += rank;
        }
        let top = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (a, &v) in column.iter().enumerate() {
            if v == top {
                best_counts[a] += 1;
            }
        }
    }
    Ok(RankSummary {
        mean_ranks: sums.into_iter().map(|s| s / datasets as f64).collect(),
        best_counts,
    })
}

/// Ranks with 1 for the largest value and averaged ranks for ties.
pub fn rank_descending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// One-sided sign test: `P(X ≥ wins)` for `X ~ Binomial(wins + losses, ½)`.
/// Ties must be removed beforehand.
pub fn sign_test(wins: u64, losses: u64) -> f64 {
    let n = (wins + losses) as usize;
    if n == 0 {
        return 1.0;
    }
    let lf = ln_factorials(n);
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let terms: Vec<f64> = (wins as usize..=n)
        .map(|i| lf[n] - lf[i] - lf[n - i] - ln_half_n)
        .collect();
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
    (peak + sum.ln()).exp().min(1.0)
}

/// `k · n · ⌈log_b n⌉ · m`: distance calls of one fit.
pub fn predict_distance_calls(kernels: u64, n: u64, base: f64, channels: u64) -> u64 {
    kernels * n * prototype_count(n as usize, base) as u64 * channels
}

/// The same count with the real-valued logarithm.
pub fn predict_distance_calls_real(kernels: u64, n: u64, base: f64, channels: u64) -> f64 {
    kernels as f64 * n as f64 * (n as f64).ln() / base.ln() * channels as f64
}

/// Relative cost of the distance phase: calls times `l·w` for elastic
/// measures, times `l` for Euclidean.
pub fn predict_transform_cost(
    kernels: u64,
    n: u64,
    base: f64,
    channels: u64,
    length: u64,
    window: u64,
    measure: &MeasureKind,
) -> f64 {
    let calls = predict_distance_calls(kernels, n, base, channels) as f64;
    let per_call = if measure.is_elastic() {
        length as f64 * window as f64
    } else {
        length as f64
    };
    calls * per_call
}

/// Converts relative cost units to seconds using one measured run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCalibration {
    pub seconds_per_unit: f64,
}

impl CostCalibration {
    pub fn from_measurement(predicted_units: f64, observed_seconds: f64) -> Result<Self> {
        if !(predicted_units > 0.0 && observed_seconds.is_finite() && observed_seconds >= 0.0) {
            return Err(Error::InvalidConfig(
                "calibration needs a positive prediction and a finite time".into(),
            ));
        }
        Ok(Self {
            seconds_per_unit: observed_seconds / predicted_units,
        })
    }

    pub fn seconds(&self, units: f64) -> f64 {
        units * self.seconds_per_unit
    }
}

/// Symmetric grid of one statistic over named correctness vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatGrid {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Correlation,
    QStatistic,
    Disagreement,
    DoubleFault,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Self::Correlation,
        Self::QStatistic,
        Self::Disagreement,
        Self::DoubleFault,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Correlation => "correlation",
            Self::QStatistic => "q_statistic",
            Self::Disagreement => "disagreement",
            Self::DoubleFault => "double_fault",
        }
    }

    pub fn pick(&self, s: &PairwiseStats) -> Option<f64> {
        match self {
            Self::Correlation => s.correlation,
            Self::QStatistic => s.q_statistic,
            Self::Disagreement => Some(s.disagreement),
            Self::DoubleFault => Some(s.double_fault),
        }
    }
}

/// Pairwise statistics over correctness vectors concatenated across datasets.
pub fn pooled_grid(names: &[String], vectors: &[Vec<bool>], stat: Statistic) -> Result<StatGrid> {
    let k = names.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            values[i][j] = stat.pick(&pairwise_stats(&vectors[i], &vectors[j])?);
        }
    }
    Ok(StatGrid {
        names: names.to_vec(),
        values,
    })
}

/// Pairwise statistics computed per dataset and averaged over the datasets
/// where the statistic is defined. `per_dataset[d][a]` is algorithm `a`'s
/// correctness on dataset `d`.
pub fn averaged_grid(names: &[String], per_dataset: &[Vec<Vec<bool>>], stat: Statistic) -> Result<StatGrid> {
    let k = names.len();
    let mut sums = vec![vec![0.0; k]; k];
    let mut counts = vec![vec![0usize; k]; k];
    for vectors in per_dataset {
        for i in 0..k {
            for j in 0..k {
                if let Some(v) = stat.pick(&pairwise_stats(&vectors[i], &vectors[j])?) {
                    sums[i][j] += v;
                    counts[i][j] += 1;
                }
            }
        }
    }
    let values = sums
        .into_iter()
        .zip(counts)
        .map(|(row, cnt)| {
            row.into_iter()
                .zip(cnt)
                .map(|(s, c)| (c > 0).then(|| s / c as f64))
                .collect()
        })
        .collect();
    Ok(StatGrid {
        names: names.to_vec(),
        values,
    })
}

impl StatGrid {
    /// CSV with a leading `algorithm` column; undefined cells are empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["algorithm".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.names.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rank table CSV: `algorithm,mean_rank,best_count`.
pub fn write_rank_table<W: Write>(names: &[String], summary: &RankSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "mean_rank", "best_count"])?;
    for ((name, rank), best) in names.iter().zip(&summary.mean_ranks).zip(&summary.best_counts) {
        w.write_record([name.clone(), rank.to_string(), best.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
