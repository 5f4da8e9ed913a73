//! Run configuration shared by the transform, the CLI and result files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distances::{DistanceMeasure, MeasureKind};
use crate::error::{Error, Result};
use crate::prototypes::SelectionStrategy;

pub const DEFAULT_KERNEL_COUNT: usize = 512;
pub const DEFAULT_PROTOTYPE_LOG_BASE: f64 = 4.0;

/// How the Sakoe-Chiba half-width is derived from the series length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowRule {
    /// `⌊√l⌋`
    #[default]
    Sqrt,
    /// Unconstrained alignment.
    None,
    Fixed(usize),
}

impl WindowRule {
    pub fn window_for(&self, length: usize) -> Option<usize> {
        match *self {
            Self::Sqrt => Some(length.isqrt()),
            Self::None => None,
            Self::Fixed(w) => Some(w),
        }
    }
}

/// Band half-width for a series of length `length` under `rule`.
pub fn window_for(length: usize, rule: WindowRule) -> Option<usize> {
    rule.window_for(length)
}

impl FromStr for WindowRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "sqrt" => Ok(Self::Sqrt),
            "none" | "full" => Ok(Self::None),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|n| n.trim().parse().ok())
                .map(Self::Fixed)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "window rule {s:?} is not sqrt, none or fixed:N"
                    ))
                }),
        }
    }
}

impl fmt::Display for WindowRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sqrt => f.write_str("sqrt"),
            Self::None => f.write_str("none"),
            Self::Fixed(w) => write!(f, "fixed:{w}"),
        }
    }
}

/// A block of consecutive kernels that share one measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceShare {
    pub measure: MeasureKind,
    pub kernels: usize,
}

/// Parse `"msm:300,euclidean:300"`. A bare name takes `total` kernels.
pub fn parse_distance_spec(spec: &str, total: Option<usize>) -> Result<Vec<DistanceShare>> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err(Error::InvalidConfig("empty distance spec".into()));
    }
    parts
        .iter()
        .map(|part| match part.split_once(':') {
            Some((name, count)) => Ok(DistanceShare {
                measure: name.parse()?,
                kernels: count.trim().parse().map_err(|_| {
                    Error::InvalidConfig(format!("bad kernel share in {part:?}"))
                })?,
            }),
            None if parts.len() == 1 => Ok(DistanceShare {
                measure: part.parse()?,
                kernels: total.unwrap_or(DEFAULT_KERNEL_COUNT),
            }),
            None => Err(Error::InvalidConfig(format!(
                "{part:?} needs a kernel share when several measures are given"
            ))),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub kernel_count: usize,
    pub prototype_log_base: f64,
    pub window_rule: WindowRule,
    pub distance_spec: Vec<DistanceShare>,
    pub selection: SelectionStrategy,
    pub seed: u64,
    pub thread_count: usize,
    /// Z-normalize each input channel before convolution.
    #[serde(default)]
    pub normalize_input: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kernel_count: DEFAULT_KERNEL_COUNT,
            prototype_log_base: DEFAULT_PROTOTYPE_LOG_BASE,
            window_rule: WindowRule::Sqrt,
            distance_spec: vec![DistanceShare {
                measure: MeasureKind::Msm { c: 1.0 },
                kernels: DEFAULT_KERNEL_COUNT,
            }],
            selection: SelectionStrategy::UniformRandom,
            seed: 0,
            thread_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            normalize_input: false,
        }
    }
}

impl RunConfig {
    /// Default configuration using one measure for all `kernels`.
    pub fn single(kind: MeasureKind, kernels: usize) -> Self {
        Self {
            kernel_count: kernels,
            distance_spec: vec![DistanceShare {
                measure: kind,
                kernels,
            }],
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.thread_count = threads;
        self
    }

    pub fn with_selection(mut self, selection: SelectionStrategy) -> Self {
        self.selection = selection;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_count == 0 {
            return Err(Error::InvalidConfig("kernel count must be positive".into()));
        }
        if !(self.prototype_log_base.is_finite() && self.prototype_log_base > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "prototype log base {} must exceed 1",
                self.prototype_log_base
            )));
        }
        if self.thread_count == 0 {
            return Err(Error::InvalidConfig("thread count must be positive".into()));
        }
        if self.distance_spec.is_empty() {
            return Err(Error::InvalidConfig("distance spec is empty".into()));
        }
        for share in &self.distance_spec {
            if share.kernels == 0 {
                return Err(Error::InvalidConfig(format!(
                    "{} has a zero kernel share",
                    share.measure
                )));
            }
            DistanceMeasure::unbanded(share.measure).validate()?;
        }
        let total: usize = self.distance_spec.iter().map(|s| s.kernels).sum();
        if total != self.kernel_count {
            return Err(Error::InvalidConfig(format!(
                "kernel shares sum to {total}, expected {}",
                self.kernel_count
            )));
        }
        Ok(())
    }

    /// Measure assigned to each kernel index, banded for series length `l`.
    pub fn kernel_measures(&self, length: usize) -> Vec<DistanceMeasure> {
        let window = self.window_rule.window_for(length);
        self.distance_spec
            .iter()
            .flat_map(|share| {
                let w = if share.measure.is_elastic() { window } else { None };
                std::iter::repeat_n(DistanceMeasure::new(share.measure, w), share.kernels)
            })
            .collect()
    }

    /// Short label such as `msm` or `twe:300+adtw:300+euclidean:600`.
    pub fn distance_label(&self) -> String {
        match self.distance_spec.as_slice() {
            [only] => only.measure.to_string(),
            shares => shares
                .iter()
                .map(|s| format!("{}:{}", s.measure, s.kernels))
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}
