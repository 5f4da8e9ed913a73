//! Elastic and lock-step distances between real sequences.
//!
//! Every elastic measure is a dynamic program over the `(p + 1) × (q + 1)`
//! cost grid, evaluated two rows at a time and restricted to a Sakoe-Chiba
//! band. Cell `(i, j)` is admissible iff `|i·q − j·p| ≤ W·q` with
//! `W = max(w, |p − q|)`, which for equal lengths is `|i − j| ≤ w`.
//!
//! DTW, WDTW and ADTW accumulate squared pointwise differences and are not
//! square-rooted. ERP, TWE and MSM accumulate absolute differences.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_WDTW_G: f64 = 0.05;
pub const DEFAULT_ADTW_OMEGA: f64 = 1.0;
pub const DEFAULT_ERP_GAP: f64 = 0.0;
pub const DEFAULT_TWE_NU: f64 = 0.001;
pub const DEFAULT_TWE_LAMBDA: f64 = 1.0;
pub const DEFAULT_MSM_C: f64 = 1.0;

/// Which measure to use, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureKind {
    Euclidean,
    Dtw,
    Wdtw { g: f64 },
    Adtw { omega: f64 },
    Erp { gap: f64 },
    Twe { nu: f64, lambda: f64 },
    Msm { c: f64 },
}

impl MeasureKind {
    pub const NAMES: [&'static str; 7] = ["euclidean", "dtw", "wdtw", "adtw", "erp", "twe", "msm"];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Euclidean => "euclidean",
            Self::Dtw => "dtw",
            Self::Wdtw { .. } => "wdtw",
            Self::Adtw { .. } => "adtw",
            Self::Erp { .. } => "erp",
            Self::Twe { .. } => "twe",
            Self::Msm { .. } => "msm",
        }
    }

    pub fn is_elastic(&self) -> bool {
        !matches!(self, Self::Euclidean)
    }

    /// All seven measures at their default parameters.
    pub fn all_defaults() -> [MeasureKind; 7] {
        Self::NAMES.map(|n| n.parse().expect("known name"))
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    /// Parses a bare measure name into that measure at default parameters.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "euclid" | "ed" => Self::Euclidean,
            "dtw" => Self::Dtw,
            "wdtw" => Self::Wdtw { g: DEFAULT_WDTW_G },
            "adtw" => Self::Adtw {
                omega: DEFAULT_ADTW_OMEGA,
            },
            "erp" => Self::Erp {
                gap: DEFAULT_ERP_GAP,
            },
            "twe" => Self::Twe {
                nu: DEFAULT_TWE_NU,
                lambda: DEFAULT_TWE_LAMBDA,
            },
            "msm" => Self::Msm { c: DEFAULT_MSM_C },
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown distance {other:?}, expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A measure plus an optional band half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceMeasure {
    pub kind: MeasureKind,
    pub window: Option<usize>,
}

impl DistanceMeasure {
    pub fn new(kind: MeasureKind, window: Option<usize>) -> Self {
        Self { kind, window }
    }

    pub fn unbanded(kind: MeasureKind) -> Self {
        Self { kind, window: None }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidConfig(format!(
                "{} parameter {what} = {v} is out of range",
                self.kind
            )))
        };
        match self.kind {
            MeasureKind::Euclidean | MeasureKind::Dtw => Ok(()),
            MeasureKind::Wdtw { g } if !(g.is_finite() && g > 0.0) => bad("g", g),
            MeasureKind::Adtw { omega } if !(omega.is_finite() && omega >= 0.0) => {
                bad("omega", omega)
            }
            MeasureKind::Erp { gap } if !gap.is_finite() => bad("gap", gap),
            MeasureKind::Twe { nu, .. } if !(nu.is_finite() && nu >= 0.0) => bad("nu", nu),
            MeasureKind::Twe { lambda, .. } if !(lambda.is_finite() && lambda >= 0.0) => {
                bad("lambda", lambda)
            }
            MeasureKind::Msm { c } if !(c.is_finite() && c > 0.0) => bad("c", c),
            _ => Ok(()),
        }
    }
}

/// Reusable DP rows. Contents carry no meaning between calls.
#[derive(Debug, Default, Clone)]
pub struct CostMatrixWorkspace {
    prev: Vec<f64>,
    curr: Vec<f64>,
    weights: Vec<f64>,
}

impl CostMatrixWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(len: usize) -> Self {
        Self {
            prev: Vec::with_capacity(len + 1),
            curr: Vec::with_capacity(len + 1),
            weights: Vec::with_capacity(len),
        }
    }
}

/// Counts distance evaluations. Shared across threads.
#[derive(Debug, Default)]
pub struct DistanceCallCounter(AtomicU64);

impl DistanceCallCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    /// Dispatch one distance and record it.
    pub fn measure(
        &self,
        measure: &DistanceMeasure,
        a: &[f64],
        b: &[f64],
        ws: &mut CostMatrixWorkspace,
    ) -> Result<f64> {
        self.add(1);
        dispatch_with(measure, a, b, ws)
    }
}

/// First and last admissible column of row `i`.
#[inline]
fn band_columns(i: usize, p: usize, q: usize, half_width: Option<usize>) -> (usize, usize) {
    match half_width {
        None => (0, q),
        Some(w) => {
            let lo = if i > w { ((i - w) * q).div_ceil(p) } else { 0 };
            let hi = (((i + w) * q) / p).min(q);
            (lo, hi)
        }
    }
}

/// Band-restricted two-row DP. `row0(j)` and `col0(i)` give the boundary
/// values for `j, i ≥ 1`; `D(0, 0) = 0`. `cell(i, j, diag, up, left)`
/// produces `D(i, j)` for `i, j ≥ 1`.
#[inline(always)]
fn banded_dp<R0, C0, F>(
    ws: &mut CostMatrixWorkspace,
    p: usize,
    q: usize,
    window: Option<usize>,
    row0: R0,
    col0: C0,
    mut cell: F,
) -> Result<f64>
where
    R0: Fn(usize) -> f64,
    C0: Fn(usize) -> f64,
    F: FnMut(usize, usize, f64, f64, f64) -> f64,
{
    if p == 0 || q == 0 {
        return Err(Error::EmptySeries);
    }
    let half_width = window.map(|w| w.max(p.abs_diff(q)));
    let CostMatrixWorkspace { prev, curr, .. } = ws;
    prev.clear();
    prev.resize(q + 1, f64::INFINITY);
    curr.clear();
    curr.resize(q + 1, f64::INFINITY);

    let (lo0, hi0) = band_columns(0, p, q, half_width);
    debug_assert_eq!(lo0, 0);
    prev[0] = 0.0;
    for (j, slot) in prev.iter_mut().enumerate().take(hi0 + 1).skip(1) {
        *slot = row0(j);
    }
    // range written into `curr` two rows ago
    let mut stale = (1usize, 0usize);
    let mut prev_range = (lo0, hi0);

    for i in 1..=p {
        if stale.0 <= stale.1 {
            curr[stale.0..=stale.1].fill(f64::INFINITY);
        }
        let (lo, hi) = band_columns(i, p, q, half_width);
        if lo == 0 {
            curr[0] = col0(i);
        }
        let start = lo.max(1);
        if start <= hi {
            let mut left = curr[start - 1];
            for j in start..=hi {
                let v = cell(i, j, prev[j - 1], prev[j], left);
                curr[j] = v;
                left = v;
            }
        }
        std::mem::swap(prev, curr);
        stale = prev_range;
        prev_range = (lo, hi);
    }
    let d = prev[q];
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::BandTooNarrow { p, q })
    }
}

#[inline(always)]
fn min3(a: f64, b: f64, c: f64) -> f64 {
    a.min(b).min(c)
}

#[inline(always)]
fn sq(x: f64) -> f64 {
    x * x
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| sq(x - y)).sum::<f64>().sqrt())
}

pub fn dtw(a: &[f64], b: &[f64], window: Option<usize>) -> Result<f64> {
    dtw_with(a, b, window, &mut CostMatrixWorkspace::new())
}

pub fn dtw_with(
    a: &[f64],
    b: &[f64],
    window: Option<usize>,
    ws: &mut CostMatrixWorkspace,
) -> Result<f64> {
    let inf = |_| f64::INFINITY;
    banded_dp(ws, a.len(), b.len(), window, inf, inf, |i, j, d, u, l| {
        sq(a[i - 1] - b[j - 1]) + min3(d, u, l)
    })
}

/// Logistic weight applied to a cell `delta` steps off the diagonal.
pub fn wdtw_weight(delta: usize, g: f64, len: usize) -> f64 {
    1.0 / (1.0 + (-g * (delta as f64 - len as f64 / 2.0)).exp())
}

pub fn wdtw(a: &[f64], b: &[f64], g: f64, window: Option<usize>) -> Result<f64> {
    wdtw_with(a, b, g, window, &mut CostMatrixWorkspace::new())
}

pub fn wdtw_with(
    a: &[f64],
    b: &[f64],
    g: f64,
    window: Option<usize>,
    ws: &mut CostMatrixWorkspace,
) -> Result<f64> {
    let len = a.len().max(b.len());
    let mut weights = std::mem::take(&mut ws.weights);
    weights.clear();
    weights.extend((0..len).map(|d| wdtw_weight(d, g, len)));
    let inf = |_| f64::INFINITY;
    let out = banded_dp(ws, a.len(), b.len(), window, inf, inf, |i, j, d, u, l| {
        weights[i.abs_diff(j)] * sq(a[i - 1] - b[j - 1]) + min3(d, u, l)
    });
    ws.weights = weights;
    out
}

pub fn adtw(a: &[f64], b: &[f64], omega: f64, window: Option<usize>) -> Result<f64> {
    adtw_with(a, b, omega, window, &mut CostMatrixWorkspace::new())
}

pub fn adtw_with(
    a: &[f64],
    b: &[f64],
    omega: f64,
    window: Option<usize>,
    ws: &mut CostMatrixWorkspace,
) -> Result<f64> {
    let inf = |_| f64::INFINITY;
    banded_dp(ws, a.len(), b.len(), window, inf, inf, |i, j, d, u, l| {
        sq(a[i - 1] - b[j - 1]) + min3(d, u + omega, l + omega)
    })
}

pub fn erp(a: &[f64], b: &[f64], gap: f64, window: Option<usize>) -> Result<f64> {
    erp_with(a, b, gap, window, &mut CostMatrixWorkspace::new())
}

pub fn erp_with(
    a: &[f64],
    b: &[f64],
    gap: f64,
    window: Option<usize>,
    ws: &mut CostMatrixWorkspace,
) -> Result<f64> {
    // boundary values are prefix sums; the band only admits short prefixes,
    // so summing on demand stays O(w) per boundary cell
    let prefix = |s: &[f64], k: usize| s[..k].iter().map(|v| (v - gap).abs()).sum::<f64>();
    banded_dp(
        ws,
        a.len(),
        b.len(),
        window,
        |j| prefix(b, j),
        |i| prefix(a, i),
        |i, j, d, u, l| {
            let (x, y) = (a[i - 1], b[j - 1]);
            min3(d + (x - y).abs(), u + (x - gap).abs(), l + (y - gap).abs())
        },
    )
}

pub fn twe(a: &[f64], b: &[f64], nu: f64, lambda: f64, window: Option<usize>) -> Result<f64> {
    twe_with(a, b, nu, lambda, window, &mut CostMatrixWorkspace::new())
}

pub fn twe_with(
    a: &[f64],
    b: &[f64],
    nu: f64,
    lambda: f64,
    window: Option<usize>,
    ws: &mut CostMatrixWorkspace,
) -> Result<f64> {
    // index 0 of either sequence is an implicit 0.0 sample
    let at = |s: &[f64], k: usize| if k == 0 { 0.0 } else { s[k - 1] };
    let delete = lambda + nu;
    let inf = |_| f64::INFINITY;
    banded_dp(ws, a.len(), b.len(), window, inf, inf, |i, j, d, u, l| {
        let (ai, ap, bj, bp) = (a[i - 1], at(a, i - 1), b[j - 1], at(b, j - 1));
        let matched = d + (ai - bj).abs() + (ap - bp).abs() + 2.0 * nu * i.abs_diff(j) as f64;
        let del_a = u + (ai - ap).abs() + delete;
        let del_b = l + (bj - bp).abs() + delete;
        min3(matched, del_a, del_b)
    })
}

/// Cost of a split or merge that moves `new` next to `prev` while the other
/// sequence sits at `other`.
#[inline(always)]
pub fn msm_split_merge_cost(new: f64, prev: f64, other: f64, c: f64) -> f64 {
    if (prev <= new && new <= other) || (prev >= new && new >= other) {
        c
    } else {
        c + (new - prev).abs().min((new - other).abs())
    }
}

pub fn msm(a: &[f64], b: &[f64], c: f64, window: Option<usize>) -> Result<f64> {
    msm_with(a, b, c, window, &mut CostMatrixWorkspace::new())
}

pub fn msm_with(
    a: &[f64],
    b: &[f64],
    c: f64,
    window: Option<usize>,
    ws: &mut CostMatrixWorkspace,
) -> Result<f64> {
    // With an infinite zero row and column, the recurrence reproduces the
    // usual first-row/first-column initialization; the predecessor index is
    // clamped because its value only matters when the neighbour is finite.
    let inf = |_| f64::INFINITY;
    banded_dp(ws, a.len(), b.len(), window, inf, inf, |i, j, d, u, l| {
        let (ai, bj) = (a[i - 1], b[j - 1]);
        let ap = a[(i - 1).saturating_sub(1)];
        let bp = b[(j - 1).saturating_sub(1)];
        min3(
            d + (ai - bj).abs(),
            u + msm_split_merge_cost(ai, ap, bj, c),
            l + msm_split_merge_cost(bj, bp, ai, c),
        )
    })
}

/// Route to the measure's implementation using its parameters and window.
pub fn dispatch(measure: &DistanceMeasure, a: &[f64], b: &[f64]) -> Result<f64> {
    dispatch_with(measure, a, b, &mut CostMatrixWorkspace::new())
}

pub fn dispatch_with(
    measure: &DistanceMeasure,
    a: &[f64],
    b: &[f64],
    ws: &mut CostMatrixWorkspace,
) -> Result<f64> {
    let w = measure.window;
    match measure.kind {
        MeasureKind::Euclidean => euclidean(a, b),
        MeasureKind::Dtw => dtw_with(a, b, w, ws),
        MeasureKind::Wdtw { g } => wdtw_with(a, b, g, w, ws),
        MeasureKind::Adtw { omega } => adtw_with(a, b, omega, w, ws),
        MeasureKind::Erp { gap } => erp_with(a, b, gap, w, ws),
        MeasureKind::Twe { nu, lambda } => twe_with(a, b, nu, lambda, w, ws),
        MeasureKind::Msm { c } => msm_with(a, b, c, w, ws),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(matches!(
            euclidean(&[0.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn dtw_examples() {
        let a = [0.3, -1.0, 2.5, 4.0];
        for w in [Some(0), Some(1), None] {
            assert_eq!(dtw(&a, &a, w).unwrap(), 0.0);
        }
        assert_eq!(dtw(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0], None).unwrap(), 0.0);
        assert_eq!(dtw(&[0.0], &[3.0], None).unwrap(), 9.0);
        assert!(matches!(dtw(&[], &[1.0], None), Err(Error::EmptySeries)));
    }

    #[test]
    fn wdtw_single_cell() {
        let expected = 4.0 / (1.0 + 0.025f64.exp());
        assert_abs_diff_eq!(wdtw(&[0.0], &[2.0], 0.05, None).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 1.97501, epsilon = 1e-5);
    }

    #[test]
    fn adtw_examples() {
        assert_eq!(adtw(&[1.0, 5.0], &[1.0, 5.0], 3.0, None).unwrap(), 0.0);
        assert_abs_diff_eq!(adtw(&[0.0], &[1.0, 1.0], 0.5, None).unwrap(), 2.5);
    }

    #[test]
    fn erp_examples() {
        assert_eq!(erp(&[1.0, 2.0], &[1.0, 2.0], 0.0, None).unwrap(), 0.0);
        assert_eq!(erp(&[1.0], &[2.0], 0.0, None).unwrap(), 1.0);
        assert_eq!(erp(&[1.0, 2.0], &[2.0], 0.0, None).unwrap(), 1.0);
    }

    #[test]
    fn twe_examples() {
        let a = [0.5, 1.5, -2.0];
        assert_eq!(twe(&a, &a, 0.001, 1.0, None).unwrap(), 0.0);
        assert_eq!(twe(&[0.0], &[1.0], 0.001, 1.0, None).unwrap(), 1.0);
    }

    #[test]
    fn msm_examples() {
        assert_eq!(msm(&[1.0, 3.0, 2.0], &[1.0, 3.0, 2.0], 1.0, None).unwrap(), 0.0);
        assert_eq!(msm(&[1.0], &[2.0], 1.0, None).unwrap(), 1.0);
        assert_eq!(msm(&[1.0, 3.0], &[1.0], 1.0, None).unwrap(), 3.0);
    }

    #[test]
    fn dispatch_examples() {
        let x = [1.0, 4.0, 2.0];
        let e = DistanceMeasure::unbanded(MeasureKind::Euclidean);
        assert_eq!(dispatch(&e, &x, &x).unwrap(), 0.0);
        let m = DistanceMeasure::unbanded("msm".parse().unwrap());
        assert_eq!(dispatch(&m, &[1.0], &[2.0]).unwrap(), 1.0);
        let a = [1.0, 2.0, 0.0, 3.0];
        let b = [2.0, 0.0, 1.0, 3.5];
        let diag: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        let d = DistanceMeasure::new(MeasureKind::Dtw, Some(0));
        assert_eq!(dispatch(&d, &a, &b).unwrap(), diag);
    }

    #[test]
    fn band_columns_equal_lengths() {
        assert_eq!(band_columns(0, 10, 10, Some(2)), (0, 2));
        assert_eq!(band_columns(5, 10, 10, Some(2)), (3, 7));
        assert_eq!(band_columns(10, 10, 10, Some(2)), (8, 10));
        assert_eq!(band_columns(4, 10, 10, None), (0, 10));
    }

    #[test]
    fn unequal_band_reaches_corner() {
        let a: Vec<f64> = (0..7).map(f64::from).collect();
        let b: Vec<f64> = (0..3).map(f64::from).collect();
        for kind in MeasureKind::all_defaults().into_iter().filter(|k| k.is_elastic()) {
            let m = DistanceMeasure::new(kind, Some(0));
            assert!(dispatch(&m, &a, &b).unwrap().is_finite(), "{kind}");
        }
    }

    #[test]
    fn parse_and_validate() {
        assert!("bogus".parse::<MeasureKind>().is_err());
        let bad = DistanceMeasure::unbanded(MeasureKind::Msm { c: 0.0 });
        assert!(bad.validate().is_err());
        let bad = DistanceMeasure::unbanded(MeasureKind::Twe { nu: -1.0, lambda: 1.0 });
        assert!(bad.validate().is_err());
        for k in MeasureKind::all_defaults() {
            DistanceMeasure::unbanded(k).validate().unwrap();
        }
    }

    #[test]
    fn workspace_reuse_matches_fresh() {
        let mut ws = CostMatrixWorkspace::new();
        let a = [0.1, 0.9, -0.4, 2.2, 1.0, 0.0];
        let b = [0.3, 0.2, -1.0, 2.0, 1.5, 0.5];
        let long: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        for kind in MeasureKind::all_defaults() {
            let m = DistanceMeasure::new(kind, Some(2));
            let fresh = dispatch(&m, &a, &b).unwrap();
            dispatch_with(&m, &long, &long, &mut ws).unwrap();
            assert_eq!(dispatch_with(&m, &a, &b, &mut ws).unwrap(), fresh);
        }
    }
}
