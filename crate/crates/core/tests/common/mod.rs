#![allow(dead_code)]

pub mod oracle;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sprocket::{ColumnDescriptor, FeatureKind, FeatureMatrix, TimeSeries, TimeSeriesDataset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-3.0..3.0)).collect()
}

/// Random-walk dataset with `n` series, alternating labels over `classes`.
pub fn random_walks(seed: u64, n: usize, length: usize, channels: usize, classes: usize) -> TimeSeriesDataset {
    let mut rng = rng(seed);
    let series = (0..n)
        .map(|i| {
            let drift = (i % classes) as f64 * 0.05;
            let chans = (0..channels)
                .map(|_| {
                    let mut x = 0.0;
                    (0..length)
                        .map(|_| {
                            x += drift + rng.sample::<f64, _>(StandardNormal);
                            x
                        })
                        .collect()
                })
                .collect();
            TimeSeries::new(chans).unwrap()
        })
        .collect();
    let labels = (0..n).map(|i| i % classes).collect();
    let names = (0..classes).map(|c| format!("c{c}")).collect();
    TimeSeriesDataset::new(format!("walk{seed}"), series, labels, names).unwrap()
}

fn burst(length: usize, center: f64, width: f64, freq: f64, warp: f64) -> Vec<f64> {
    (0..length)
        .map(|t| {
            let t = t as f64;
            let envelope = (-((t - center) / width).powi(2)).exp();
            // warp bends the phase so the oscillation speeds up along the burst
            let phase = freq * (t - center) + warp * (t - center).powi(2);
            envelope * phase.sin()
        })
        .collect()
}

fn smooth(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|t| {
            let lo = t.saturating_sub(2);
            let hi = (t + 3).min(x.len());
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Two classes: smoothed sine bursts early in the series (class `a`), and
/// later, time-warped bursts with extra noise (class `b`).
pub fn burst_dataset(seed: u64, per_class: usize, length: usize) -> TimeSeriesDataset {
    let mut rng = rng(seed);
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for i in 0..2 * per_class {
        let class = i % 2;
        let values = if class == 0 {
            let center = 0.3 * length as f64 + rng.random_range(-4.0..4.0);
            let clean = burst(length, center, 10.0, 0.6, 0.0);
            let noisy: Vec<f64> = clean
                .iter()
                .map(|v| v + 0.1 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            smooth(&noisy)
        } else {
            let center = 0.65 * length as f64 + rng.random_range(-6.0..6.0);
            let warp = rng.random_range(0.004..0.012);
            let clean = burst(length, center, 12.0, 0.45, warp);
            clean
                .iter()
                .map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        series.push(TimeSeries::univariate(values).unwrap());
        labels.push(class);
    }
    TimeSeriesDataset::new("bursts", series, labels, vec!["a".into(), "b".into()]).unwrap()
}

pub fn feature_matrix(rows: usize, cols: usize, values: Vec<f64>) -> FeatureMatrix {
    let columns = (0..cols)
        .map(|k| ColumnDescriptor {
            source: "test".into(),
            kernel: k,
            feature: FeatureKind::Max,
        })
        .collect();
    FeatureMatrix::new(rows, values, columns).unwrap()
}

/// Leave-one-out mean squared residual by refitting ridge with an
/// unpenalized intercept on every `n − 1` subset through the normal
/// equations.
pub fn explicit_loo_error(z: &DMatrix<f64>, targets: &DMatrix<f64>, alpha: f64) -> f64 {
    let (n, p) = z.shape();
    let t = targets.ncols();
    let mut total = 0.0;
    for held in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&r| r != held).collect();
        let zk = z.select_rows(&keep);
        let yk = targets.select_rows(&keep);
        let z_mean = DVector::from_fn(p, |c, _| zk.column(c).mean());
        let zc = DMatrix::from_fn(n - 1, p, |r, c| zk[(r, c)] - z_mean[c]);
        let lhs = zc.transpose() * &zc + DMatrix::identity(p, p) * alpha;
        let lu = lhs.lu();
        for k in 0..t {
            let y_mean = yk.column(k).mean();
            let yc = yk.column(k).map(|v| v - y_mean);
            let w = lu.solve(&(zc.transpose() * yc)).expect("ridge system is nonsingular");
            let pred = y_mean + (z.row(held).transpose() - &z_mean).dot(&w);
            total += (targets[(held, k)] - pred).powi(2);
        }
    }
    total / (n * t) as f64
}
