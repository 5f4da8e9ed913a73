//! Random dilated convolutional kernels and the PPV/max pooled baseline.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{TimeSeriesDataset, MIN_SERIES_LENGTH};
use crate::error::{Error, Result};
use crate::features::{ColumnDescriptor, FeatureKind, FeatureMatrix};
use crate::rng::RandomStream;

pub const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dilation: usize,
    pub padding: usize,
    pub channel: usize,
}

impl Kernel {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Distance between the first and last tap.
    pub fn span(&self) -> usize {
        (self.weights.len().saturating_sub(1)) * self.dilation
    }

    /// Activation length on an input of length `l`, if the kernel fits.
    pub fn output_length(&self, l: usize) -> Option<usize> {
        let padded = l + 2 * self.padding;
        (self.span() < padded).then(|| padded - self.span())
    }

    /// Convolve one channel. Positions outside the input read as zero.
    pub fn convolve(&self, x: &[f64]) -> Result<Vec<f64>> {
        let l = x.len();
        let out_len = self.output_length(l).ok_or(Error::KernelTooWide {
            span: self.span(),
            padded: l + 2 * self.padding,
        })?;
        let mut out = vec![self.bias; out_len];
        let pad = self.padding as isize;
        for (j, &w) in self.weights.iter().enumerate() {
            // out[t] reads x[t + offset]
            let offset = (j * self.dilation) as isize - pad;
            let t_lo = (-offset).max(0) as usize;
            let t_hi = ((l as isize - offset).min(out_len as isize)).max(0) as usize;
            if t_lo >= t_hi {
                continue;
            }
            let src = &x[(t_lo as isize + offset) as usize..(t_hi as isize + offset) as usize];
            for (o, &v) in out[t_lo..t_hi].iter_mut().zip(src) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSet {
    pub kernels: Vec<Kernel>,
    pub input_length: usize,
    pub channels: usize,
}

impl KernelSet {
    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

/// Draw one kernel from `stream`.
pub fn sample_kernel(input_length: usize, channels: usize, stream: &RandomStream) -> Kernel {
    let mut rng = stream.rng();
    let length = KERNEL_LENGTHS[rng.random_range(0..KERNEL_LENGTHS.len())];
    let mut weights: Vec<f64> = (0..length).map(|_| rng.sample(StandardNormal)).collect();
    let mean = weights.iter().sum::<f64>() / length as f64;
    weights.iter_mut().for_each(|w| *w -= mean);
    let bias = rng.random_range(-1.0..=1.0);

    let upper = ((input_length - 1) as f64 / (length - 1) as f64).log2().max(0.0);
    let exponent = if upper > 0.0 {
        rng.random_range(0.0..upper)
    } else {
        0.0
    };
    let dilation = (2f64.powf(exponent).floor() as usize).max(1);

    let span = (length - 1) * dilation;
    let padding_on = rng.random_bool(0.5);
    // a kernel longer than the whole input only fits when padded
    let padding = if padding_on || span > input_length - 1 {
        span / 2
    } else {
        0
    };
    let channel = if channels > 1 {
        rng.random_range(0..channels)
    } else {
        0
    };
    Kernel {
        weights,
        bias,
        dilation,
        padding,
        channel,
    }
}

/// Generate `count` kernels; kernel `i` draws from `stream.derive("kernel", i)`.
pub fn generate_kernels(
    count: usize,
    input_length: usize,
    channels: usize,
    stream: &RandomStream,
) -> Result<KernelSet> {
    generate_kernels_offset(count, 0, input_length, channels, stream)
}

/// As [`generate_kernels`], with kernel indices starting at `first_index`.
pub fn generate_kernels_offset(
    count: usize,
    first_index: usize,
    input_length: usize,
    channels: usize,
    stream: &RandomStream,
) -> Result<KernelSet> {
    if input_length < MIN_SERIES_LENGTH {
        return Err(Error::InputTooShort {
            length: input_length,
            min: MIN_SERIES_LENGTH,
        });
    }
    if count == 0 {
        return Err(Error::InvalidConfig("kernel count must be positive".into()));
    }
    if channels == 0 {
        return Err(Error::InvalidConfig("channel count must be positive".into()));
    }
    let kernels = (first_index..first_index + count)
        .map(|i| sample_kernel(input_length, channels, &stream.derive("kernel", i as u64)))
        .collect();
    Ok(KernelSet {
        kernels,
        input_length,
        channels,
    })
}

/// Activation of `kernel` on the channel it reads.
pub fn apply_kernel(kernel: &Kernel, x: &crate::data::TimeSeries) -> Result<Vec<f64>> {
    if kernel.channel >= x.channels() {
        return Err(Error::ShapeMismatch(format!(
            "kernel reads channel {} of a {}-channel series",
            kernel.channel,
            x.channels()
        )));
    }
    kernel.convolve(x.channel(kernel.channel))
}

/// Proportion of positive values and maximum of an activation.
pub fn pool_features(activation: &[f64]) -> Result<(f64, f64)> {
    if activation.is_empty() {
        return Err(Error::EmptyActivation);
    }
    let positive = activation.iter().filter(|&&v| v > 0.0).count();
    let max = activation.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((positive as f64 / activation.len() as f64, max))
}

/// PPV and max for every kernel. Columns are kernel-major, `(ppv, max)`.
pub fn rocket_transform(dataset: &TimeSeriesDataset, kernels: &KernelSet) -> Result<FeatureMatrix> {
    if dataset.channels() != kernels.channels {
        return Err(Error::ShapeMismatch(format!(
            "kernels built for {} channels, data has {}",
            kernels.channels,
            dataset.channels()
        )));
    }
    let n = dataset.len();
    let blocks = kernels
        .kernels
        .par_iter()
        .map(|k| {
            let mut ppv = Vec::with_capacity(n);
            let mut max = Vec::with_capacity(n);
            for s in dataset.series() {
                let (a, b) = pool_features(&apply_kernel(k, s)?)?;
                ppv.push(a);
                max.push(b);
            }
            ppv.extend(max);
            Ok(ppv)
        })
        .collect::<Result<Vec<_>>>()?;
    let columns = (0..kernels.len())
        .flat_map(|k| {
            [FeatureKind::Ppv, FeatureKind::Max].map(|feature| ColumnDescriptor {
                source: "rocket".into(),
                kernel: k,
                feature,
            })
        })
        .collect();
    Ok(FeatureMatrix::from_column_blocks(n, blocks, columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TimeSeries;

    fn kernel(weights: Vec<f64>, bias: f64, dilation: usize, padding: usize) -> Kernel {
        Kernel {
            weights,
            bias,
            dilation,
            padding,
            channel: 0,
        }
    }

    #[test]
    fn generates_requested_count() {
        let ks = generate_kernels(512, 100, 1, &RandomStream::new(1)).unwrap();
        assert_eq!(ks.len(), 512);
        assert!(ks.kernels.iter().all(|k| KERNEL_LENGTHS.contains(&k.len())));
    }

    #[test]
    fn kernel_invariants_hold() {
        for l in [9usize, 10, 13, 50, 300] {
            let ks = generate_kernels(400, l, 3, &RandomStream::new(l as u64)).unwrap();
            for k in &ks.kernels {
                let mean = k.weights.iter().sum::<f64>() / k.len() as f64;
                assert!(mean.abs() < 1e-12);
                assert!((-1.0..=1.0).contains(&k.bias));
                assert!(k.padding == 0 || k.padding == k.span() / 2);
                assert!(k.span() < l + 2 * k.padding, "l={l} {k:?}");
                assert!(k.channel < 3);
                assert!(k.output_length(l).unwrap() >= 1);
            }
        }
    }

    #[test]
    fn boundary_length_nine() {
        let ks = generate_kernels(1000, 9, 1, &RandomStream::new(3)).unwrap();
        for k in &ks.kernels {
            assert!(k.span() <= 8 + 2 * k.padding);
        }
    }

    #[test]
    fn too_short_input() {
        assert!(matches!(
            generate_kernels(4, 8, 1, &RandomStream::new(0)),
            Err(Error::InputTooShort { length: 8, .. })
        ));
    }

    #[test]
    fn length_frequencies_are_uniform() {
        let ks = generate_kernels(10_000, 200, 1, &RandomStream::new(11)).unwrap();
        for len in KERNEL_LENGTHS {
            let f = ks.kernels.iter().filter(|k| k.len() == len).count() as f64 / 1e4;
            assert!((f - 1.0 / 3.0).abs() <= 0.02, "{len}: {f}");
        }
    }

    #[test]
    fn zero_weights_give_bias() {
        let k = kernel(vec![0.0; 9], 0.5, 1, 4);
        let out = k.convolve(&[3.0; 20]).unwrap();
        assert_eq!(out.len(), 20);
        assert!(out.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn constant_input_gives_bias() {
        let ks = generate_kernels(50, 30, 1, &RandomStream::new(5)).unwrap();
        let x = vec![2.75; 30];
        for k in ks.kernels.iter().filter(|k| k.padding == 0) {
            for v in k.convolve(&x).unwrap() {
                assert!((v - k.bias).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn output_length_formula() {
        let k = kernel(vec![0.0; 9], 0.0, 4, 0);
        assert_eq!(k.convolve(&[0.0; 100]).unwrap().len(), 68);
    }

    #[test]
    fn too_wide_kernel() {
        let k = kernel(vec![1.0; 11], 0.0, 2, 0);
        assert!(matches!(k.convolve(&[0.0; 20]), Err(Error::KernelTooWide { .. })));
    }

    #[test]
    fn hand_convolution_with_padding() {
        // length-3 kernel, dilation 2, padding 2 on a length-12 series
        let x: Vec<f64> = (1..=12).map(f64::from).collect();
        let k = kernel(vec![1.0, -2.0, 1.0], 0.25, 2, 2);
        let out = k.convolve(&x).unwrap();
        assert_eq!(out.len(), 12);
        let get = |i: isize| if (0..12).contains(&i) { x[i as usize] } else { 0.0 };
        for t in 0..12isize {
            let want = 0.25 + get(t - 2) - 2.0 * get(t) + get(t + 2);
            assert_eq!(out[t as usize], want, "t={t}");
        }
    }

    #[test]
    fn pooling_examples() {
        let (ppv, max) = pool_features(&[-1.0, 1.0, 2.0]).unwrap();
        assert_eq!(ppv, 2.0 / 3.0);
        assert_eq!(max, 2.0);
        assert_eq!(pool_features(&[-3.0, -0.5]).unwrap().0, 0.0);
        assert!(matches!(pool_features(&[]), Err(Error::EmptyActivation)));
    }

    #[test]
    fn symmetric_draws_have_half_ppv() {
        let mut rng = RandomStream::new(99).rng();
        let xs: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        let (ppv, _) = pool_features(&xs).unwrap();
        assert!((ppv - 0.5).abs() <= 0.05);
    }

    #[test]
    fn rocket_shape_and_identical_rows() {
        let s = TimeSeries::univariate((0..20).map(|i| (i as f64 * 0.3).sin()).collect()).unwrap();
        let other = TimeSeries::univariate((0..20).map(|i| i as f64).collect()).unwrap();
        let ds = TimeSeriesDataset::new(
            "t",
            vec![s.clone(), other, s.clone(), s.clone(), s],
            vec![0, 1, 0, 0, 0],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let ks = generate_kernels(512, 20, 1, &RandomStream::new(2)).unwrap();
        let fm = rocket_transform(&ds, &ks).unwrap();
        assert_eq!(fm.shape(), (5, 1024));
        assert_eq!(fm.row(0), fm.row(2));
        assert_eq!(fm.columns()[1].feature, FeatureKind::Max);
        assert_eq!(fm.columns()[2].kernel, 1);
    }
}
