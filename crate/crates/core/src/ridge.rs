//! Ridge classifier with leave-one-out selection of the regularization
//! strength.
//!
//! Features are standardized with training statistics. Targets are `±1`
//! one-vs-rest columns (a single column for two classes). The intercept is
//! unpenalized; because standardized columns have zero mean it decouples
//! from the weights and the hat matrix is `H = 11ᵀ/n + Z(ZᵀZ + αI)⁻¹Zᵀ`.
//! With an eigendecomposition of whichever of `ZZᵀ` and `ZᵀZ` is smaller,
//! `H` for every α follows from one factorization, and the leave-one-out
//! residual of row `i` is `(yᵢ − ŷᵢ) / (1 − Hᵢᵢ)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub const DEFAULT_ALPHAS: [f64; 3] = [0.1, 1.0, 10.0];

/// Scales at or below this are treated as constant columns.
const CONSTANT_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations; constant columns
    /// get scale 1.
    pub fn fit(x: &FeatureMatrix) -> Self {
        let (n, p) = x.shape();
        let mut mean = vec![0.0; p];
        for r in 0..n {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; p];
        for r in 0..n {
            for ((s, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n as f64).sqrt();
                if sd > CONSTANT_SCALE {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<DMatrix<f64>> {
        if x.cols() != self.mean.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} feature columns, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        Ok(DMatrix::from_fn(x.rows(), x.cols(), |r, c| {
            (x.get(r, c) - self.mean[c]) / self.scale[c]
        }))
    }
}

/// `±1` one-vs-rest targets; a single `class 1 vs class 0` column for two
/// classes.
pub fn encode_targets(labels: &[usize], classes: usize) -> DMatrix<f64> {
    if classes == 2 {
        DMatrix::from_fn(labels.len(), 1, |r, _| if labels[r] == 1 { 1.0 } else { -1.0 })
    } else {
        DMatrix::from_fn(labels.len(), classes, |r, c| if labels[r] == c { 1.0 } else { -1.0 })
    }
}

/// Eigenbasis of the smaller Gram matrix, shared by every α.
struct SpectralFactor {
    /// `n × r`: `U` for the row Gram, `ZV` for the column Gram.
    basis: DMatrix<f64>,
    /// `U` or `V`.
    vectors: DMatrix<f64>,
    eigen: DVector<f64>,
    row_gram: bool,
}

impl SpectralFactor {
    fn new(z: &DMatrix<f64>) -> Self {
        let (n, p) = z.shape();
        if p >= n {
            let gram = z * z.transpose();
            let eig = SymmetricEigen::new(gram);
            Self {
                basis: eig.eigenvectors.clone(),
                vectors: eig.eigenvectors,
                eigen: eig.eigenvalues.map(|v| v.max(0.0)),
                row_gram: true,
            }
        } else {
            let gram = z.transpose() * z;
            let eig = SymmetricEigen::new(gram);
            Self {
                basis: z * &eig.eigenvectors,
                vectors: eig.eigenvectors,
                eigen: eig.eigenvalues.map(|v| v.max(0.0)),
                row_gram: false,
            }
        }
    }

    /// Per-direction shrinkage so that `Z(ZᵀZ+αI)⁻¹Zᵀ = B diag(g) Bᵀ`.
    fn gains(&self, alpha: f64) -> DVector<f64> {
        if self.row_gram {
            self.eigen.map(|s| s / (s + alpha))
        } else {
            self.eigen.map(|s| 1.0 / (s + alpha))
        }
    }
}

/// Mean squared leave-one-out residual for each α, over rows and target
/// columns, on an already standardized design.
pub fn loo_errors(z: &DMatrix<f64>, targets: &DMatrix<f64>, alphas: &[f64]) -> Vec<f64> {
    let n = z.nrows();
    let factor = SpectralFactor::new(z);
    let (centered, _) = center(targets);
    let projected = factor.basis.transpose() * &centered;
    alphas
        .iter()
        .map(|&alpha| {
            let g = factor.gains(alpha);
            let mut scaled = projected.clone();
            for (mut row, gk) in scaled.row_iter_mut().zip(g.iter()) {
                row *= *gk;
            }
            let fitted = &factor.basis * scaled;
            let mut total = 0.0;
            for i in 0..n {
                let h: f64 = 1.0 / n as f64
                    + factor
                        .basis
                        .row(i)
                        .iter()
                        .zip(g.iter())
                        .map(|(b, gk)| b * b * gk)
                        .sum::<f64>();
                for t in 0..targets.ncols() {
                    let resid = (centered[(i, t)] - fitted[(i, t)]) / (1.0 - h);
                    total += resid * resid;
                }
            }
            total / (n * targets.ncols()) as f64
        })
        .collect()
}

fn center(y: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let means: Vec<f64> = y.column_iter().map(|c| c.mean()).collect();
    let centered = DMatrix::from_fn(y.nrows(), y.ncols(), |r, c| y[(r, c)] - means[c]);
    (centered, means)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub standardizer: Standardizer,
    /// One weight vector per target column.
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub alpha: f64,
    pub alphas: Vec<f64>,
    /// Leave-one-out error for each entry of `alphas`.
    pub loo_errors: Vec<f64>,
    pub classes: usize,
}

/// Fit at every α, keep the one with the lowest leave-one-out error (the
/// first on ties) and refit on all rows.
pub fn fit_ridge_cv(x: &FeatureMatrix, labels: &[usize], alphas: &[f64]) -> Result<RidgeModel> {
    if x.rows() != labels.len() {
        return Err(Error::RowMismatch {
            expected: x.rows(),
            found: labels.len(),
        });
    }
    if x.rows() < 2 {
        return Err(Error::TooFewInstances {
            requested: 2,
            available: x.rows(),
        });
    }
    if alphas.is_empty() {
        return Err(Error::InvalidConfig("no regularization strengths given".into()));
    }
    if let Some(&bad) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::DegenerateAlphas(bad));
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut present = vec![false; classes];
    labels.iter().for_each(|&y| present[y] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::SingleClass);
    }

    let standardizer = Standardizer::fit(x);
    let z = standardizer.transform(x)?;
    let targets = encode_targets(labels, classes);
    let errors = loo_errors(&z, &targets, alphas);
    let best = errors
        .iter()
        .enumerate()
        .fold(0, |best, (i, e)| if *e < errors[best] { i } else { best });
    let alpha = alphas[best];

    let (centered, intercepts) = center(&targets);
    let factor = SpectralFactor::new(&z);
    let mut inner = factor.basis.transpose() * &centered;
    for (mut row, s) in inner.row_iter_mut().zip(factor.eigen.iter()) {
        row /= s + alpha;
    }
    let weights = if factor.row_gram {
        // W = Zᵀ U diag(1/(s+α)) Uᵀ Y
        z.transpose() * (&factor.vectors * inner)
    } else {
        // W = V diag(1/(s+α)) Vᵀ Zᵀ Y
        &factor.vectors * inner
    };
    let weights = weights
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    Ok(RidgeModel {
        standardizer,
        weights,
        intercepts,
        alpha,
        alphas: alphas.to_vec(),
        loo_errors: errors,
        classes,
    })
}

impl RidgeModel {
    /// Raw scores, one column per target.
    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        let z = self.standardizer.transform(x)?;
        Ok((0..z.nrows())
            .map(|r| {
                self.weights
                    .iter()
                    .zip(&self.intercepts)
                    .map(|(w, b)| b + z.row(r).iter().zip(w).map(|(a, c)| a * c).sum::<f64>())
                    .collect()
            })
            .collect())
    }

    /// Highest-scoring class, lowest index on ties. With two classes the
    /// single discriminant picks class 1 only when strictly positive.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|scores| {
                if self.classes == 2 {
                    usize::from(scores[0] > 0.0)
                } else {
                    scores
                        .iter()
                        .enumerate()
                        .fold(0, |best, (c, s)| if *s > scores[best] { c } else { best })
                }
            })
            .collect())
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights
            .iter()
            .flatten()
            .map(|w| w * w)
            .sum::<f64>()
            .sqrt()
    }
}

pub fn predict(model: &RidgeModel, x: &FeatureMatrix) -> Result<Vec<usize>> {
    model.predict(x)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyTable);
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}
