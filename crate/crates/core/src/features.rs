use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a single feature column measures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Distance to the given prototype of the kernel.
    Prototype(usize),
    Ppv,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDescriptor {
    /// Transform that produced the column, e.g. `sprocket` or `rocket`.
    pub source: String,
    pub kernel: usize,
    pub feature: FeatureKind,
}

/// Dense row-major feature matrix with one descriptor per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    columns: Vec<ColumnDescriptor>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, values: Vec<f64>, columns: Vec<ColumnDescriptor>) -> Result<Self> {
        let cols = columns.len();
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows} x {cols} matrix",
                values.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            values,
            columns,
        })
    }

    /// Assemble from column-major blocks: `blocks[k]` holds `rows` values for
    /// each of its columns, laid out column after column.
    pub(crate) fn from_column_blocks(
        rows: usize,
        blocks: Vec<Vec<f64>>,
        columns: Vec<ColumnDescriptor>,
    ) -> Self {
        let cols = columns.len();
        let mut values = vec![0.0; rows * cols];
        let mut c = 0;
        for block in blocks {
            for column in block.chunks_exact(rows.max(1)) {
                for (r, &v) in column.iter().enumerate() {
                    values[r * cols + c] = v;
                }
                c += 1;
            }
        }
        debug_assert_eq!(c, cols);
        Self {
            rows,
            cols,
            values,
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn columns(&self) -> &[ColumnDescriptor] {
        &self.columns
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |r| self.get(r, c))
    }

    /// Append another matrix's columns.
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<Self> {
        concat_features(&[self, other])
    }
}

/// Join matrices column-wise in argument order.
pub fn concat_features(matrices: &[&FeatureMatrix]) -> Result<FeatureMatrix> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::ShapeMismatch("nothing to concatenate".into()))?;
    let rows = first.rows;
    if let Some(m) = matrices.iter().find(|m| m.rows != rows) {
        return Err(Error::RowMismatch {
            expected: rows,
            found: m.rows,
        });
    }
    let cols: usize = matrices.iter().map(|m| m.cols).sum();
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for m in matrices {
            values.extend_from_slice(m.row(r));
        }
    }
    let columns = matrices
        .iter()
        .flat_map(|m| m.columns.iter().cloned())
        .collect();
    Ok(FeatureMatrix {
        rows,
        cols,
        values,
        columns,
    })
}
