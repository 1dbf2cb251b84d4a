//! Row-major f32 embedding matrices.
//!
//! Row `i` always corresponds to sentence `i` of the corpus the matrix was
//! built from. Matrices are immutable once constructed and are safe to
//! share across threads.

use thiserror::Error;

/// Maximum deviation from unit length for a row to count as normalized.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-4;

/// Norms below this cannot be normalized meaningfully.
pub const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("row {row} has norm below {MIN_NORM} and cannot be normalized")]
    ZeroNorm { row: usize },
    #[error("row {row} has length {got}, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row} has norm {norm} but was declared unit-length")]
    NotUnit { row: usize, norm: f64 },
}

/// An `n_rows x dim` matrix of 32-bit floats, row per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n_rows: usize,
    dim: usize,
    data: Vec<f32>,
    normalized: bool,
}

impl EmbeddingMatrix {
    /// Build from raw rows. Fails on ragged input.
    pub fn from_rows<R: AsRef<[f32]>>(dim: usize, rows: &[R]) -> Result<Self, MatrixError> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(MatrixError::RaggedRow {
                    row,
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            n_rows: rows.len(),
            dim,
            data,
            normalized: false,
        })
    }

    /// Build from rows that are already unit-length, verifying each norm.
    pub fn from_unit_rows<R: AsRef<[f32]>>(dim: usize, rows: &[R]) -> Result<Self, MatrixError> {
        let m = Self::from_rows(dim, rows)?;
        for row in 0..m.n_rows {
            let norm = row_norm(m.row(row));
            if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(MatrixError::NotUnit { row, norm });
            }
        }
        Ok(Self {
            normalized: true,
            ..m
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Return a copy with every row scaled to unit L2 norm. Direction is
    /// preserved; rows with near-zero norm are an error, never skipped,
    /// because skipping would desynchronize row indices.
    pub fn normalize_rows(&self) -> Result<EmbeddingMatrix, MatrixError> {
        let mut data = Vec::with_capacity(self.data.len());
        for row in 0..self.n_rows {
            let r = self.row(row);
            let norm = row_norm(r);
            if norm < MIN_NORM {
                return Err(MatrixError::ZeroNorm { row });
            }
            data.extend(r.iter().map(|&v| (v as f64 / norm) as f32));
        }
        Ok(EmbeddingMatrix {
            n_rows: self.n_rows,
            dim: self.dim,
            data,
            normalized: true,
        })
    }
}

/// L2 norm of a row, accumulated in f64.
pub fn row_norm(row: &[f32]) -> f64 {
    row.iter()
        .map(|&v| {
            let v = v as f64;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Dot product accumulated in f64, the similarity primitive everywhere.
#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f64;
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc += x as f64 * y as f64;
    }
    acc
}
