//! Dense row-major matrices over the scalar types the crate works with.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Checks d_i x d_{i-1} chaining of a layer stack and returns the widths
/// [d_0, ..., d_l].
pub fn chained_widths<T>(layers: &[Matrix<T>]) -> Result<Vec<usize>> {
    if layers.is_empty() {
        return Err(Error::Shape("network needs at least one layer".into()));
    }
    let mut widths = vec![layers[0].cols()];
    for (i, layer) in layers.iter().enumerate() {
        if layer.cols() != widths[i] {
            return Err(Error::Shape(format!(
                "layer {} has {} columns, expected {}",
                i + 1,
                layer.cols(),
                widths[i]
            )));
        }
        if layer.rows() == 0 || layer.cols() == 0 {
            return Err(Error::Shape(format!("layer {} has a zero dimension", i + 1)));
        }
        widths.push(layer.rows());
    }
    Ok(widths)
}
