//! Small dense row-major matrix used for schedules, powers, gains, and rates.
//!
//! The problem sizes here are tiny (users x slots), so this is a plain
//! `Vec<f64>` with shape checks rather than a linear-algebra dependency.
//! Indexing is `m[(row, col)]`.

use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Mat {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Mat {
            rows: rows.len(),
            cols: ncols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Sum of column `col`, accumulated in ascending row order.
    pub fn col_sum(&self, col: usize) -> f64 {
        (0..self.rows).map(|r| self[(r, col)]).sum()
    }

    /// Copy of column `col` as a vector.
    pub fn col(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, col)]).collect()
    }

    pub fn set_col(&mut self, col: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (r, &v) in values.iter().enumerate() {
            self[(r, col)] = v;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let mut m = Mat::zeros(2, 3);
        m[(1, 2)] = 5.0;
        m[(0, 1)] = 3.0;
        assert_eq!(m.col_sum(2), 5.0);
        assert_eq!(m.col(1), vec![3.0, 0.0]);
    }

    #[test]
    fn from_rows_round_trip() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m[(1, 0)], 3.0);
    }
}
