//! Dense row-major sample matrix shared by the simulator, the scorers, and
//! file I/O.

/// An n × p matrix of samples (rows) by variables (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// A zero-filled matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DataMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    /// Builds from row-major values; `values.len()` must equal `rows * cols`.
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "value count must match shape");
        DataMatrix { rows, cols, values }
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.cols + col] = value;
    }

    /// One row as a slice.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    /// Copies one column out.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Reorders columns so that output column `map[j]` is input column `j`.
    pub fn permute_columns(&self, map: &[usize]) -> DataMatrix {
        assert_eq!(map.len(), self.cols, "map length must match column count");
        let mut out = DataMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (j, &to) in map.iter().enumerate() {
                out.set(r, to, self.get(r, j));
            }
        }
        out
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
