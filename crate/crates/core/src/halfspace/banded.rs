//! Banded LU factorisation with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Storage keeps room for the `lower` extra super-diagonals that row
/// interchanges can create.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        BandedMatrix { n, lower, upper, width, data: vec![0.0; n * width] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        // column offset j - i ranges over [-lower, upper + lower]
        let off = j as isize - i as isize + self.lower as isize;
        if off < 0 || off as usize >= self.width || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * self.width + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets an entry inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let within = j + self.lower >= i && j <= i + self.upper;
        assert!(within, "entry ({i}, {j}) lies outside the band");
        let s = self.slot(i, j).expect("entry inside the matrix");
        self.data[s] = v;
    }

    /// Solves `A x = b` in place, consuming the matrix.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        let max_upper = self.upper + self.lower;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Singular("matrix is zero or non-finite".into()));
        }
        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= scale * 1e-300 {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            let last_col = (k + max_upper).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let c = self.get(piv, j);
                    self.put(k, j, c);
                    self.put(piv, j, a);
                }
                b.swap(k, piv);
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let f = self.get(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                self.put(i, k, 0.0);
                for j in k + 1..=last_col {
                    let v = self.get(i, j) - f * self.get(k, j);
                    self.put(i, j, v);
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + max_upper).min(n - 1);
            let mut s = b[k];
            #[allow(clippy::needless_range_loop)]
            for j in k + 1..=last_col {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("solution is not finite".into()));
        }
        Ok(b)
    }

    fn put(&mut self, i: usize, j: usize, v: f64) {
        if let Some(s) = self.slot(i, j) {
            self.data[s] = v;
        } else {
            debug_assert!(v == 0.0, "fill outside storage at ({i}, {j})");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_solve() {
        let n = 12;
        let (lower, upper) = (2, 2);
        let mut a = BandedMatrix::zeros(n, lower, upper);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(lower)..=(i + upper).min(n - 1) {
                // a small diagonal forces pivoting
                let v = if i == j { 0.01 * (i as f64 + 1.0) } else { 1.0 + ((i * 7 + j * 3) % 5) as f64 };
                a.set(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = a.solve(b.clone()).unwrap();
        let expected = dense.lu().solve(&DVector::from_vec(b)).unwrap();
        for i in 0..n {
            assert!((x[i] - expected[i]).abs() < 1e-10, "{i}: {} vs {}", x[i], expected[i]);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 0, 1.0);
        let err = a.solve(vec![1.0, 1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
    }
}
