use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_traits::{Float, Zero};

use crate::C64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from nested rows. Returns `None` when rows are ragged.
    pub fn from_rows(rows: &[Vec<C64>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Leading `k x k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, k, |i, j| self[(i, j)])
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(C64::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `A* x` without forming the adjoint.
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![C64::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        Float::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Product of the Euclidean row norms (Hadamard's determinant bound).
    pub fn hadamard_bound(&self) -> f64 {
        (0..self.rows).map(|i| norm2(self.row(i))).product()
    }

    /// Logarithm of the Hadamard bound; `-inf` when a row vanishes.
    pub fn log_hadamard_bound(&self) -> f64 {
        (0..self.rows).map(|i| Float::ln(norm2(self.row(i)))).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|&z| crate::is_finite(z))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Conjugating inner product `x* y`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter()
        .zip(y)
        .fold(C64::zero(), |acc, (a, b)| acc + a.conj() * b)
}

pub fn norm2(x: &[C64]) -> f64 {
    Float::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn matvec_and_adjoint() {
        let a = CMatrix::from_rows(&[
            vec![c64(1.0, 1.0), c64(2.0, 0.0)],
            vec![c64(0.0, -1.0), c64(3.0, 2.0)],
        ])
        .unwrap();
        let x = [c64(1.0, 0.0), c64(0.0, 1.0)];
        assert_eq!(a.adjoint_matvec(&x), a.adjoint().matvec(&x));
        let e = a.matmul(&CMatrix::identity(2));
        assert_eq!(e, a);
        assert_eq!(dot(&x, &x), c64(2.0, 0.0));
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(CMatrix::from_rows(&[vec![c64(1.0, 0.0)], vec![]]).is_none());
    }
}
