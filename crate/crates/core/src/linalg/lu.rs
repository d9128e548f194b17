use alloc::vec::Vec;

use num_traits::{Float, One, Zero};

use super::CMatrix;
use crate::C64;

/// LU factorization with partial (row) pivoting, `P A = L U`.
///
/// Factoring never fails; exact zero pivots are recorded and make
/// [`Lu::solve`] return `None`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            if pivot.is_zero() {
                singular = true;
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Self {
            lu,
            perm,
            swaps,
            singular,
        }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn pivots(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.lu[(i, i)]).collect()
    }

    pub fn det(&self) -> C64 {
        let prod = (0..self.dim()).fold(C64::one(), |acc, i| acc * self.lu[(i, i)]);
        if self.swaps % 2 == 1 {
            -prod
        } else {
            prod
        }
    }

    /// `ln |det A|`, robust against overflow; `-inf` for an exact zero pivot.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.dim())
            .map(|i| Float::ln(self.lu[(i, i)].norm()))
            .sum()
    }

    pub fn is_exactly_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        if self.singular {
            return None;
        }
        let n = self.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        let n = self.dim();
        let mut inv = CMatrix::zeros(n, n);
        let mut e = alloc::vec![C64::zero(); n];
        for j in 0..n {
            e[j] = C64::one();
            let col = self.solve(&e)?;
            e[j] = C64::zero();
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }

    /// One-norm condition number of the factored matrix `a`; infinite when
    /// singular. Computed from the explicit inverse, fine at the sizes used.
    pub fn condition(&self, a: &CMatrix) -> f64 {
        match self.inverse() {
            Some(inv) => one_norm(a) * one_norm(&inv),
            None => f64::INFINITY,
        }
    }
}

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
