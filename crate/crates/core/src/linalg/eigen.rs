//! Eigenvalues of dense complex matrices: balancing, Householder reduction
//! to upper Hessenberg form and single-shift complex QR iteration.

use alloc::vec::Vec;

use num_traits::{Float, Zero};

use super::CMatrix;
use crate::error::{Error, Result};
use crate::C64;

const RADIX: f64 = 2.0;
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Diagonal similarity `D^{-1} A D` equilibrating row and column norms.
/// Powers of two keep the scaling exact; the zero pattern is preserved.
pub fn balance(a: &CMatrix) -> CMatrix {
    balance_with_scaling(a).0
}

/// [`balance`] together with the diagonal of `D`.
pub fn balance_with_scaling(a: &CMatrix) -> (CMatrix, Vec<f64>) {
    let n = a.rows();
    let mut a = a.clone();
    let mut d = alloc::vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    (a, d)
}

fn hessenberg(a: &mut CMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let xnorm = Float::sqrt((k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>());
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.is_zero() {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // Left: A <- (I - 2 v v*) A on rows k+1..n.
        for j in k..n {
            let s = v.iter().enumerate().fold(C64::zero(), |acc, (i, vi)| {
                acc + vi.conj() * a[(k + 1 + i, j)]
            });
            for (i, vi) in v.iter().enumerate() {
                a[(k + 1 + i, j)] -= *vi * s * 2.0;
            }
        }
        // Right: A <- A (I - 2 v v*) on columns k+1..n.
        for i in 0..n {
            let s = v
                .iter()
                .enumerate()
                .fold(C64::zero(), |acc, (j, vj)| acc + a[(i, k + 1 + j)] * vj);
            for (j, vj) in v.iter().enumerate() {
                a[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = C64::zero();
        }
    }
}

/// Rotation `[c s; -s̄ c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::zero());
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = Float::hypot(an, bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Wilkinson shift: eigenvalue of the trailing 2x2 block closest to `d`.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of an upper Hessenberg matrix (entries below the first
/// subdiagonal are ignored).
pub fn eigenvalues_hessenberg(h: &CMatrix) -> Result<Vec<C64>> {
    let n = h.rows();
    let mut h = balance(h);
    let mut eig = alloc::vec![C64::zero(); n];
    if n == 0 {
        return Ok(eig);
    }
    let norm = h.frobenius_norm();
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // Locate the start of the active unreduced block.
        let mut l = hi;
        while l > 0 {
            let mut scale = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if h[(l, l - 1)].norm() <= eps * scale {
                h[(l, l - 1)] = C64::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > MAX_SWEEPS_PER_EIGENVALUE * n {
            return Err(Error::EigenNoConvergence);
        }
        let mut shift = wilkinson(
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        if iter % 11 == 10 {
            // Exceptional shift to break cycles.
            let sub = h[(hi, hi - 1)].norm()
                + if hi >= 2 {
                    h[(hi - 1, hi - 2)].norm()
                } else {
                    0.0
                };
            shift = h[(hi, hi)] + C64::new(0.75 * sub, 0.5 * sub);
        }
        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = l + idx;
            let top = (k + 2).min(hi);
            for i in l..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eig)
}

/// All eigenvalues of a square complex matrix, in no particular order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            what: "eigenvalues need a square matrix",
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "matrix" });
    }
    let mut h = balance(a);
    hessenberg(&mut h);
    eigenvalues_hessenberg(&h)
}
