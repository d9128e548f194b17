//! Exact zero tests for Hankel determinants.
//!
//! Every finite `f64` is a dyadic rational, so a list of complex inputs can
//! be scaled by a common power of two into Gaussian integers without loss.
//! Determinants are then evaluated by fraction-free (Bareiss) elimination
//! over `Z[i]`, giving zero/nonzero decisions with no tolerance at all.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{Float, One, Signed, Zero};

use crate::error::Result;
use crate::functional::Functional;
use crate::linalg::CMatrix;
use crate::C64;

/// Gaussian integer `re + i im`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn new(re: BigInt, im: BigInt) -> Self {
        Self { re, im }
    }

    pub fn from_i64(re: i64, im: i64) -> Self {
        Self::new(BigInt::from(re), BigInt::from(im))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(BigInt::one(), BigInt::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    /// Quotient of an exact division; the remainder is assumed zero.
    fn div_exact(&self, d: &GaussInt) -> GaussInt {
        let norm = &d.re * &d.re + &d.im * &d.im;
        let re = &self.re * &d.re + &self.im * &d.im;
        let im = &self.im * &d.re - &self.re * &d.im;
        debug_assert!((&re % &norm).is_zero() && (&im % &norm).is_zero());
        GaussInt::new(re / &norm, im / norm)
    }

    /// Approximate value, for diagnostics.
    pub fn to_c64_lossy(&self) -> C64 {
        use num_traits::ToPrimitive;
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &GaussInt {
    type Output = GaussInt;
    fn add(self, rhs: &GaussInt) -> GaussInt {
        GaussInt::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussInt {
    type Output = GaussInt;
    fn sub(self, rhs: &GaussInt) -> GaussInt {
        GaussInt::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussInt {
    type Output = GaussInt;
    fn mul(self, rhs: &GaussInt) -> GaussInt {
        GaussInt::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

fn decode(x: f64) -> (BigInt, i32) {
    if x == 0.0 {
        return (BigInt::zero(), i32::MAX);
    }
    let (mantissa, exp, sign) = x.integer_decode();
    let tz = mantissa.trailing_zeros();
    let m = BigInt::from(mantissa >> tz);
    (if sign < 0 { -m } else { m }, i32::from(exp) + tz as i32)
}

/// Scale `values` by one common power of two so that all become Gaussian
/// integers. Returns the integers and the exponent `e` with
/// `values[i] = ints[i] * 2^e`.
pub fn to_gaussian_integers(values: &[C64]) -> (Vec<GaussInt>, i32) {
    let decoded: Vec<((BigInt, i32), (BigInt, i32))> = values
        .iter()
        .map(|z| (decode(z.re), decode(z.im)))
        .collect();
    let e = decoded
        .iter()
        .flat_map(|(a, b)| [a.1, b.1])
        .min()
        .unwrap_or(0);
    let e = if e == i32::MAX { 0 } else { e };
    let lift = |(m, x): &(BigInt, i32)| -> BigInt {
        if m.is_zero() {
            BigInt::zero()
        } else {
            m << ((x - e) as usize)
        }
    };
    let ints = decoded
        .iter()
        .map(|(a, b)| GaussInt::new(lift(a), lift(b)))
        .collect();
    (ints, e)
}

/// Determinant over `Z[i]` by Bareiss elimination with row pivoting.
pub fn determinant(mut m: Vec<Vec<GaussInt>>) -> GaussInt {
    let n = m.len();
    if n == 0 {
        return GaussInt::one();
    }
    let mut negate = false;
    let mut prev = GaussInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(p) => {
                    m.swap(k, p);
                    negate = !negate;
                }
                None => return GaussInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        GaussInt::new(-d.re, -d.im)
    } else {
        d
    }
}

/// Exact determinants `Δ_0..=Δ_max_index` of the Hankel matrices of the
/// (integer) moments `m`. Requires `m.len() > 2 * max_index`.
pub fn hankel_determinants(m: &[GaussInt], max_index: usize) -> Vec<GaussInt> {
    (0..=max_index)
        .map(|k| {
            let size = k + 1;
            let h = (0..size)
                .map(|i| (0..size).map(|j| m[i + j].clone()).collect())
                .collect();
            determinant(h)
        })
        .collect()
}

/// Exact zero pattern of `Δ_0..=Δ_max_index` for a functional.
///
/// Moment lists are scaled uniformly. For a bilinear form, `A`, `v` and `w`
/// are scaled separately and the moments recomputed in integer arithmetic;
/// the result differs from the true moments by `m_j -> c 2^{a j} m_j`, a
/// positive diagonal congruence of every Hankel matrix, which preserves
/// the zero pattern.
pub fn hankel_zero_pattern(f: &Functional, max_index: usize) -> Result<Vec<bool>> {
    let ints = integer_moments(f, 2 * max_index)?;
    Ok(hankel_determinants(&ints, max_index)
        .iter()
        .map(GaussInt::is_zero)
        .collect())
}

/// Integer stand-ins for `m_0..=m_k` (see [`hankel_zero_pattern`]).
pub fn integer_moments(f: &Functional, k: usize) -> Result<Vec<GaussInt>> {
    match f.triplet() {
        None => Ok(to_gaussian_integers(&f.moments_upto(k)?).0),
        Some(t) => {
            let n = t.dim();
            let a = matrix_to_ints(t.a());
            let (v, _) = to_gaussian_integers(t.v());
            let (w, _) = to_gaussian_integers(t.w());
            let w: Vec<GaussInt> = w.iter().map(GaussInt::conj).collect();
            let mut x = v;
            let mut out = Vec::with_capacity(k + 1);
            for j in 0..=k {
                out.push(
                    w.iter()
                        .zip(&x)
                        .fold(GaussInt::zero(), |acc, (wi, xi)| &acc + &(wi * xi)),
                );
                if j < k {
                    x = (0..n)
                        .map(|i| {
                            a[i].iter()
                                .zip(&x)
                                .fold(GaussInt::zero(), |acc, (aij, xj)| &acc + &(aij * xj))
                        })
                        .collect();
                }
            }
            Ok(out)
        }
    }
}

fn matrix_to_ints(a: &CMatrix) -> Vec<Vec<GaussInt>> {
    let flat: Vec<C64> = (0..a.rows()).flat_map(|i| a.row(i).to_vec()).collect();
    let (ints, _) = to_gaussian_integers(&flat);
    ints.chunks(a.cols().max(1))
        .map(<[GaussInt]>::to_vec)
        .collect()
}

/// Bit length of the larger component.
pub fn bit_length(z: &GaussInt) -> u64 {
    z.re.abs().bits().max(z.im.abs().bits())
}
