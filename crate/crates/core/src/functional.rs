//! Linear functionals on polynomials, given either by a finite moment list
//! or by a bilinear form `L(p) = w* p(A) v`.

use alloc::vec::Vec;

use num_traits::Zero;
use spin::Mutex;

use crate::error::{Error, Result};
use crate::linalg::{dot, CMatrix};
use crate::poly::Polynomial;
use crate::{is_finite, C64};

/// Finite list of moments `m_0..m_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    moments: Vec<C64>,
}

impl MomentSequence {
    pub fn new(moments: Vec<C64>) -> Result<Self> {
        if moments.is_empty() {
            return Err(Error::EmptyMoments);
        }
        if !moments.iter().all(|&z| is_finite(z)) {
            return Err(Error::NonFinite { what: "moment" });
        }
        Ok(Self { moments })
    }

    pub fn from_real(moments: &[f64]) -> Result<Self> {
        Self::new(moments.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.moments
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the last moment, `K`.
    pub fn horizon(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn get(&self, j: usize) -> Result<C64> {
        self.moments.get(j).copied().ok_or(Error::HorizonExceeded {
            requested: j,
            horizon: self.horizon(),
        })
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.moments
    }
}

/// A matrix `A` with a right vector `v` and a left vector `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    w: Vec<C64>,
    a: CMatrix,
    v: Vec<C64>,
}

impl Triplet {
    pub fn new(w: Vec<C64>, a: CMatrix, v: Vec<C64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                what: "matrix must be square",
            });
        }
        if v.len() != a.rows() || w.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                what: "vector length differs from matrix dimension",
            });
        }
        if !a.is_finite() || !v.iter().chain(&w).all(|&z| is_finite(z)) {
            return Err(Error::NonFinite {
                what: "triplet entry",
            });
        }
        Ok(Self { w, a, v })
    }

    pub fn w(&self) -> &[C64] {
        &self.w
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn v(&self) -> &[C64] {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// `w* A^j v` for `j = 0..=k_max`, by repeated matrix-vector products.
    pub fn markov_parameters(&self, k_max: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(k_max + 1);
        let mut x = self.v.clone();
        for j in 0..=k_max {
            out.push(dot(&self.w, &x));
            if j < k_max {
                x = self.a.matvec(&x);
            }
        }
        out
    }
}

#[derive(Debug, Default)]
struct KrylovMemo {
    moments: Vec<C64>,
    /// `A^j v` with `j = moments.len()`.
    next: Vec<C64>,
}

/// A linear functional on polynomials.
#[derive(Debug)]
pub enum Functional {
    FromMoments(MomentSequence),
    FromTriplet(TripletFunctional),
}

/// Bilinear-form functional with memoized moments.
#[derive(Debug)]
pub struct TripletFunctional {
    triplet: Triplet,
    memo: Mutex<KrylovMemo>,
}

impl TripletFunctional {
    pub fn triplet(&self) -> &Triplet {
        &self.triplet
    }
}

impl Clone for TripletFunctional {
    fn clone(&self) -> Self {
        let memo = self.memo.lock();
        Self {
            triplet: self.triplet.clone(),
            memo: Mutex::new(KrylovMemo {
                moments: memo.moments.clone(),
                next: memo.next.clone(),
            }),
        }
    }
}

impl Clone for Functional {
    fn clone(&self) -> Self {
        match self {
            Self::FromMoments(m) => Self::FromMoments(m.clone()),
            Self::FromTriplet(t) => Self::FromTriplet(t.clone()),
        }
    }
}

impl From<MomentSequence> for Functional {
    fn from(m: MomentSequence) -> Self {
        Self::FromMoments(m)
    }
}

impl From<Triplet> for Functional {
    fn from(t: Triplet) -> Self {
        Self::from_triplet(t)
    }
}

impl Functional {
    pub fn from_moments(moments: Vec<C64>) -> Result<Self> {
        Ok(Self::FromMoments(MomentSequence::new(moments)?))
    }

    pub fn from_real_moments(moments: &[f64]) -> Result<Self> {
        Ok(Self::FromMoments(MomentSequence::from_real(moments)?))
    }

    pub fn from_triplet(triplet: Triplet) -> Self {
        let next = triplet.v.clone();
        Self::FromTriplet(TripletFunctional {
            triplet,
            memo: Mutex::new(KrylovMemo {
                moments: Vec::new(),
                next,
            }),
        })
    }

    /// Highest available moment index; `None` when unbounded.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            Self::FromMoments(m) => Some(m.horizon()),
            Self::FromTriplet(_) => None,
        }
    }

    /// Dimension `N` of the underlying matrix, if any.
    pub fn dimension(&self) -> Option<usize> {
        self.triplet().map(Triplet::dim)
    }

    pub fn triplet(&self) -> Option<&Triplet> {
        match self {
            Self::FromMoments(_) => None,
            Self::FromTriplet(t) => Some(&t.triplet),
        }
    }

    /// Fail with `HorizonExceeded` unless `m_j` is available.
    pub fn require(&self, j: usize) -> Result<()> {
        match self.horizon() {
            Some(h) if j > h => Err(Error::HorizonExceeded {
                requested: j,
                horizon: h,
            }),
            _ => Ok(()),
        }
    }

    pub fn moment(&self, j: usize) -> Result<C64> {
        match self {
            Self::FromMoments(m) => m.get(j),
            Self::FromTriplet(t) => {
                let mut memo = t.memo.lock();
                extend_memo(&t.triplet, &mut memo, j);
                Ok(memo.moments[j])
            }
        }
    }

    /// `m_0..=m_k`.
    pub fn moments_upto(&self, k: usize) -> Result<Vec<C64>> {
        match self {
            Self::FromMoments(m) => {
                self.require(k)?;
                Ok(m.as_slice()[..=k].to_vec())
            }
            Self::FromTriplet(t) => {
                let mut memo = t.memo.lock();
                extend_memo(&t.triplet, &mut memo, k);
                Ok(memo.moments[..=k].to_vec())
            }
        }
    }

    /// `L(p) = Σ c_j m_j`.
    pub fn apply(&self, p: &Polynomial) -> Result<C64> {
        let Some(d) = p.degree() else {
            return Ok(C64::zero());
        };
        let m = self.moments_upto(d)?;
        Ok(p.coeffs()
            .iter()
            .zip(&m)
            .fold(C64::zero(), |acc, (c, mj)| acc + c * mj))
    }

    /// Largest moment index that callers may rely on: the horizon for a
    /// moment list, `fallback` for a bilinear form.
    pub fn available(&self, fallback: usize) -> usize {
        self.horizon().unwrap_or(fallback)
    }
}

fn extend_memo(triplet: &Triplet, memo: &mut KrylovMemo, j: usize) {
    while memo.moments.len() <= j {
        memo.moments.push(dot(&triplet.w, &memo.next));
        memo.next = triplet.a.matvec(&memo.next);
    }
}
