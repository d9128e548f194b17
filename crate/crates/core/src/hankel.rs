//! Hankel determinant sequence, its zero pattern and the indices derived
//! from it.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact;
use crate::functional::Functional;
use crate::linalg::{CMatrix, Lu};
use crate::tolerance::TolerancePolicy;
use crate::C64;
use num_traits::Float;

/// `H_{k-1}`: the `k x k` matrix with entry `(i, j) = m_{i+j}`.
pub fn hankel_matrix(f: &Functional, k: usize) -> Result<CMatrix> {
    if k == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let m = f.moments_upto(2 * k - 2)?;
    Ok(CMatrix::from_fn(k, k, |i, j| m[i + j]))
}

/// Run length of zeros following a given determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KroneckerIndex {
    Exact(usize),
    /// The run reaches the end of the computed pattern.
    AtLeast(usize),
    /// The run never ends (tail certified zero by the rank bound).
    Unbounded,
}

/// Degree of exactness `ν(t) + ν(t+1) - 2` attached to a regular index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactnessBound {
    Degree(usize),
    /// The next regular index lies beyond the computed pattern.
    AtLeast(usize),
    /// No later regular index exists.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeKind {
    Regular,
    Singular,
    Nonexistent,
}

/// Per-degree existence classification, indexed by degree from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeClassification {
    kinds: Vec<DegreeKind>,
}

impl DegreeClassification {
    pub fn kind(&self, n: usize) -> Option<DegreeKind> {
        self.kinds.get(n).copied()
    }

    pub fn kinds(&self) -> &[DegreeKind] {
        &self.kinds
    }

    fn degrees(&self, kind: DegreeKind) -> Vec<usize> {
        (1..self.kinds.len())
            .filter(|&n| self.kinds[n] == kind)
            .collect()
    }

    /// Regular degrees `>= 1`.
    pub fn regular(&self) -> Vec<usize> {
        self.degrees(DegreeKind::Regular)
    }

    pub fn singular(&self) -> Vec<usize> {
        self.degrees(DegreeKind::Singular)
    }

    pub fn nonexistent(&self) -> Vec<usize> {
        self.degrees(DegreeKind::Nonexistent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HankelAnalysis {
    deltas: Vec<C64>,
    relative: Vec<f64>,
    is_zero: Vec<bool>,
    regular: Vec<usize>,
    kronecker: Vec<KroneckerIndex>,
    euclidean: Vec<Option<i64>>,
    incurable_from: Option<usize>,
    tail_certified: bool,
    exact: bool,
}

/// Floating determinants `Δ_0..=Δ_max_k-1` with the Hadamard-relative zero
/// test. For a bilinear form of dimension `N` the pattern is extended to
/// index `2N - 1` and the tail beyond it is certified zero.
pub fn determinant_sequence(
    f: &Functional,
    max_k: usize,
    tol: &TolerancePolicy,
) -> Result<HankelAnalysis> {
    HankelAnalysis::compute(f, max_k, tol)
}

impl HankelAnalysis {
    pub fn compute(f: &Functional, max_k: usize, tol: &TolerancePolicy) -> Result<Self> {
        Self::compute_with(f, max_k, tol, false)
    }

    /// Same as [`compute`](Self::compute) but with zero decisions taken from
    /// fraction-free elimination over the exactly scaled inputs.
    pub fn compute_exact(f: &Functional, max_k: usize, tol: &TolerancePolicy) -> Result<Self> {
        Self::compute_with(f, max_k, tol, true)
    }

    /// Analysis covering as much as the functional allows: every determinant
    /// of a moment list, or index `2N - 1` of a bilinear form.
    pub fn full(f: &Functional, tol: &TolerancePolicy, exact: bool) -> Result<Self> {
        let max_k = match f.horizon() {
            Some(h) => h / 2 + 1,
            None => 0,
        };
        Self::compute_with(f, max_k, tol, exact)
    }

    fn compute_with(
        f: &Functional,
        max_k: usize,
        tol: &TolerancePolicy,
        exact: bool,
    ) -> Result<Self> {
        tol.validate()?;
        let (count, certified) = match f.dimension() {
            Some(n) => (max_k.max(2 * n), true),
            None => {
                if max_k > 0 {
                    f.require(2 * max_k - 2)?;
                }
                (max_k, false)
            }
        };
        let moments = if count > 0 {
            f.moments_upto(2 * count - 2)?
        } else {
            Vec::new()
        };
        let log_tol = Float::ln(tol.zero_det_tol);
        let mut deltas = Vec::with_capacity(count);
        let mut relative = Vec::with_capacity(count);
        let mut is_zero = Vec::with_capacity(count);
        for k in 0..count {
            let size = k + 1;
            let h = CMatrix::from_fn(size, size, |i, j| moments[i + j]);
            let lu = Lu::new(&h);
            let log_det = lu.log_abs_det();
            let log_bound = h.log_hadamard_bound();
            let ratio = if log_bound == f64::NEG_INFINITY {
                0.0
            } else {
                Float::exp(log_det - log_bound)
            };
            deltas.push(lu.det());
            relative.push(ratio);
            is_zero.push(log_bound == f64::NEG_INFINITY || log_det <= log_tol + log_bound);
        }
        if exact && count > 0 {
            is_zero = exact::hankel_zero_pattern(f, count - 1)?;
        }
        Ok(Self::derive(deltas, relative, is_zero, certified, exact))
    }

    /// Analysis of a prescribed zero pattern (`true` = zero). Determinant
    /// values are reported as 0 or 1.
    pub fn from_pattern(pattern: &[bool]) -> Self {
        let deltas = pattern
            .iter()
            .map(|&z| C64::new(if z { 0.0 } else { 1.0 }, 0.0))
            .collect();
        let relative = pattern.iter().map(|&z| if z { 0.0 } else { 1.0 }).collect();
        Self::derive(deltas, relative, pattern.to_vec(), false, true)
    }

    fn derive(
        deltas: Vec<C64>,
        relative: Vec<f64>,
        is_zero: Vec<bool>,
        tail_certified: bool,
        exact: bool,
    ) -> Self {
        let m = is_zero.len();
        let mut regular = alloc::vec![0];
        regular.extend((0..m).filter(|&k| !is_zero[k]).map(|k| k + 1));
        let kronecker: Vec<KroneckerIndex> = (0..m)
            .map(|i| {
                let run = is_zero[i + 1..].iter().take_while(|&&z| z).count();
                if i + 1 + run < m {
                    KroneckerIndex::Exact(run)
                } else if tail_certified {
                    KroneckerIndex::Unbounded
                } else {
                    KroneckerIndex::AtLeast(run)
                }
            })
            .collect();
        let euclidean = (0..m)
            .map(
                |n| match (n.checked_sub(1).map(|p| kronecker[p]), kronecker[n]) {
                    (Some(KroneckerIndex::Exact(a)), KroneckerIndex::Exact(b)) => {
                        Some(b as i64 - a as i64)
                    }
                    _ => None,
                },
            )
            .collect();
        let incurable_from = if is_zero.last() == Some(&true) {
            Some(is_zero.iter().rposition(|&z| !z).map_or(0, |p| p + 1))
        } else {
            None
        };
        Self {
            deltas,
            relative,
            is_zero,
            regular,
            kronecker,
            euclidean,
            incurable_from,
            tail_certified,
            exact,
        }
    }

    pub fn deltas(&self) -> &[C64] {
        &self.deltas
    }

    /// `|Δ_k|` divided by the Hadamard bound of `H_k`.
    pub fn relative_magnitudes(&self) -> &[f64] {
        &self.relative
    }

    pub fn is_zero(&self) -> &[bool] {
        &self.is_zero
    }

    /// Regular indices `ν(0) = 0, ν(1), ...` found in the computed pattern.
    pub fn regular_indices(&self) -> &[usize] {
        &self.regular
    }

    /// `R(k)` for each computed `Δ_k`.
    pub fn kronecker(&self) -> &[KroneckerIndex] {
        &self.kronecker
    }

    /// `R(n) - R(n-1)` for each computed `n`, when both are known.
    pub fn euclidean(&self) -> &[Option<i64>] {
        &self.euclidean
    }

    /// First index `n` with `Δ_{n-1} != 0` followed only by zeros. Within the
    /// computed range unless [`tail_certified`](Self::tail_certified).
    pub fn incurable_from(&self) -> Option<usize> {
        self.incurable_from
    }

    /// Whether every determinant beyond the computed range is known to vanish.
    pub fn tail_certified(&self) -> bool {
        self.tail_certified
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Number of computed determinants.
    pub fn len(&self) -> usize {
        self.is_zero.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero.is_empty()
    }

    /// Zero status of `Δ_k`, if decidable.
    pub fn zero_at(&self, k: usize) -> Option<bool> {
        match self.is_zero.get(k) {
            Some(&z) => Some(z),
            None if self.tail_certified => Some(true),
            None => None,
        }
    }

    /// Pattern rendered with `x` for nonzero and `0` for zero.
    pub fn pattern_string(&self) -> String {
        self.is_zero
            .iter()
            .map(|&z| if z { '0' } else { 'x' })
            .collect()
    }

    /// `Some(true)` when `Δ_{n-1} != 0` (degree 0 is regular by convention).
    pub fn is_regular_degree(&self, n: usize) -> Option<bool> {
        if n == 0 {
            return Some(true);
        }
        self.zero_at(n - 1).map(|z| !z)
    }

    pub fn next_regular(&self, n: usize) -> Option<usize> {
        self.regular.iter().copied().find(|&r| r > n)
    }

    pub fn prev_regular(&self, n: usize) -> Option<usize> {
        self.regular.iter().rev().copied().find(|&r| r < n)
    }

    /// `ν(t) + ν(t+1) - 2` for a regular index `n = ν(t) >= 1`, or why it is
    /// unknown.
    pub fn exactness_bound(&self, n: usize) -> ExactnessBound {
        match self.next_regular(n) {
            Some(next) => ExactnessBound::Degree((n + next).saturating_sub(2)),
            None if self.tail_certified => ExactnessBound::Unbounded,
            // The next regular index is at least len + 1.
            None => ExactnessBound::AtLeast(n + self.len() - 1),
        }
    }

    /// Existence of monic FOPs of degrees `0..=n_max`.
    pub fn classify_degrees(&self, n_max: usize) -> Result<DegreeClassification> {
        let mut kinds = Vec::with_capacity(n_max + 1);
        kinds.push(DegreeKind::Regular);
        for n in 1..=n_max {
            kinds.push(self.classify_degree(n)?);
        }
        Ok(DegreeClassification { kinds })
    }

    /// Existence of a monic FOP of degree `n`.
    pub fn classify_degree(&self, n: usize) -> Result<DegreeKind> {
        if n == 0 {
            return Ok(DegreeKind::Regular);
        }
        let computed = self.len().saturating_sub(1);
        match self.zero_at(n - 1) {
            None => {
                return Err(Error::InsufficientPattern {
                    degree: n,
                    needed: n - 1,
                    computed,
                })
            }
            Some(false) => return Ok(DegreeKind::Regular),
            Some(true) => {}
        }
        // Δ_{k-1} is the last nonzero before Δ_{n-1}; Δ_{-1} counts as nonzero.
        let k = (0..n - 1)
            .rev()
            .find(|&i| self.zero_at(i) == Some(false))
            .map_or(0, |i| i + 1);
        let last = 2 * n - k - 1;
        for idx in n..=last {
            match self.zero_at(idx) {
                Some(true) => {}
                Some(false) => return Ok(DegreeKind::Nonexistent),
                None => {
                    return Err(Error::InsufficientPattern {
                        degree: n,
                        needed: last,
                        computed,
                    })
                }
            }
        }
        Ok(DegreeKind::Singular)
    }
}
