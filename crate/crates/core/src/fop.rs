//! Regular formal orthogonal polynomials, gap-filling quasi-orthogonal
//! polynomials and the block tridiagonal matrix of their recurrences.
//!
//! All polynomials are monic, so every `β_m` equals 1. Inside a gap
//! `ν(t) < m < ν(t+1)` the sequence continues with `p_m = λ p_{m-1}`; at a
//! regular index the long recurrence
//!
//! ```text
//! p_m = λ p_{m-1} - Σ_{i=ν(j)}^{m-1} α_{m,i} p_i - γ_m p_{ν(j-1)}
//! ```
//!
//! is used, with the `α` obtained from a small block Gram system.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::hankel::HankelAnalysis;
use crate::linalg::{balance, eigenvalues_hessenberg, CMatrix, Lu};
use crate::poly::Polynomial;
use crate::tolerance::TolerancePolicy;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyKind {
    Regular,
    /// `L(p_m λ^j) = 0` for `j < m - order`. Order 0 marks a singular FOP.
    QuasiOrthogonal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FopSequence {
    polys: Vec<Polynomial>,
    kinds: Vec<PolyKind>,
    alphas: BTreeMap<(usize, usize), C64>,
    betas: Vec<C64>,
    gammas: BTreeMap<usize, C64>,
    nu: Vec<usize>,
    /// Every regular index the analysis decided, including those past `n`.
    known_regular: Vec<usize>,
    /// Degree up to which each regular polynomial is known to be orthogonal.
    extended: BTreeMap<usize, Option<isize>>,
}

/// Lower Hessenberg matrix `T_n` with its block boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal {
    matrix: CMatrix,
    boundaries: Vec<usize>,
    beta_next: C64,
    truncated: bool,
}

impl BlockTridiagonal {
    pub fn new(matrix: CMatrix, boundaries: Vec<usize>, beta_next: C64, truncated: bool) -> Self {
        debug_assert!(matrix.is_square());
        Self {
            matrix,
            boundaries,
            beta_next,
            truncated,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Block starts `ν(0) = 0, ν(1), ...` not exceeding the dimension.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// `ν(1)`, or `dim + 1`-style unknown as `None` when no block closed.
    pub fn nu1(&self) -> Option<usize> {
        self.boundaries.get(1).copied()
    }

    /// `β_1..β_{n-1}`.
    pub fn superdiagonal(&self) -> Vec<C64> {
        (1..self.dim()).map(|i| self.matrix[(i - 1, i)]).collect()
    }

    /// `β_n`, coupling `T_n` to the next polynomial or basis vector.
    pub fn beta_next(&self) -> C64 {
        self.beta_next
    }

    /// True when the last block is still open (look-ahead stopped inside it).
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// `1 / (β_1 ... β_{ν(1)-1})`.
    pub fn mu(&self) -> C64 {
        let nu1 = self.nu1().unwrap_or(1).min(self.dim().max(1));
        (1..nu1).fold(C64::one(), |acc, i| acc / self.matrix[(i - 1, i)])
    }

    /// Leading `k x k` part with the boundaries that fit.
    pub fn leading(&self, k: usize) -> Self {
        let beta_next = if k < self.dim() {
            self.matrix[(k - 1, k)]
        } else {
            self.beta_next
        };
        Self {
            matrix: self.matrix.leading(k),
            boundaries: self
                .boundaries
                .iter()
                .copied()
                .filter(|&b| b <= k)
                .collect(),
            beta_next,
            truncated: self.truncated && k == self.dim(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    /// `det(λ I - T_n)` by the Hessenberg determinant recurrence.
    pub fn characteristic_polynomial(&self) -> Polynomial {
        // Work on the upper Hessenberg transpose H = T^T.
        let n = self.dim();
        let h = |i: usize, j: usize| self.matrix[(j, i)];
        let mut p: Vec<Polynomial> = vec![Polynomial::one()];
        for k in 0..n {
            let lin = Polynomial::new(vec![-h(k, k), C64::one()]);
            let mut next = &lin * &p[k];
            let mut prod = C64::one();
            for i in (0..k).rev() {
                prod *= h(i + 1, i);
                let term = p[i].scale(h(i, k) * prod);
                next = &next - &term;
            }
            p.push(next);
        }
        p.pop().unwrap()
    }

    /// Ritz values: eigenvalues of `T_n`.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        // Monic recurrences can leave `T_n` badly scaled; balancing is a
        // diagonal similarity and keeps the Hessenberg shape.
        eigenvalues_hessenberg(&balance(&self.matrix.transpose()))
    }

    /// Per-block characteristic polynomials of the diagonal blocks.
    pub fn block_characteristic_polynomials(&self) -> Vec<Polynomial> {
        let mut ends: Vec<usize> = self.boundaries.iter().copied().skip(1).collect();
        if ends.last() != Some(&self.dim()) {
            ends.push(self.dim());
        }
        ends.into_iter()
            .filter(|&e| e > 0)
            .map(|e| self.leading(e).characteristic_polynomial())
            .collect()
    }
}

/// Maximum residual of an orthogonality check.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityEntry {
    pub index: usize,
    pub kind: PolyKind,
    /// Highest `j` tested, if any.
    pub checked_upto: Option<usize>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub entries: Vec<OrthogonalityEntry>,
    pub max_residual: f64,
}

/// Build `p_0..p_n`. See [`FopSequence::build`].
pub fn build_fop_sequence(
    f: &Functional,
    n: usize,
    analysis: &HankelAnalysis,
    tol: &TolerancePolicy,
) -> Result<FopSequence> {
    FopSequence::build(f, n, analysis, tol)
}

/// `T_n` of a built sequence.
pub fn assemble_block_tridiagonal(seq: &FopSequence) -> BlockTridiagonal {
    seq.block_tridiagonal()
}

fn pair(f: &Functional, p: &Polynomial, q: &Polynomial) -> Result<C64> {
    f.apply(&(p * q))
}

/// Residual correction of a regular monic `p_m` on `H_{m-1} c = -(m_m..m_{2m-1})`.
///
/// The recurrence forms `L(p q)` from intermediate polynomials whose
/// coefficients can be far larger than those of `p_m`; the moment residuals
/// `L(λ^j p_m)` do not suffer from that cancellation. A correction is kept
/// only while it lowers the residual.
fn refine_against_hankel(f: &Functional, m: usize, p: Polynomial) -> Result<Polynomial> {
    let moments = f.moments_upto(2 * m - 1)?;
    let residual = |p: &Polynomial| -> (Vec<C64>, f64) {
        let r: Vec<C64> = (0..m)
            .map(|j| (0..=m).map(|k| p.coeff(k) * moments[j + k]).sum())
            .collect();
        let size = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (r, size)
    };
    let h = CMatrix::from_fn(m, m, |i, k| moments[i + k]);
    let lu = Lu::new(&h);
    let (mut r, mut size) = residual(&p);
    let mut best = p;
    for _ in 0..3 {
        if size == 0.0 {
            break;
        }
        let Some(delta) = lu.solve(&r) else { break };
        let mut coeffs = best.coeffs().to_vec();
        for (c, d) in coeffs.iter_mut().zip(&delta) {
            *c -= d;
        }
        let candidate = Polynomial::new(coeffs);
        let (r2, size2) = residual(&candidate);
        if !(size2 < size) {
            break;
        }
        best = candidate;
        r = r2;
        size = size2;
    }
    Ok(best)
}

impl FopSequence {
    /// Build `p_0..p_n` from the functional and its Hankel analysis. The
    /// analysis must decide `Δ_0..Δ_{n-1}`; moments up to `2n - 1` are read.
    pub fn build(
        f: &Functional,
        n: usize,
        analysis: &HankelAnalysis,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        tol.validate()?;
        if n > 0 && analysis.zero_at(n - 1).is_none() {
            return Err(Error::InsufficientPattern {
                degree: n,
                needed: n - 1,
                computed: analysis.len().saturating_sub(1),
            });
        }
        let nu: Vec<usize> = analysis
            .regular_indices()
            .iter()
            .copied()
            .filter(|&r| r <= n)
            .collect();
        let mut seq = Self {
            polys: vec![Polynomial::one()],
            kinds: vec![PolyKind::Regular],
            alphas: BTreeMap::new(),
            betas: Vec::with_capacity(n),
            gammas: BTreeMap::new(),
            nu: nu.clone(),
            known_regular: analysis.regular_indices().to_vec(),
            extended: BTreeMap::new(),
        };
        // Block index j with ν(j) <= m - 1 < ν(j + 1).
        let mut j = 0usize;
        for m in 1..=n {
            seq.betas.push(C64::one());
            let lam_prev = seq.polys[m - 1].shift(1);
            if nu.get(j + 1) == Some(&m) {
                let p = seq.long_recurrence(f, m, j, lam_prev, tol)?;
                seq.polys.push(p);
                seq.kinds.push(PolyKind::Regular);
                j += 1;
            } else {
                let start = nu[j];
                let order = gap_order(analysis, start, m);
                seq.polys.push(lam_prev);
                seq.kinds.push(PolyKind::QuasiOrthogonal(order));
            }
        }
        for &r in &nu {
            // p_r is orthogonal to λ^j for j <= ν(t+1) - 2.
            let upto = match analysis.next_regular(r) {
                Some(next) => Some(next as isize - 2),
                None if analysis.tail_certified() => None,
                None => Some(analysis.len() as isize - 1),
            };
            seq.extended.insert(r, upto);
        }
        Ok(seq)
    }

    fn long_recurrence(
        &mut self,
        f: &Functional,
        m: usize,
        j: usize,
        lam_prev: Polynomial,
        tol: &TolerancePolicy,
    ) -> Result<Polynomial> {
        let start = self.nu[j];
        let mut p = lam_prev.clone();
        let mut gamma_term = None;
        if j >= 1 {
            let prev_start = self.nu[j - 1];
            let q = &self.polys[start - 1];
            let num = pair(f, &lam_prev, q)?;
            let den = pair(f, q, &self.polys[prev_start])?;
            if den.is_zero() || !crate::is_finite(num / den) {
                return Err(Error::SingularAlphaSystem {
                    degree: m,
                    condition: f64::INFINITY,
                });
            }
            let gamma = num / den;
            self.gammas.insert(m, gamma);
            gamma_term = Some((prev_start, gamma));
            p = &p - &self.polys[prev_start].scale(gamma);
        }
        let size = m - start;
        let mut gram = CMatrix::zeros(size, size);
        let mut rhs = Vec::with_capacity(size);
        for r in 0..size {
            let pr = &self.polys[start + r];
            for i in 0..size {
                gram[(r, i)] = pair(f, pr, &self.polys[start + i])?;
            }
            let mut b = pair(f, &lam_prev, pr)?;
            if let Some((ps, gamma)) = gamma_term {
                b -= gamma * pair(f, pr, &self.polys[ps])?;
            }
            rhs.push(b);
        }
        let lu = Lu::new(&gram);
        let condition = lu.condition(&gram);
        if !(condition <= 1.0 / tol.zero_det_tol) {
            return Err(Error::SingularAlphaSystem {
                degree: m,
                condition,
            });
        }
        let alpha = lu.solve(&rhs).ok_or(Error::SingularAlphaSystem {
            degree: m,
            condition,
        })?;
        for (i, &a) in alpha.iter().enumerate() {
            self.alphas.insert((m, start + i), a);
            p = &p - &self.polys[start + i].scale(a);
        }
        let refined = refine_against_hankel(f, m, p)?;
        self.rederive_coefficients(m, j, &lam_prev, &refined);
        Ok(refined)
    }

    /// Re-express `λ p_{m-1} - p_m` in the monic basis so that the stored
    /// `α` and `γ` reproduce the refined `p_m` exactly.
    fn rederive_coefficients(&mut self, m: usize, j: usize, lam_prev: &Polynomial, p: &Polynomial) {
        let start = self.nu[j];
        let mut rest = lam_prev - p;
        for i in (start..m).rev() {
            let a = rest.coeff(i);
            self.alphas.insert((m, i), a);
            rest = &rest - &self.polys[i].scale(a);
        }
        if j >= 1 {
            let prev_start = self.nu[j - 1];
            let gamma = rest.coeff(prev_start);
            self.gammas.insert(m, gamma);
        }
    }

    /// Highest degree `n`.
    pub fn degree(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn poly(&self, m: usize) -> &Polynomial {
        &self.polys[m]
    }

    pub fn kinds(&self) -> &[PolyKind] {
        &self.kinds
    }

    pub fn alphas(&self) -> &BTreeMap<(usize, usize), C64> {
        &self.alphas
    }

    pub fn alpha(&self, m: usize, i: usize) -> C64 {
        self.alphas.get(&(m, i)).copied().unwrap_or_else(C64::zero)
    }

    /// `β_1..β_n`.
    pub fn betas(&self) -> &[C64] {
        &self.betas
    }

    pub fn gammas(&self) -> &BTreeMap<usize, C64> {
        &self.gammas
    }

    pub fn gamma(&self, m: usize) -> C64 {
        self.gammas.get(&m).copied().unwrap_or_else(C64::zero)
    }

    /// Regular indices `ν(0) = 0, ν(1), ...` up to the degree.
    pub fn nu(&self) -> &[usize] {
        &self.nu
    }

    /// `ν(1)`, if the analysis found one (possibly past the degree).
    pub fn first_regular(&self) -> Option<usize> {
        self.known_regular.get(1).copied()
    }

    /// Smallest known regular index above `n`.
    pub fn regular_after(&self, n: usize) -> Option<usize> {
        self.known_regular.iter().copied().find(|&r| r > n)
    }

    pub fn block_tridiagonal(&self) -> BlockTridiagonal {
        let n = self.degree();
        let mut t = CMatrix::zeros(n, n);
        for m in 1..=n {
            let row = m - 1;
            if m < n {
                t[(row, m)] = self.betas[m - 1];
            }
            for (&(mm, i), &a) in self.alphas.range((m, 0)..(m + 1, 0)) {
                debug_assert_eq!(mm, m);
                t[(row, i)] += a;
            }
            if let Some(&g) = self.gammas.get(&m) {
                let j = self.nu.iter().rposition(|&r| r < m).unwrap();
                t[(row, self.nu[j - 1])] += g;
            }
        }
        let beta_next = self.betas.last().copied().unwrap_or_else(C64::one);
        BlockTridiagonal::new(t, self.nu.clone(), beta_next, false)
    }

    /// Largest `|L(p_m λ^j)|` over the orthogonality range of each `p_m`,
    /// relative to `Σ_i |c_i| |m_{i+j}|`. Regular polynomials are also tested
    /// for their extended orthogonality up to `ν(t+1) - 2`, as far as the
    /// moments reach (bilinear forms: up to `2 N + 2n`).
    pub fn verify_orthogonality(&self, f: &Functional) -> Result<OrthogonalityReport> {
        let n = self.degree();
        let cap = f.available(2 * f.dimension().unwrap_or(0) + 2 * n + 1);
        let mut entries = Vec::with_capacity(n + 1);
        let mut overall: f64 = 0.0;
        for (m, (p, &kind)) in self.polys.iter().zip(&self.kinds).enumerate() {
            let nominal = match kind {
                PolyKind::Regular => match self.extended.get(&m).copied().flatten() {
                    Some(d) => Some(d),
                    None => Some(cap as isize),
                },
                PolyKind::QuasiOrthogonal(q) => Some(m as isize - q as isize - 1),
            };
            let upto = nominal
                .filter(|&u| u >= 0)
                .map(|u| (u as usize).min(cap.saturating_sub(m)));
            let upto = if m > cap { None } else { upto };
            let mut worst: f64 = 0.0;
            if let Some(u) = upto {
                let moments = f.moments_upto(m + u)?;
                for jj in 0..=u {
                    let (val, scale) =
                        p.coeffs()
                            .iter()
                            .enumerate()
                            .fold((C64::zero(), 0.0), |(v, s), (i, c)| {
                                (
                                    v + c * moments[i + jj],
                                    s + c.norm() * moments[i + jj].norm(),
                                )
                            });
                    let r = if scale > 0.0 { val.norm() / scale } else { 0.0 };
                    worst = worst.max(r);
                }
            }
            overall = overall.max(worst);
            entries.push(OrthogonalityEntry {
                index: m,
                kind,
                checked_upto: upto,
                max_residual: worst,
            });
        }
        Ok(OrthogonalityReport {
            entries,
            max_residual: overall,
        })
    }
}

/// Quasi-orthogonality order of `p_m = λ^{m - ν(t)} p_{ν(t)}`: orthogonal to
/// `λ^j` for `j <= ν(t+1) - 2 - (m - ν(t))`.
fn gap_order(analysis: &HankelAnalysis, start: usize, m: usize) -> usize {
    let next = match analysis.next_regular(start) {
        Some(next) => next,
        None if analysis.tail_certified() => return 0,
        None => analysis.len() + 1,
    };
    (2 * m + 1).saturating_sub(start + next)
}

/// Symmetric complex Jacobi matrix of a functional quasi-definite on `P_n`,
/// from the monic three-term recurrence with principal square roots for the
/// off-diagonal entries.
pub fn jacobi_matrix(f: &Functional, n: usize, tol: &TolerancePolicy) -> Result<BlockTridiagonal> {
    let analysis = HankelAnalysis::compute(f, n, tol)?;
    if let Some(k) = (0..n).find(|&k| analysis.zero_at(k) != Some(false)) {
        return Err(Error::NotQuasiDefinite { index: k });
    }
    let mut j = CMatrix::zeros(n, n);
    let mut prev = Polynomial::zero();
    let mut cur = Polynomial::one();
    let mut h_prev = C64::one();
    let mut beta_next = C64::one();
    for k in 0..n {
        let h = pair(f, &cur, &cur)?;
        let a = pair(f, &cur.shift(1), &cur)? / h;
        let b = h / h_prev;
        j[(k, k)] = a;
        if k > 0 {
            let s = b.sqrt();
            j[(k, k - 1)] = s;
            j[(k - 1, k)] = s;
        }
        let next =
            &(&cur.shift(1) - &cur.scale(a)) - &prev.scale(if k > 0 { b } else { C64::zero() });
        prev = cur;
        cur = next;
        h_prev = h;
        if k + 1 == n && 2 * n <= f.available(2 * n) {
            let h_n = pair(f, &cur, &cur)?;
            beta_next = (h_n / h).sqrt();
        }
    }
    Ok(BlockTridiagonal::new(
        j,
        (0..=n).collect(),
        beta_next,
        false,
    ))
}
