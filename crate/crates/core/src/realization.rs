//! Realizations `(w, A, v)` of Markov sequences `m_j = w* A^j v`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fop::{BlockTridiagonal, FopSequence};
use crate::functional::{Functional, MomentSequence, Triplet};
use crate::hankel::HankelAnalysis;
use crate::lanczos::{classify_breakdown, look_ahead_lanczos, BreakdownKind, BreakdownReport};
use crate::linalg::{balance_with_scaling, eigenvalues, CMatrix};
use crate::tolerance::TolerancePolicy;
use crate::C64;

pub type RealizationTriplet = Triplet;

/// Upshift matrix of dimension `k + 1`, `v = (m_0..m_k)`, `w = e_1`.
pub fn trivial_realization(moments: &MomentSequence) -> RealizationTriplet {
    let n = moments.len();
    let a = CMatrix::from_fn(
        n,
        n,
        |i, j| if j == i + 1 { C64::one() } else { C64::zero() },
    );
    let mut w = vec![C64::zero(); n];
    w[0] = C64::one();
    Triplet::new(w, a, moments.as_slice().to_vec()).expect("upshift realization is well formed")
}

/// `w* A^j v` for `j = 0..=k_max`.
pub fn markov_parameters(triplet: &RealizationTriplet, k_max: usize) -> Result<MomentSequence> {
    MomentSequence::new(triplet.markov_parameters(k_max))
}

/// How the exactness of the returned realization was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// `ν(t) + ν(t+1) - 2 >= k` from the computed determinant pattern.
    Pattern { exact_to: usize },
    /// `ν(t+1)` lies beyond the computed pattern; the Markov parameters were
    /// compared with the moments directly.
    MarkovCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalRealization {
    pub triplet: RealizationTriplet,
    /// Dimension, a regular index `ν(t)`.
    pub n: usize,
    pub certificate: Certificate,
    /// Largest `|w* A^j v - m_j|` over `j <= k`, relative to the larger of
    /// `max |m_j|` and `max |w|* |A|^j |v|`.
    pub markov_residual: f64,
}

/// Largest `|w* A^j v - m_j|` relative to the largest of `|m_j|` and
/// `|w|* |A|^j |v|`; the latter bounds the rounding in `w* A^j v`.
fn markov_residual(t: &Triplet, m: &[C64]) -> f64 {
    let k = m.len() - 1;
    let got = t.markov_parameters(k);
    let modulus = |x: &[C64]| {
        x.iter()
            .map(|z| C64::new(z.norm(), 0.0))
            .collect::<Vec<_>>()
    };
    let n = t.dim();
    let abs = Triplet::new(
        modulus(t.w()),
        CMatrix::from_fn(n, n, |i, j| C64::new(t.a()[(i, j)].norm(), 0.0)),
        modulus(t.v()),
    )
    .expect("same shape as the source triplet");
    let scale = m
        .iter()
        .chain(&abs.markov_parameters(k))
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let err = got
        .iter()
        .zip(m)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

fn fop_triplet(f: &Functional, seq: &FopSequence) -> Result<Triplet> {
    let n = seq.degree();
    if n == 0 {
        return Triplet::new(Vec::new(), CMatrix::zeros(0, 0), Vec::new());
    }
    let t = seq.block_tridiagonal();
    let nu1 = seq.nu()[1];
    let mut w = vec![C64::zero(); n];
    w[0] = C64::one();
    let mut v = vec![C64::zero(); n];
    v[nu1 - 1] = t.mu() * f.moment(nu1 - 1)?;
    // Monic recurrences can make `T_n` badly scaled, which costs accuracy in
    // `w* T^j v`. A diagonal similarity leaves the Markov parameters alone.
    let (a, d) = balance_with_scaling(t.matrix());
    for (x, s) in w.iter_mut().zip(&d) {
        *x *= *s;
    }
    for (x, s) in v.iter_mut().zip(&d) {
        *x /= *s;
    }
    Triplet::new(w, a, v)
}

/// Smallest regular `n = ν(t)` whose Gauss rule is exact on `P_k`, realized
/// as `(e_1, T_n, μ m_{ν(1)-1} e_{ν(1)})` up to a balancing diagonal
/// similarity. Minimality is relative to the
/// determinant pattern of `analysis`.
pub fn minimal_partial_realization_with(
    f: &Functional,
    k: usize,
    analysis: &HankelAnalysis,
    tol: &TolerancePolicy,
) -> Result<MinimalRealization> {
    tol.validate()?;
    let m = f.moments_upto(k)?;
    let regular = analysis.regular_indices();
    for (idx, &n) in regular.iter().enumerate() {
        // Exact on P_d with d = ν(t) + ν(t+1) - 2, possibly negative.
        let bound: Option<isize> = match regular.get(idx + 1) {
            Some(&next) => Some((n + next) as isize - 2),
            None if analysis.tail_certified() => Some(isize::MAX),
            None => None,
        };
        if bound.is_some_and(|b| b < k as isize) {
            continue;
        }
        let seq = match FopSequence::build(f, n, analysis, tol) {
            Ok(s) => s,
            Err(Error::HorizonExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        let triplet = fop_triplet(f, &seq)?;
        let residual = markov_residual(&triplet, &m);
        let certificate = match bound {
            Some(b) => Certificate::Pattern {
                exact_to: usize::try_from(b).unwrap_or(usize::MAX),
            },
            None if residual <= tol.residual_tol => Certificate::MarkovCheck,
            None => continue,
        };
        return Ok(MinimalRealization {
            triplet,
            n,
            certificate,
            markov_residual: residual,
        });
    }
    Err(Error::NoRealizableDegree { k })
}

/// [`minimal_partial_realization_with`] using the floating determinant
/// pattern of `m_0..m_k`.
pub fn minimal_partial_realization(
    moments: &MomentSequence,
    k: usize,
    tol: &TolerancePolicy,
) -> Result<MinimalRealization> {
    let f = Functional::from_moments(moments.as_slice().to_vec())?;
    f.require(k)?;
    let analysis = HankelAnalysis::full(&f, tol, false)?;
    minimal_partial_realization_with(&f, k, &analysis, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MismatchReport {
    /// The `T_n` whose eigenvalues are the Ritz values.
    pub t: Option<BlockTridiagonal>,
    pub ritz: Vec<C64>,
    pub spectrum: Vec<C64>,
    pub max_min_distance: f64,
    pub breakdown: BreakdownReport,
    /// The run ended in an incurable breakdown, so the theorem applies.
    pub applicable: bool,
}

/// Run look-ahead Lanczos on `(A, v, w)` and compare the Ritz values of the
/// last closed `T_n` with the spectrum of `A`.
pub fn mismatch_check(
    a: &CMatrix,
    v: &[C64],
    w: &[C64],
    tol: &TolerancePolicy,
) -> Result<MismatchReport> {
    let (state, _) = look_ahead_lanczos(a, v, w, a.rows(), tol)?;
    let f = Functional::from_triplet(Triplet::new(w.to_vec(), a.clone(), v.to_vec())?);
    let analysis = HankelAnalysis::full(&f, tol, false)?;
    let breakdown = classify_breakdown(&state, &analysis);
    let t = match breakdown.kind {
        BreakdownKind::IncurableWithinBound if breakdown.step > 0 => {
            Some(state.t().leading(breakdown.step))
        }
        _ => state.closed_t(),
    };
    let ritz = match &t {
        Some(t) => t.eigenvalues()?,
        None => Vec::new(),
    };
    let spectrum = eigenvalues(a)?;
    let max_min_distance = ritz
        .iter()
        .map(|r| {
            spectrum
                .iter()
                .map(|s| (r - s).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(MismatchReport {
        t,
        ritz,
        spectrum,
        max_min_distance,
        breakdown,
        applicable: breakdown.kind == BreakdownKind::IncurableWithinBound,
    })
}
