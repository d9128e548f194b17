//! Non-Hermitian Lanczos and its look-ahead variant.
//!
//! Both produce bases `V_n`, `W_n` of `K_n(A, v)` and `K_n(A*, w)` and the
//! lower Hessenberg `T_n` with `A V_n = V_n T_n^T + v̂_n e_n^T`. Row `n - 1`
//! of `T_n` holds the coefficients used to form `v_n`, in the same layout as
//! the recurrence matrix of the formal orthogonal polynomials.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::fop::BlockTridiagonal;
use crate::hankel::HankelAnalysis;
use crate::linalg::{dot, norm2, singular_values, CMatrix, Lu};
use crate::tolerance::TolerancePolicy;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownKind {
    None,
    Lucky,
    Serious,
    IncurableWithinBound,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    MaxSteps,
    /// `n` reached the dimension with every block closed.
    SpaceExhausted,
    /// `v̂_n` and/or `ŵ_n` vanished.
    VectorVanished {
        v: bool,
        w: bool,
    },
    /// Both vectors nonzero but `ŵ_n* v̂_n` vanished (relative measure).
    CouplingVanished {
        coupling: f64,
    },
    /// The look-ahead block starting at `start` could not be closed before
    /// the dimension was reached.
    BlockOpen {
        start: usize,
        size: usize,
    },
    /// The Hankel tail vanishes from `n` on.
    IncurableTail {
        from: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakdownReport {
    pub kind: BreakdownKind,
    pub step: usize,
    pub reason: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    LookAhead,
}

/// Snapshot of a stopped Lanczos run.
#[derive(Debug, Clone, PartialEq)]
pub struct LanczosState {
    variant: Variant,
    a: CMatrix,
    v: Vec<Vec<C64>>,
    w: Vec<Vec<C64>>,
    v_next: Vec<C64>,
    w_next: Vec<C64>,
    t: BlockTridiagonal,
    block_start: usize,
    omega: CMatrix,
    eta: Vec<C64>,
    step: usize,
    beta0: C64,
    stop: BreakdownReport,
}

impl LanczosState {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `v_0..v_{n-1}`.
    pub fn v(&self) -> &[Vec<C64>] {
        &self.v
    }

    /// `w_0..w_{n-1}`.
    pub fn w(&self) -> &[Vec<C64>] {
        &self.w
    }

    /// Unnormalized `v̂_n` from the last step.
    pub fn v_next(&self) -> &[C64] {
        &self.v_next
    }

    pub fn w_next(&self) -> &[C64] {
        &self.w_next
    }

    pub fn t(&self) -> &BlockTridiagonal {
        &self.t
    }

    /// Start `ν(t)` of the current (last) block.
    pub fn block_start(&self) -> usize {
        self.block_start
    }

    /// Gram matrix `W^{(t)*} V^{(t)}` of the current block.
    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    /// `η_0 = 1, η_1, ...`.
    pub fn eta(&self) -> &[C64] {
        &self.eta
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Normalization of the starting vector, `v = β_0 v_0`.
    pub fn beta0(&self) -> C64 {
        self.beta0
    }

    /// The stop condition as observed by the run itself.
    pub fn stop(&self) -> BreakdownReport {
        self.stop
    }

    /// Relative residuals of `A V_n = V_n T_n^T + v̂_n e_n^T` and
    /// `A* W_n = W_n T_n* + ŵ_n e_n^T`.
    pub fn krylov_residuals(&self) -> (f64, f64) {
        let n = self.v.len();
        let t = self.t.matrix();
        let scale = |basis: &[Vec<C64>]| {
            let b: f64 = Float::sqrt(basis.iter().map(|x| norm2(x).powi(2)).sum::<f64>());
            self.a.frobenius_norm().max(f64::MIN_POSITIVE) * b.max(f64::MIN_POSITIVE)
        };
        let mut rv: f64 = 0.0;
        let mut rw: f64 = 0.0;
        for k in 0..n {
            let mut x = self.a.matvec(&self.v[k]);
            let mut y = self.a.adjoint_matvec(&self.w[k]);
            for j in 0..n {
                let c = t[(k, j)];
                if !c.is_zero() {
                    axpy(&mut x, -c, &self.v[j]);
                    axpy(&mut y, -c.conj(), &self.w[j]);
                }
            }
            if k + 1 == n {
                axpy(&mut x, -C64::one(), &self.v_next);
                axpy(&mut y, -C64::one(), &self.w_next);
            }
            rv += Float::powi(norm2(&x), 2);
            rw += Float::powi(norm2(&y), 2);
        }
        (
            Float::sqrt(rv) / scale(&self.v),
            Float::sqrt(rw) / scale(&self.w),
        )
    }

    /// Largest `|w_i* v_j| / (‖w_i‖ ‖v_j‖)` over pairs in different blocks.
    pub fn biorthogonality_residual(&self) -> f64 {
        let bounds = block_ranges(self.t.boundaries(), self.v.len());
        let block_of = |i: usize| {
            bounds
                .iter()
                .position(|r| r.contains(&i))
                .unwrap_or(usize::MAX)
        };
        let mut worst: f64 = 0.0;
        for i in 0..self.w.len() {
            for j in 0..self.v.len() {
                if block_of(i) == block_of(j) {
                    continue;
                }
                let s = norm2(&self.w[i]) * norm2(&self.v[j]);
                if s > 0.0 {
                    worst = worst.max(dot(&self.w[i], &self.v[j]).norm() / s);
                }
            }
        }
        worst
    }

    /// `max |W_n* V_n - I|`, meaningful for the plain variant.
    pub fn identity_residual(&self) -> f64 {
        let n = self.v.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { C64::one() } else { C64::zero() };
                worst = worst.max((dot(&self.w[i], &self.v[j]) - target).norm());
            }
        }
        worst
    }

    /// `T` restricted to the blocks closed so far.
    pub fn closed_t(&self) -> Option<BlockTridiagonal> {
        let last = *self.t.boundaries().last()?;
        let end = if self.t.is_truncated() {
            last
        } else {
            self.t.dim()
        };
        (end > 0).then(|| self.t.leading(end))
    }
}

fn block_ranges(bounds: &[usize], n: usize) -> Vec<core::ops::Range<usize>> {
    let mut out = Vec::new();
    for (i, &b) in bounds.iter().enumerate() {
        let e = bounds.get(i + 1).copied().unwrap_or(n);
        if b < e {
            out.push(b..e);
        }
    }
    out
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn scaled(x: &[C64], s: C64) -> Vec<C64> {
    x.iter().map(|z| z * s).collect()
}

fn check_inputs(a: &CMatrix, v: &[C64], w: &[C64]) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            what: "Lanczos needs a square matrix",
        });
    }
    if v.len() != a.rows() || w.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            what: "starting vectors must match the matrix dimension",
        });
    }
    if !a.is_finite() || !v.iter().chain(w).all(|&z| crate::is_finite(z)) {
        return Err(Error::NonFinite {
            what: "Lanczos input",
        });
    }
    if norm2(v) == 0.0 {
        return Err(Error::ZeroStartVector { which: "v" });
    }
    if norm2(w) == 0.0 {
        return Err(Error::ZeroStartVector { which: "w" });
    }
    Ok(())
}

/// Accumulates `v̂` together with the size of the terms that formed it, so
/// that cancellation to roundoff level can be recognized.
struct Update {
    x: Vec<C64>,
    mass: f64,
}

impl Update {
    fn new(x: Vec<C64>) -> Self {
        let mass = norm2(&x);
        Self { x, mass }
    }

    fn sub(&mut self, c: C64, y: &[C64]) {
        if c.is_zero() {
            return;
        }
        self.mass += c.norm() * norm2(y);
        axpy(&mut self.x, -c, y);
    }

    fn vanished(&self, tol: f64) -> bool {
        norm2(&self.x) <= tol * self.mass
    }
}

fn tridiagonal_boundaries(n: usize) -> Vec<usize> {
    (0..=n).collect()
}

/// Non-Hermitian Lanczos with the three-term recurrence and
/// `β_n = sqrt(ŵ_n* v̂_n)` (principal branch), so that `W_n* V_n = I`.
pub fn lanczos(
    a: &CMatrix,
    v: &[C64],
    w: &[C64],
    n_max: usize,
    tol: &TolerancePolicy,
) -> Result<(LanczosState, BreakdownReport)> {
    tol.validate()?;
    check_inputs(a, v, w)?;
    let dim = a.rows();
    let coupling = dot(w, v);
    if coupling.norm() <= tol.residual_tol * norm2(v) * norm2(w) {
        return Err(Error::ZeroInitialCoupling {
            coupling: coupling.norm(),
        });
    }
    let beta0 = coupling.sqrt();
    let mut vs = vec![scaled(v, beta0.inv())];
    let mut ws = vec![scaled(w, beta0.conj().inv())];
    let mut alphas: Vec<C64> = Vec::new();
    let mut betas: Vec<C64> = Vec::new();
    let limit = n_max.min(dim);
    let mut stop = BreakdownReport {
        kind: BreakdownKind::None,
        step: 0,
        reason: StopReason::MaxSteps,
    };
    let mut v_next = vec![C64::zero(); dim];
    let mut w_next = vec![C64::zero(); dim];
    let mut n = 1;
    while n <= limit {
        let av = a.matvec(&vs[n - 1]);
        let aw = a.adjoint_matvec(&ws[n - 1]);
        let mut vh = Update::new(av);
        let mut wh = Update::new(aw);
        if n >= 2 {
            let b = betas[n - 2];
            vh.sub(b, &vs[n - 2]);
            wh.sub(b.conj(), &ws[n - 2]);
        }
        let alpha = dot(&ws[n - 1], &vh.x);
        alphas.push(alpha);
        vh.sub(alpha, &vs[n - 1]);
        wh.sub(alpha.conj(), &ws[n - 1]);
        let v_gone = vh.vanished(tol.residual_tol);
        let w_gone = wh.vanished(tol.residual_tol);
        let c = dot(&wh.x, &vh.x);
        let rel = c.norm() / (norm2(&wh.x) * norm2(&vh.x)).max(f64::MIN_POSITIVE);
        v_next = vh.x;
        w_next = wh.x;
        if n == limit {
            stop.reason = if n == dim {
                StopReason::SpaceExhausted
            } else {
                StopReason::MaxSteps
            };
            stop.step = n;
            if !(v_gone || w_gone) && rel > tol.zero_det_tol {
                betas.push(c.sqrt());
            }
            break;
        }
        if v_gone || w_gone {
            stop = BreakdownReport {
                kind: BreakdownKind::Lucky,
                step: n,
                reason: StopReason::VectorVanished {
                    v: v_gone,
                    w: w_gone,
                },
            };
            break;
        }
        if rel <= tol.zero_det_tol {
            stop = BreakdownReport {
                kind: BreakdownKind::Serious,
                step: n,
                reason: StopReason::CouplingVanished { coupling: rel },
            };
            break;
        }
        let beta = c.sqrt();
        betas.push(beta);
        vs.push(scaled(&v_next, beta.inv()));
        ws.push(scaled(&w_next, beta.conj().inv()));
        n += 1;
    }
    let size = alphas.len();
    let mut t = CMatrix::zeros(size, size);
    for k in 0..size {
        t[(k, k)] = alphas[k];
        if k + 1 < size {
            t[(k, k + 1)] = betas[k];
            t[(k + 1, k)] = betas[k];
        }
    }
    vs.truncate(size);
    ws.truncate(size);
    let beta_next = betas.get(size - 1).copied().unwrap_or_else(C64::zero);
    let t = BlockTridiagonal::new(t, tridiagonal_boundaries(size), beta_next, false);
    let omega = CMatrix::from_fn(1, 1, |_, _| dot(&ws[size - 1], &vs[size - 1]));
    let state = LanczosState {
        variant: Variant::Plain,
        a: a.clone(),
        v: vs,
        w: ws,
        v_next,
        w_next,
        t,
        block_start: size - 1,
        omega,
        eta: vec![C64::one()],
        step: size,
        beta0,
        stop,
    };
    Ok((state, stop))
}

/// Regularity of a block Gram matrix after scaling rows and columns by the
/// vector norms: `σ_min >= zero_det_tol σ_max`.
fn omega_regular(omega: &CMatrix, ws: &[Vec<C64>], vs: &[Vec<C64>], tol: &TolerancePolicy) -> bool {
    let k = omega.rows();
    let normalized = CMatrix::from_fn(k, k, |i, j| {
        let s = norm2(&ws[i]) * norm2(&vs[j]);
        if s > 0.0 {
            omega[(i, j)] / s
        } else {
            C64::zero()
        }
    });
    let sv = singular_values(&normalized);
    let (hi, lo) = (sv[0], sv[k - 1]);
    hi > 0.0 && lo >= tol.zero_det_tol * hi
}

/// Look-ahead Lanczos. Blocks are closed as soon as their Gram matrix is
/// regular; inside a block the basis is continued by `A v_{n-1}` alone.
/// `v` is normalized to unit length at every step.
pub fn look_ahead_lanczos(
    a: &CMatrix,
    v: &[C64],
    w: &[C64],
    n_max: usize,
    tol: &TolerancePolicy,
) -> Result<(LanczosState, BreakdownReport)> {
    tol.validate()?;
    check_inputs(a, v, w)?;
    let dim = a.rows();
    let beta0 = C64::new(norm2(v), 0.0);
    let mut vs = vec![scaled(v, beta0.inv())];
    let mut ws = vec![scaled(w, beta0.conj().inv())];
    let limit = n_max.min(dim);
    let mut t = CMatrix::zeros(limit.max(1), limit.max(1));
    let mut nu: Vec<usize> = vec![0];
    let mut eta: Vec<C64> = vec![C64::one()];
    let mut beta_next = C64::zero();
    let mut stop = BreakdownReport {
        kind: BreakdownKind::None,
        step: 0,
        reason: StopReason::MaxSteps,
    };
    let mut v_next = vec![C64::zero(); dim];
    let mut w_next = vec![C64::zero(); dim];
    let mut omega = CMatrix::zeros(0, 0);
    let mut n = 1;
    while n <= limit {
        let start = *nu.last().unwrap();
        let size = n - start;
        omega = CMatrix::from_fn(size, size, |i, j| dot(&ws[start + i], &vs[start + j]));
        let regular = omega_regular(&omega, &ws[start..n], &vs[start..n], tol);
        let av = a.matvec(&vs[n - 1]);
        let aw = a.adjoint_matvec(&ws[n - 1]);
        let mut vh = Update::new(av.clone());
        let mut wh = Update::new(aw);
        let row = n - 1;
        if regular {
            let tb = nu.len() - 1;
            if tb >= 1 {
                let prev = nu[tb - 1];
                // w*_{start-1} A v_{n-1} reduces to β_start w*_start v_{n-1} by
                // block biorthogonality; the reduced form avoids cancellation.
                let gamma = t[(start - 1, start)] * omega[(0, size - 1)] / eta[tb];
                t[(row, prev)] += gamma;
                vh.sub(gamma, &vs[prev]);
                wh.sub(gamma.conj(), &ws[prev]);
            }
            // Inner products against the partially reduced vector; equal to
            // `W* A v` in exact arithmetic, with less cancellation.
            let rhs: Vec<C64> = (start..n).map(|i| dot(&ws[i], &vh.x)).collect();
            let coef = Lu::new(&omega)
                .solve(&rhs)
                .unwrap_or_else(|| vec![C64::zero(); size]);
            for (i, &c) in coef.iter().enumerate() {
                t[(row, start + i)] += c;
                vh.sub(c, &vs[start + i]);
                wh.sub(c.conj(), &ws[start + i]);
            }
            eta.push(dot(&ws[n - 1], &vs[start]));
            nu.push(n);
        }
        let v_gone = vh.vanished(tol.residual_tol);
        let w_gone = wh.vanished(tol.residual_tol);
        v_next = vh.x;
        w_next = wh.x;
        let beta = C64::new(norm2(&v_next), 0.0);
        if n == limit {
            stop.step = n;
            stop.reason = if n < dim {
                StopReason::MaxSteps
            } else if regular {
                StopReason::SpaceExhausted
            } else {
                stop.kind = BreakdownKind::Serious;
                StopReason::BlockOpen {
                    start,
                    size: n - start,
                }
            };
            if !(v_gone || w_gone) {
                beta_next = beta;
            }
            break;
        }
        if v_gone || w_gone {
            stop = BreakdownReport {
                kind: BreakdownKind::Lucky,
                step: n,
                reason: StopReason::VectorVanished {
                    v: v_gone,
                    w: w_gone,
                },
            };
            break;
        }
        t[(row, n)] = beta;
        vs.push(scaled(&v_next, beta.inv()));
        ws.push(scaled(&w_next, beta.conj().inv()));
        n += 1;
    }
    let size = n.min(limit).max(1);
    vs.truncate(size);
    ws.truncate(size);
    let t = t.leading(size);
    let last = *nu.last().unwrap();
    let truncated = last < size;
    let start = if truncated { last } else { nu[nu.len() - 2] };
    let boundaries: Vec<usize> = nu
        .iter()
        .copied()
        .filter(|&b| b < size || !truncated)
        .collect();
    let t = BlockTridiagonal::new(t, boundaries, beta_next, truncated);
    let state = LanczosState {
        variant: Variant::LookAhead,
        a: a.clone(),
        v: vs,
        w: ws,
        v_next,
        w_next,
        t,
        block_start: start,
        omega,
        eta,
        step: size,
        beta0,
        stop,
    };
    Ok((state, stop))
}

/// Map the stop condition and the Hankel tail onto a breakdown kind.
///
/// Both vectors vanishing is `Lucky`. Otherwise the run is
/// `IncurableWithinBound` when `Δ_{n-1} != 0` and every later determinant
/// vanishes, `n` being a closed block boundary of the run. A run that went
/// past such an `n` only did so on rounding noise. The run's own
/// classification is kept in the remaining cases.
pub fn classify_breakdown(state: &LanczosState, analysis: &HankelAnalysis) -> BreakdownReport {
    let stop = state.stop;
    if let StopReason::VectorVanished { v: true, w: true } = stop.reason {
        return stop;
    }
    if let Some(from) = analysis.incurable_from() {
        let closed = state
            .t
            .boundaries()
            .iter()
            .any(|&b| b == from && b <= state.v.len());
        if from > 0 && closed {
            return BreakdownReport {
                kind: BreakdownKind::IncurableWithinBound,
                step: from,
                reason: StopReason::IncurableTail { from },
            };
        }
    }
    stop
}
