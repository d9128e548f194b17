//! Formal orthogonal polynomials and Gauss quadrature for general complex
//! linear functionals.
//!
//! Given a complex moment sequence `m_0, m_1, ...` (or a bilinear form
//! `w* p(A) v`), this crate computes the Hankel determinant pattern, the
//! sequence of regular formal orthogonal polynomials with quasi-orthogonal
//! gap fillers, the block tridiagonal matrix `T_n` of their recurrences,
//! the n-node Gauss quadrature with multiple nodes and derivative weights,
//! the plain and look-ahead non-Hermitian Lanczos processes, and minimal
//! partial realizations of Markov sequences.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod fop;
pub mod functional;
pub mod hankel;
pub mod lanczos;
pub mod linalg;
pub mod poly;
pub mod quadrature;
pub mod realization;
pub mod tolerance;

pub use error::{Error, Result};
pub use fop::{BlockTridiagonal, FopSequence, PolyKind};
pub use functional::{Functional, MomentSequence, Triplet};
pub use hankel::{
    DegreeClassification, DegreeKind, ExactnessBound, HankelAnalysis, KroneckerIndex,
};
pub use lanczos::{BreakdownKind, BreakdownReport, LanczosState, StopReason};
pub use linalg::CMatrix;
pub use poly::Polynomial;
pub use quadrature::{Exactness, QuadratureNode, QuadratureRule};
pub use realization::{MinimalRealization, MismatchReport, RealizationTriplet};
pub use tolerance::TolerancePolicy;

/// Complex scalar used throughout: double precision real and imaginary parts.
pub type C64 = num_complex::Complex64;

/// Shorthand constructor for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
