//! Small dense complex linear algebra: just enough for Hankel determinants,
//! coefficient solves, eigenvalues of `T_n` and Gram-matrix rank tests.

mod eigen;
mod lu;
mod matrix;
mod svd;

pub use eigen::{balance, balance_with_scaling, eigenvalues, eigenvalues_hessenberg};
pub use lu::Lu;
pub use matrix::{dot, norm2, CMatrix};
pub use svd::singular_values;
