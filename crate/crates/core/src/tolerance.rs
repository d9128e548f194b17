use crate::error::{Error, Result};

/// Thresholds that turn exact-arithmetic dichotomies (zero / nonzero,
/// equal / distinct) into floating-point decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    /// Relative threshold for declaring a Hankel determinant (or a Gram
    /// matrix in look-ahead Lanczos) singular.
    pub zero_det_tol: f64,
    /// Relative radius used to merge eigenvalues into one multiple node.
    pub cluster_tol: f64,
    /// Threshold for verification residuals.
    pub residual_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            zero_det_tol: 1e-10,
            cluster_tol: 1e-8,
            residual_tol: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn new(zero_det_tol: f64, cluster_tol: f64, residual_tol: f64) -> Result<Self> {
        let policy = Self {
            zero_det_tol,
            cluster_tol,
            residual_tol,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("zero_det_tol", self.zero_det_tol),
            ("cluster_tol", self.cluster_tol),
            ("residual_tol", self.residual_tol),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}
