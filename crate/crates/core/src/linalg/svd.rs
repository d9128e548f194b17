use alloc::vec::Vec;

use super::CMatrix;
use crate::C64;
use num_traits::Float;

/// Singular values (descending) by one-sided Jacobi on the columns.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let m = a.rows();
    let n = a.cols();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = (0..m).map(|i| cols[p][i].conj() * cols[q][i]).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= eps * Float::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                // Rotate column q by the phase of gamma, leaving a real coupling.
                let phase = gamma.conj() / g;
                for z in cols[q].iter_mut() {
                    *z *= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + Float::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / Float::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let x = cols[p][i];
                    let y = cols[q][i];
                    cols[p][i] = x * c - y * s;
                    cols[q][i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| Float::sqrt(c.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use alloc::vec;

    #[test]
    fn known_singular_values() {
        // Unitary times diag(3, 1e-3): singular values are exactly those.
        let s = 1.0 / 2f64.sqrt();
        let u = CMatrix::from_rows(&[
            vec![c64(s, 0.0), c64(0.0, s)],
            vec![c64(0.0, s), c64(s, 0.0)],
        ])
        .unwrap();
        let d = CMatrix::diagonal(&[c64(3.0, 0.0), c64(1e-3, 0.0)]);
        let sv = singular_values(&u.matmul(&d));
        assert!((sv[0] - 3.0).abs() < 1e-13);
        assert!((sv[1] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient() {
        let a = CMatrix::from_rows(&[
            vec![c64(1.0, 1.0), c64(2.0, 2.0)],
            vec![c64(0.0, 1.0), c64(0.0, 2.0)],
        ])
        .unwrap();
        let sv = singular_values(&a);
        assert!(sv[1] < 1e-14 * sv[0]);
    }
}
