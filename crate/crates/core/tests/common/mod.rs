//! Fixtures, random functionals and independent oracles shared by the
//! integration suites.

#![allow(dead_code, clippy::needless_range_loop)]

use momenta_core::{c64, CMatrix, Functional, MomentSequence, Triplet, C64};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c64(x, 0.0)).collect()
}

/// Constant moments, `w = e_1` against `diag(1, 2)` and `v = (1, 1)`.
pub fn m_a(len: usize) -> Vec<f64> {
    vec![1.0; len]
}

pub fn m_a_triplet() -> Triplet {
    Triplet::new(
        real(&[1.0, 0.0]),
        CMatrix::diagonal(&real(&[1.0, 2.0])),
        real(&[1.0, 1.0]),
    )
    .unwrap()
}

/// Determinant pattern `(1, 0, -1)`.
pub fn m_b() -> Vec<f64> {
    vec![1.0, 0.0, 0.0, 1.0, 0.0]
}

/// `½δ_1 + ½δ_3`.
pub fn m_c(len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| (1.0 + 3f64.powi(k as i32)) / 2.0)
        .collect()
}

/// `f ↦ f(0) + f'(0)`.
pub fn m_e(len: usize) -> Vec<f64> {
    (0..len).map(|k| if k < 2 { 1.0 } else { 0.0 }).collect()
}

pub fn upshift(n: usize) -> CMatrix {
    CMatrix::from_fn(
        n,
        n,
        |i, j| if j == i + 1 { C64::one() } else { C64::zero() },
    )
}

pub fn e1(n: usize) -> Vec<C64> {
    let mut e = vec![C64::zero(); n];
    e[0] = C64::one();
    e
}

/// Moments of `s · L_B(p(λ + c))` with a random tail, keeping the pattern of
/// the gap fixture: `ν = (0, 1, 3, ...)`.
pub fn gap_class(r: &mut impl Rng, len: usize) -> Vec<C64> {
    let mut base = vec![1.0, 0.0, 0.0, 1.0, 0.0];
    while base.len() < len {
        base.push(r.gen_range(-1.0..1.0));
    }
    let c = c64(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    let s = c64(r.gen_range(0.5..2.0), r.gen_range(-1.0..1.0));
    (0..len)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            let mut binom = 1.0;
            for j in 0..=k {
                acc += c.powu((k - j) as u32) * base[j] * binom;
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            s * acc
        })
        .collect()
}

/// Zero pattern of the worked example, `true` where `Δ_k = 0`.
pub fn example_pattern() -> Vec<bool> {
    "xx0xx0000x000x".chars().map(|c| c == '0').collect()
}

/// `L(f) = Σ_i Σ_j ω_{i,j} f^{(j)}(x_i)`.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub nodes: Vec<C64>,
    pub weights: Vec<Vec<C64>>,
    /// Leading moments that vanish by construction and are reported as
    /// exact zeros rather than roundoff.
    pub leading_zeros: usize,
}

fn falling(k: usize, j: usize) -> f64 {
    (0..j).map(|i| (k - i) as f64).product()
}

impl DiscreteMeasure {
    pub fn total(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    pub fn moment(&self, k: usize) -> C64 {
        if k < self.leading_zeros {
            return C64::zero();
        }
        let mut s = C64::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            for (j, wj) in w.iter().enumerate() {
                if j <= k {
                    s += wj * x.powu((k - j) as u32) * falling(k, j);
                }
            }
        }
        s
    }

    pub fn moments(&self, len: usize) -> Vec<C64> {
        (0..len).map(|k| self.moment(k)).collect()
    }

    pub fn functional(&self, len: usize) -> Functional {
        Functional::from_moments(self.moments(len)).unwrap()
    }

    pub fn sequence(&self, len: usize) -> MomentSequence {
        MomentSequence::new(self.moments(len)).unwrap()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MeasureShape {
    pub distinct: usize,
    pub complex: bool,
    pub multiplicities: bool,
    /// Number of leading zero moments, giving `ν(1) = zeros + 1`.
    pub zeros: usize,
}

fn random_weight(r: &mut impl Rng, complex: bool) -> C64 {
    let mag = r.gen_range(0.5..1.5);
    let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    if complex {
        C64::from_polar(mag, r.gen_range(0.0..std::f64::consts::TAU))
    } else {
        c64(sign * mag, 0.0)
    }
}

/// Terms in generic position: nodes at jittered grid positions on the
/// annulus `0.8 <= |z| <= 1.25` or on `[-2, 2]`. Real measures have at most
/// five terms and complex ones eight; beyond that the Hankel matrices lose
/// conditioning faster than the default zero test tolerates.
pub fn random_measure(r: &mut impl Rng, shape: MeasureShape) -> DiscreteMeasure {
    let d = shape.distinct as f64;
    let mut nodes: Vec<C64> = Vec::new();
    if shape.complex {
        let offset = r.gen_range(0.0..std::f64::consts::TAU);
        for i in 0..shape.distinct {
            let angle = offset + std::f64::consts::TAU * (i as f64 + r.gen_range(-0.2..0.2)) / d;
            nodes.push(C64::from_polar(r.gen_range(0.8..1.25), angle));
        }
    } else {
        for i in 0..shape.distinct {
            nodes.push(c64(
                -2.0 + 4.0 * (i as f64 + 0.5 + r.gen_range(-0.25..0.25)) / d,
                0.0,
            ));
        }
    }
    let cap = if shape.complex { 8 } else { 5 };
    let mut total = shape.distinct;
    let weights: Vec<Vec<C64>> = nodes
        .iter()
        .map(|_| {
            let s = if shape.multiplicities && total < cap && r.gen_bool(0.5) {
                2
            } else {
                1
            };
            total += s - 1;
            (0..s).map(|_| random_weight(r, shape.complex)).collect()
        })
        .collect();
    let mut m = DiscreteMeasure {
        nodes,
        weights,
        leading_zeros: 0,
    };
    if shape.zeros > 0 {
        impose_leading_zeros(&mut m, shape.zeros);
    }
    m
}

/// Re-solve `ω_{i,0}` for the first `r` nodes so that `m_0..m_{r-1}` vanish.
fn impose_leading_zeros(m: &mut DiscreteMeasure, r: usize) {
    assert!(r < m.nodes.len());
    for i in 0..r {
        m.weights[i][0] = C64::zero();
    }
    let rest: Vec<C64> = (0..r).map(|k| m.moment(k)).collect();
    let a: Vec<Vec<C64>> = (0..r)
        .map(|k| (0..r).map(|i| m.nodes[i].powu(k as u32)).collect())
        .collect();
    let b: Vec<C64> = rest.iter().map(|z| -z).collect();
    let x = solve(a, b).expect("distinct nodes give a regular Vandermonde system");
    for i in 0..r {
        m.weights[i][0] = x[i];
    }
    m.leading_zeros = r;
}

/// Gaussian elimination with partial pivoting, written independently of the
/// library.
pub fn solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Option<Vec<C64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap())?;
        if a[p][k].norm() == 0.0 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
            let t = b[k];
            b[i] -= f * t;
        }
    }
    let mut x = vec![C64::zero(); n];
    for i in (0..n).rev() {
        let s: C64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Determinant by elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<C64>>) -> C64 {
    let n = a.len();
    let mut d = C64::one();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap())
            .unwrap();
        if a[p][k].norm() == 0.0 {
            return C64::zero();
        }
        if p != k {
            a.swap(k, p);
            d = -d;
        }
        d *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    d
}

/// Coefficients (lowest first) of `det(zI - T)` by evaluating on a circle and
/// inverting the discrete Fourier transform. The circle has the geometric
/// mean root modulus `|det T|^(1/n)` as radius, which keeps the coefficient
/// recovery well conditioned even when `T` is strongly non-normal.
pub fn charpoly_by_interpolation(t: &CMatrix) -> Vec<C64> {
    let n = t.rows();
    let entries: Vec<Vec<C64>> = (0..n)
        .map(|r| (0..n).map(|c| t[(r, c)]).collect())
        .collect();
    let mean_root = if n == 0 {
        1.0
    } else {
        det(entries).norm().powf(1.0 / n as f64)
    };
    let radius = if mean_root.is_normal() {
        mean_root
    } else {
        1.0
    };
    let pts = n + 1;
    let values: Vec<C64> = (0..pts)
        .map(|j| {
            let z = C64::from_polar(radius, std::f64::consts::TAU * j as f64 / pts as f64);
            let m: Vec<Vec<C64>> = (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| if r == c { z - t[(r, c)] } else { -t[(r, c)] })
                        .collect()
                })
                .collect();
            det(m)
        })
        .collect();
    (0..pts)
        .map(|k| {
            let s: C64 = (0..pts)
                .map(|j| {
                    values[j]
                        * C64::from_polar(1.0, -std::f64::consts::TAU * (j * k) as f64 / pts as f64)
                })
                .sum();
            s / (pts as f64 * radius.powi(k as i32))
        })
        .collect()
}

fn rational(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact rank of a rational matrix by Gaussian elimination.
pub fn rank(mut a: Vec<Vec<BigRational>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[r][c];
                for j in c..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Exact `Δ_k = 0` pattern of an integer sequence for `k <= max_index`.
pub fn exact_zero_pattern(m: &[i64], max_index: usize) -> Vec<bool> {
    (0..=max_index)
        .map(|k| {
            let h: Vec<Vec<BigRational>> = (0..=k)
                .map(|i| (0..=k).map(|j| rational(m[i + j])).collect())
                .collect();
            rank(h) <= k
        })
        .collect()
}

/// Linear complexity of `m_0..m_k`: the least `n` for which some monic
/// recurrence `m_{j+n} = Σ_{i<n} c_i m_{j+i}` holds for all `j <= k - n`.
/// This is the dimension of a minimal partial realization.
pub fn linear_complexity(m: &[i64]) -> usize {
    let len = m.len();
    for n in 0..=len {
        if n == len {
            return n;
        }
        let rows = len - n;
        let a: Vec<Vec<BigRational>> = (0..rows)
            .map(|j| (0..n).map(|i| rational(m[j + i])).collect())
            .collect();
        let aug: Vec<Vec<BigRational>> = (0..rows)
            .map(|j| {
                let mut row: Vec<BigRational> = (0..n).map(|i| rational(m[j + i])).collect();
                row.push(rational(m[j + n]));
                row
            })
            .collect();
        if rank(a) == rank(aug) {
            return n;
        }
    }
    len
}

/// Integer moments of a measure with integer nodes and weights.
pub fn integer_measure_moments(nodes: &[(i64, Vec<i64>)], len: usize) -> Vec<i64> {
    (0..len)
        .map(|k| {
            let mut s: i64 = 0;
            for (x, w) in nodes {
                for (j, wj) in w.iter().enumerate() {
                    if j <= k {
                        let f: i64 = (0..j).map(|i| (k - i) as i64).product();
                        s += wj * f * x.pow((k - j) as u32);
                    }
                }
            }
            s
        })
        .collect()
}

pub fn to_f64(m: &[i64]) -> Vec<f64> {
    m.iter().map(|&x| x as f64).collect()
}

/// Diagonal `A` with distinct entries, `v` all ones and `w` supported on
/// `mask`. Only the masked eigenvalues carry weight.
pub fn masked_instance(
    r: &mut impl Rng,
    dim: usize,
    support: usize,
) -> (CMatrix, Vec<C64>, Vec<C64>, Vec<C64>) {
    let m = random_measure(
        r,
        MeasureShape {
            distinct: dim,
            complex: true,
            multiplicities: false,
            zeros: 0,
        },
    );
    let mut idx: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        idx.swap(i, r.gen_range(0..=i));
    }
    let mut w = vec![C64::zero(); dim];
    let mut kept = Vec::new();
    for &i in &idx[..support] {
        w[i] = random_weight(r, true);
        kept.push(m.nodes[i]);
    }
    (CMatrix::diagonal(&m.nodes), vec![C64::one(); dim], w, kept)
}

pub fn max_rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let scale = a
        .iter()
        .chain(b)
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}
