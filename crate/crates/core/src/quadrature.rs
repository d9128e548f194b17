//! Gauss quadrature with multiple nodes and derivative weights for a
//! linear functional, and its matrix form `μ m_{ν(1)-1} e_1^T f(T_n) e_{ν(1)}`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::fop::{BlockTridiagonal, FopSequence};
use crate::functional::Functional;
use crate::linalg::{eigenvalues, CMatrix, Lu};
use crate::poly::{falling_factorial, Polynomial};
use crate::tolerance::TolerancePolicy;
use crate::C64;

/// Largest `d` with the rule exact on `P_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    /// Not even `m_0` is reproduced.
    None,
    Degree(usize),
    /// Exact on every moment that was checked, up to this index.
    AtLeast(usize),
}

impl Exactness {
    /// Lower bound on the degree of exactness, if any.
    pub fn lower_bound(&self) -> Option<usize> {
        match *self {
            Exactness::None => None,
            Exactness::Degree(d) | Exactness::AtLeast(d) => Some(d),
        }
    }
}

/// One distinct node with its multiplicity and derivative weights
/// `ω_{i,0..s_i-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureNode {
    pub node: C64,
    pub weights: Vec<C64>,
}

impl QuadratureNode {
    pub fn multiplicity(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<QuadratureNode>,
    n: usize,
    prefactor: C64,
    nu1: usize,
    exactness: Exactness,
    source: Option<BlockTridiagonal>,
    suspect: Vec<usize>,
    cluster_radius: f64,
    gauss_residual: f64,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[QuadratureNode] {
        &self.nodes
    }

    /// Total number of nodes counted with multiplicity.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `μ m_{ν(1)-1}`.
    pub fn prefactor(&self) -> C64 {
        self.prefactor
    }

    pub fn nu1(&self) -> usize {
        self.nu1
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn source(&self) -> Option<&BlockTridiagonal> {
        self.source.as_ref()
    }

    /// Nodes whose last weight `ω_{i,s_i-1}` is within `residual_tol` of zero
    /// relative to the largest weight.
    pub fn suspect_nodes(&self) -> &[usize] {
        &self.suspect
    }

    /// Clustering radius that produced the node structure.
    pub fn cluster_radius(&self) -> f64 {
        self.cluster_radius
    }

    /// Relative defect on `m_n..m_{2n-1}` of the chosen node structure.
    pub fn gauss_residual(&self) -> f64 {
        self.gauss_residual
    }

    pub fn is_zero_rule(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `G_n(p)` for a polynomial.
    pub fn apply_polynomial(&self, p: &Polynomial) -> C64 {
        apply_quadrature(self, |z, j| {
            Ok::<_, core::convert::Infallible>(p.eval_derivative(z, j))
        })
        .unwrap_or_else(|e| match e {})
    }

    /// `G_n(λ^k)` split into value and the sum of absolute terms.
    fn monomial(&self, k: usize) -> (C64, f64) {
        let mut val = C64::zero();
        let mut abs = 0.0;
        for nd in &self.nodes {
            for (j, w) in nd.weights.iter().enumerate() {
                if j > k {
                    break;
                }
                let t = *w * nd.node.powu((k - j) as u32) * falling_factorial(k, j);
                val += t;
                abs += t.norm();
            }
        }
        (val, abs)
    }

    /// Drop trailing weights that vanish to `residual_tol` (relative to the
    /// largest weight), removing nodes left with none.
    pub fn pruned(&self, tol: &TolerancePolicy) -> Self {
        let wmax = self.max_weight();
        let mut nodes = Vec::new();
        for nd in &self.nodes {
            let mut w = nd.weights.clone();
            while w
                .last()
                .is_some_and(|x| x.norm() <= tol.residual_tol * wmax)
            {
                w.pop();
            }
            if !w.is_empty() {
                nodes.push(QuadratureNode {
                    node: nd.node,
                    weights: w,
                });
            }
        }
        let n = nodes.iter().map(QuadratureNode::multiplicity).sum();
        Self {
            nodes,
            n,
            suspect: Vec::new(),
            ..self.clone()
        }
    }

    fn max_weight(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|nd| nd.weights.iter())
            .map(|w| w.norm())
            .fold(0.0, f64::max)
    }
}

/// `G_n(f) = Σ_i Σ_j ω_{i,j} f^{(j)}(λ_i)`, with `f(λ, j)` returning the
/// `j`-th derivative at `λ`.
pub fn apply_quadrature<E>(
    rule: &QuadratureRule,
    mut f: impl FnMut(C64, usize) -> core::result::Result<C64, E>,
) -> core::result::Result<C64, E> {
    let mut acc = C64::zero();
    for nd in &rule.nodes {
        for (j, w) in nd.weights.iter().enumerate() {
            acc += *w * f(nd.node, j)?;
        }
    }
    Ok(acc)
}

/// `prefactor e_1^T p(T) e_{nu1}` by Horner's scheme on vectors.
pub fn matrix_form_evaluate(
    t: &BlockTridiagonal,
    p: &Polynomial,
    prefactor: C64,
    nu1: usize,
) -> C64 {
    let n = t.dim();
    if p.is_zero() || n == 0 || nu1 == 0 || nu1 > n {
        return C64::zero();
    }
    let mut e = vec![C64::zero(); n];
    e[nu1 - 1] = C64::one();
    let coeffs = p.coeffs();
    let mut x: Vec<C64> = e.iter().map(|&v| v * coeffs[coeffs.len() - 1]).collect();
    for &c in coeffs.iter().rev().skip(1) {
        x = t.matrix().matvec(&x);
        x[nu1 - 1] += c;
    }
    prefactor * x[0]
}

/// Residual table of the matching moment property.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingReport {
    pub prefactor: C64,
    pub nu1: usize,
    /// `|prefactor e_1^T T^k e_{ν(1)} - m_k| / max_{j<=k} |m_j|` per `k`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Compare `μ m_{ν(1)-1} e_1^T T^k e_{ν(1)}` with `m_k` for `k = 0..=k_max`.
/// `μ` comes from the superdiagonal of `T`, so any diagonal scaling of the
/// basis is accounted for.
pub fn matching_moment_check(
    t: &BlockTridiagonal,
    f: &Functional,
    k_max: usize,
) -> Result<MatchingReport> {
    let m = f.moments_upto(k_max)?;
    let nu1 = t.nu1().unwrap_or(1);
    let base = if nu1 >= 1 {
        f.moment(nu1 - 1)?
    } else {
        C64::zero()
    };
    let prefactor = t.mu() * base;
    let n = t.dim();
    let mut residuals = Vec::with_capacity(k_max + 1);
    let mut x = vec![C64::zero(); n];
    if nu1 >= 1 && nu1 <= n {
        x[nu1 - 1] = C64::one();
    }
    let mut scale: f64 = 0.0;
    for (k, mk) in m.iter().enumerate() {
        if k > 0 {
            x = t.matrix().matvec(&x);
        }
        let val = if n > 0 { prefactor * x[0] } else { C64::zero() };
        scale = scale.max(mk.norm());
        let err = (val - mk).norm();
        residuals.push(if scale > 0.0 { err / scale } else { err });
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(MatchingReport {
        prefactor,
        nu1,
        residuals,
        max_residual,
    })
}

/// Highest index checked when the functional has no horizon.
fn check_limit(f: &Functional, n: usize) -> usize {
    f.available(2 * f.dimension().unwrap_or(0).max(n) + 1)
}

/// Largest `d` (up to the horizon) with `|G(λ^j) - m_j| <= residual_tol`
/// relative to `max(|m_j|, Σ |terms of G(λ^j)|)` for every `j <= d`.
pub fn degree_of_exactness(
    rule: &QuadratureRule,
    f: &Functional,
    tol: &TolerancePolicy,
) -> Result<Exactness> {
    let limit = check_limit(f, rule.n);
    let m = f.moments_upto(limit)?;
    for (j, mj) in m.iter().enumerate() {
        let (g, abs) = rule.monomial(j);
        let scale = mj.norm().max(abs);
        let err = (g - mj).norm();
        let ok = if scale > 0.0 {
            err <= tol.residual_tol * scale
        } else {
            true
        };
        if !ok {
            return Ok(match j {
                0 => Exactness::None,
                _ => Exactness::Degree(j - 1),
            });
        }
    }
    Ok(Exactness::AtLeast(limit))
}

/// Weights of the interpolatory rule on the given nodes and multiplicities:
/// solve the confluent Vandermonde system against `m_0..m_{n-1}`.
fn confluent_weights(structure: &[(C64, usize)], m: &[C64]) -> Option<(Vec<Vec<C64>>, f64)> {
    let n: usize = structure.iter().map(|s| s.1).sum();
    if n == 0 {
        return Some((Vec::new(), 0.0));
    }
    // Substitute λ = c μ to keep the powers in range.
    let c = structure
        .iter()
        .map(|s| s.0.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let c = if c < 1.0 { 1.0 } else { c };
    let mut v = CMatrix::zeros(n, n);
    let mut col = 0;
    for &(node, s) in structure {
        let z = node / c;
        for j in 0..s {
            for k in j..n {
                v[(k, col)] = z.powu((k - j) as u32) * falling_factorial(k, j);
            }
            col += 1;
        }
    }
    let rhs: Vec<C64> = (0..n).map(|k| m[k] / Float::powi(c, k as i32)).collect();
    let lu = Lu::new(&v);
    let x = lu.solve(&rhs)?;
    if !x.iter().all(|&z| crate::is_finite(z)) {
        return None;
    }
    // Relative residual of the scaled system.
    let r = v.matvec(&x);
    let mut res: f64 = 0.0;
    for k in 0..n {
        let abs: f64 = (0..n).map(|i| (v[(k, i)] * x[i]).norm()).sum::<f64>() + rhs[k].norm();
        let err = (r[k] - rhs[k]).norm();
        if abs > 0.0 {
            res = res.max(err / abs);
        }
    }
    let mut out = Vec::with_capacity(structure.len());
    let mut idx = 0;
    for &(_, s) in structure {
        out.push(
            (0..s)
                .map(|j| x[idx + j] * Float::powi(c, j as i32))
                .collect(),
        );
        idx += s;
    }
    Some((out, res))
}

/// Single-linkage clusters of `points` at the given radius, as
/// (mean, size), sorted by real then imaginary part.
fn cluster(points: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let a = find(&mut parent, i);
                let b = find(&mut parent, j);
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<(usize, C64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += points[i];
                g.2 += 1;
            }
            None => groups.push((r, points[i], 1)),
        }
    }
    let mut out: Vec<(C64, usize)> = groups
        .into_iter()
        .map(|(_, sum, cnt)| (sum / cnt as f64, cnt))
        .collect();
    out.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                a.0.im
                    .partial_cmp(&b.0.im)
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
    });
    out
}

struct Candidate {
    structure: Vec<(C64, usize)>,
    weights: Vec<Vec<C64>>,
    radius: f64,
    gauss_residual: f64,
}

/// Relative defect `|G(λ^k) - m_k| / (|prefactor| ρ^k)` over `k` in `range`.
fn gauss_defect(
    structure: &[(C64, usize)],
    weights: &[Vec<C64>],
    m: &[C64],
    range: core::ops::RangeInclusive<usize>,
    prefactor: f64,
    rho: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for k in range {
        let mut g = C64::zero();
        for (&(node, _), w) in structure.iter().zip(weights) {
            for (j, wj) in w.iter().enumerate() {
                if j <= k {
                    g += *wj * node.powu((k - j) as u32) * falling_factorial(k, j);
                }
            }
        }
        let scale = (prefactor * Float::powi(rho, k as i32)).max(m[k].norm());
        let err = (g - m[k]).norm();
        worst = worst.max(if scale > 0.0 { err / scale } else { err });
    }
    worst
}

fn build_rule(
    structure_candidates: Vec<(Vec<(C64, usize)>, f64)>,
    m: &[C64],
    n: usize,
    prefactor: C64,
    rho: f64,
) -> Result<Candidate> {
    let hi = (2 * n - 1).min(m.len() - 1);
    let mut best: Option<Candidate> = None;
    let mut worst_weight_res: f64 = 0.0;
    for (structure, radius) in structure_candidates {
        if best
            .as_ref()
            .is_some_and(|b| b.structure.len() == structure.len())
        {
            continue;
        }
        let Some((weights, wres)) = confluent_weights(&structure, m) else {
            worst_weight_res = f64::INFINITY;
            continue;
        };
        if !(wres <= 1e-6) {
            worst_weight_res = worst_weight_res.max(wres);
            continue;
        }
        let defect = if hi >= n {
            gauss_defect(&structure, &weights, m, n..=hi, prefactor.norm(), rho)
        } else {
            0.0
        };
        let better = match &best {
            None => true,
            // Coarser structures must win clearly.
            Some(b) => defect < 0.1 * b.gauss_residual,
        };
        if better {
            best = Some(Candidate {
                structure,
                weights,
                radius,
                gauss_residual: defect,
            });
        }
    }
    best.ok_or(Error::IllConditionedWeights {
        residual: worst_weight_res,
    })
}

/// The `n`-node Gauss rule of the functional.
///
/// `n` must be a regular index of `seq`. For `n < ν(1)` the zero rule is
/// returned. Nodes are the eigenvalues of `T_n`, clustered single-linkage at
/// radius `cluster_tol ||T_n||`; if merging at coarser radii (up to
/// `sqrt(cluster_tol) ||T_n||`) gives a structure whose defect on
/// `m_n..m_{2n-1}` is at least ten times smaller, that structure is used.
pub fn gauss_quadrature(
    f: &Functional,
    n: usize,
    seq: &FopSequence,
    tol: &TolerancePolicy,
) -> Result<QuadratureRule> {
    tol.validate()?;
    let nu = seq.nu();
    if n > seq.degree() {
        return Err(Error::InsufficientPattern {
            degree: n,
            needed: n.saturating_sub(1),
            computed: seq.degree().saturating_sub(1),
        });
    }
    let nu1 = seq.first_regular();
    if n == 0 || nu1.is_none_or(|v| n < v) {
        let mut rule = QuadratureRule {
            nodes: Vec::new(),
            n,
            prefactor: C64::zero(),
            nu1: nu1.unwrap_or(n + 1),
            exactness: Exactness::None,
            source: (n > 0).then(|| seq.block_tridiagonal().leading(n)),
            suspect: Vec::new(),
            cluster_radius: 0.0,
            gauss_residual: 0.0,
        };
        rule.exactness = degree_of_exactness(&rule, f, tol)?;
        return Ok(rule);
    }
    if !nu.contains(&n) {
        return Err(Error::NotRegularDegree {
            degree: n,
            below: nu.iter().rev().copied().find(|&r| r < n && r > 0),
            above: seq.regular_after(n),
        });
    }
    let nu1 = nu1.unwrap();
    let t = seq.block_tridiagonal().leading(n);
    let prefactor = t.mu() * f.moment(nu1 - 1)?;
    let m = f.moments_upto(f.available(2 * n - 1).min(2 * n - 1))?;
    if m.len() < n {
        f.require(n - 1)?;
    }
    let eig = t.eigenvalues()?;
    let norm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let rho = norm.max(eig.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let mut candidates = Vec::new();
    let mut radius = tol.cluster_tol * norm;
    let top = Float::sqrt(tol.cluster_tol) * norm;
    loop {
        candidates.push((cluster(&eig, radius), radius));
        if radius >= top {
            break;
        }
        radius = (radius * 10.0).min(top);
    }
    let chosen = build_rule(candidates, &m, n, prefactor, rho)?;
    let nodes: Vec<QuadratureNode> = chosen
        .structure
        .iter()
        .zip(chosen.weights)
        .map(|(&(node, _), weights)| QuadratureNode { node, weights })
        .collect();
    let mut rule = QuadratureRule {
        nodes,
        n,
        prefactor,
        nu1,
        exactness: Exactness::None,
        source: Some(t),
        suspect: Vec::new(),
        cluster_radius: chosen.radius,
        gauss_residual: chosen.gauss_residual,
    };
    let wmax = rule.max_weight();
    rule.suspect = rule
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, nd)| {
            nd.weights
                .last()
                .is_none_or(|w| w.norm() <= tol.residual_tol * wmax)
        })
        .map(|(i, _)| i)
        .collect();
    rule.exactness = degree_of_exactness(&rule, f, tol)?;
    Ok(rule)
}

/// Interpolatory rule on the roots of `p` (with multiplicity), matching
/// `m_0..m_{deg p - 1}`. Roots come from the companion matrix and are
/// clustered at `cluster_tol` relative to their magnitude.
pub fn interpolatory_rule(
    f: &Functional,
    p: &Polynomial,
    tol: &TolerancePolicy,
) -> Result<QuadratureRule> {
    let monic = p.monic();
    let n = monic.degree().unwrap_or(0);
    let m = if n > 0 {
        f.moments_upto(n - 1)?
    } else {
        Vec::new()
    };
    let mut comp = CMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = C64::one();
    }
    for i in 0..n {
        comp[(i, n - 1)] = -monic.coeff(i);
    }
    let roots = eigenvalues(&comp)?;
    let norm = comp.frobenius_norm().max(1.0);
    let structure = cluster(&roots, Float::sqrt(tol.cluster_tol) * norm);
    // Exact roots of λ^k p are known to be repeated; snap tiny ones to zero.
    let structure: Vec<(C64, usize)> = structure
        .into_iter()
        .map(|(z, s)| {
            (
                if z.norm() <= Float::sqrt(tol.cluster_tol) * norm {
                    C64::zero()
                } else {
                    z
                },
                s,
            )
        })
        .collect();
    let (weights, _) = confluent_weights(&structure, &m).ok_or(Error::IllConditionedWeights {
        residual: f64::INFINITY,
    })?;
    let nodes: Vec<QuadratureNode> = structure
        .iter()
        .zip(weights)
        .map(|(&(node, _), weights)| QuadratureNode { node, weights })
        .collect();
    let mut rule = QuadratureRule {
        nodes,
        n,
        prefactor: C64::zero(),
        nu1: 0,
        exactness: Exactness::None,
        source: None,
        suspect: Vec::new(),
        cluster_radius: Float::sqrt(tol.cluster_tol) * norm,
        gauss_residual: 0.0,
    };
    rule.exactness = degree_of_exactness(&rule, f, tol)?;
    Ok(rule)
}
