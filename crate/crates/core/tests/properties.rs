mod common;

use common::*;
use momenta_core::fop::FopSequence;
use momenta_core::hankel::HankelAnalysis;
use momenta_core::lanczos::{lanczos, look_ahead_lanczos};
use momenta_core::linalg::Lu;
use momenta_core::quadrature::{
    degree_of_exactness, gauss_quadrature, interpolatory_rule, matching_moment_check,
    matrix_form_evaluate,
};
use momenta_core::realization::{markov_parameters, minimal_partial_realization, mismatch_check};
use momenta_core::{
    c64, CMatrix, DegreeKind, Error, Exactness, Functional, MomentSequence, Polynomial,
    TolerancePolicy, Triplet, C64,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c64(re, im))
}

fn poly(max_len: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(complex(), 1..=max_len).prop_map(Polynomial::new)
}

fn shape(seed: u64) -> MeasureShape {
    MeasureShape {
        distinct: 2 + (seed % 4) as usize,
        complex: seed.is_multiple_of(2),
        multiplicities: seed.is_multiple_of(3),
        zeros: 0,
    }
}

fn random_triplet(r: &mut impl Rng, n: usize) -> Triplet {
    let e = |r: &mut _| c64(Rng::gen_range(r, -1.0..1.0), Rng::gen_range(r, -1.0..1.0));
    let a = CMatrix::from_fn(n, n, |_, _| e(r));
    let v = (0..n).map(|_| e(r)).collect();
    let w = (0..n).map(|_| e(r)).collect();
    Triplet::new(w, a, v).unwrap()
}

/// Brute-force existence of a monic degree-`n` FOP: the moment system
/// `H_{n-1} c = -(m_n, ..., m_{2n-1})` is solvable.
fn fop_exists(m: &[i64], n: usize) -> (bool, bool) {
    let q = |x: i64| BigRational::from_integer(BigInt::from(x));
    let h: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| q(m[i + j])).collect())
        .collect();
    let aug: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n).map(|j| q(m[i + j])).collect();
            row.push(q(m[i + n]));
            row
        })
        .collect();
    let r = rank(h);
    (r == rank(aug), r == n)
}

/// FOPs for a property case. `SingularAlphaSystem` is the documented outcome
/// for near-degenerate draws whose Δ still passes the zero test, so such
/// draws are rejected rather than failed.
fn fops(
    f: &Functional,
    n: usize,
    a: &HankelAnalysis,
    tol: &TolerancePolicy,
) -> Result<FopSequence, TestCaseError> {
    match FopSequence::build(f, n, a, tol) {
        Ok(seq) => Ok(seq),
        Err(e @ Error::SingularAlphaSystem { .. }) => Err(TestCaseError::reject(e.to_string())),
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}

/// Smallest relative leading Hankel determinant among `Δ_0..Δ_{k-1}`.
fn min_relative(a: &HankelAnalysis, k: usize) -> f64 {
    a.relative_magnitudes()[..k]
        .iter()
        .fold(1.0f64, |acc, &r| acc.min(r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn apply_is_linear(m in prop::collection::vec(complex(), 8), p in poly(8), q in poly(8), a in complex(), b in complex()) {
        let f = Functional::from_moments(m).unwrap();
        let lhs = f.apply(&(&p.scale(a) + &q.scale(b))).unwrap();
        let rhs = a * f.apply(&p).unwrap() + b * f.apply(&q).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm() + lhs.norm()) * 64.0);
    }

    #[test]
    fn monomials_give_moments(m in prop::collection::vec(complex(), 1..10), seed in any::<u64>()) {
        let f = Functional::from_moments(m.clone()).unwrap();
        for (j, mj) in m.iter().enumerate() {
            prop_assert_eq!(f.apply(&Polynomial::monomial(j)).unwrap(), *mj);
        }
        let t = random_triplet(&mut rng(seed), 3);
        let f = Functional::from_triplet(t.clone());
        let markov = t.markov_parameters(6);
        for (j, mj) in markov.iter().enumerate() {
            let got = f.apply(&Polynomial::monomial(j)).unwrap();
            prop_assert!((got - mj).norm() <= 1e-9 * mj.norm().max(1.0));
        }
    }

    #[test]
    fn generic_measures_are_quasi_definite(seed in any::<u64>()) {
        let m = random_measure(&mut rng(seed), shape(seed));
        let n = m.total();
        let f = m.functional(2 * n + 1);
        let a = HankelAnalysis::full(&f, &TolerancePolicy::default(), false).unwrap();
        for k in 0..n {
            prop_assert_eq!(a.zero_at(k), Some(false), "k = {}", k);
        }
        prop_assert_eq!(a.zero_at(n), Some(true));
    }

    #[test]
    fn triplet_rank_bound(seed in any::<u64>(), n in 1usize..6) {
        let f = Functional::from_triplet(random_triplet(&mut rng(seed), n));
        let a = HankelAnalysis::full(&f, &TolerancePolicy::default(), false).unwrap();
        prop_assert!(a.len() >= 2 * n);
        for k in n..a.len() {
            prop_assert_eq!(a.zero_at(k), Some(true), "k = {}", k);
        }
        prop_assert!(a.tail_certified());
    }

    #[test]
    fn degree_classification_matches_moment_systems(m in prop::collection::vec(-1i64..=1, 1..=7)) {
        let f = Functional::from_real_moments(&to_f64(&m)).unwrap();
        let a = HankelAnalysis::full(&f, &TolerancePolicy::default(), false).unwrap();
        for n in 1..=m.len() / 2 {
            let Ok(c) = a.classify_degrees(n) else { break };
            let (exists, regular) = fop_exists(&m, n);
            let want = match (exists, regular) {
                (_, true) => DegreeKind::Regular,
                (true, false) => DegreeKind::Singular,
                (false, _) => DegreeKind::Nonexistent,
            };
            prop_assert_eq!(c.kind(n), Some(want), "n = {}", n);
        }
    }

    #[test]
    fn fop_recurrence_rows(seed in any::<u64>()) {
        let mut r = rng(seed);
        let moments = if seed % 2 == 0 {
            gap_class(&mut r, 14)
        } else {
            let m = random_measure(&mut r, shape(seed));
            m.moments(2 * m.total() + 2)
        };
        let f = Functional::from_moments(moments).unwrap();
        let tol = TolerancePolicy::default();
        let a = HankelAnalysis::full(&f, &tol, false).unwrap();
        let n = *a.regular_indices().iter().rfind(|&&n| n <= 6).unwrap();
        prop_assume!(n >= 1);
        let seq = fops(&f, n, &a, &tol)?;
        let t = seq.block_tridiagonal();
        let lambda = Polynomial::monomial(1);
        for i in 0..n {
            let mut rhs = Polynomial::zero();
            for j in 0..=n {
                let c = if j < n { t.matrix()[(i, j)] } else if i + 1 == n { seq.betas()[n - 1] } else { C64::new(0.0, 0.0) };
                rhs = &rhs + &seq.poly(j).scale(c);
            }
            let diff = &(&lambda * seq.poly(i)) - &rhs;
            let scale = rhs.max_abs_coeff().max(1.0);
            prop_assert!(diff.max_abs_coeff() <= 1e-9 * scale, "row {}", i);
        }
    }

    #[test]
    fn gap_polynomials_are_shifted_regular_ones(seed in any::<u64>()) {
        let f = Functional::from_moments(gap_class(&mut rng(seed), 14)).unwrap();
        let tol = TolerancePolicy::default();
        let a = HankelAnalysis::full(&f, &tol, false).unwrap();
        let seq = FopSequence::build(&f, 3, &a, &tol).unwrap();
        let (q, rem) = seq.poly(2).div_rem(seq.poly(1));
        prop_assert!(rem.max_abs_coeff() <= 1e-12 * seq.poly(2).max_abs_coeff());
        prop_assert_eq!(q.degree(), Some(1));
        prop_assert!((q.coeff(1) - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(q.coeff(0).norm() < 1e-12);
    }

    #[test]
    fn quadrature_sum_equals_matrix_form(seed in any::<u64>(), p in poly(6)) {
        let mut r = rng(seed);
        let base = shape(seed);
        let m = random_measure(&mut r, MeasureShape { zeros: (seed % 3) as usize % base.distinct, ..base });
        let n = m.total();
        let f = m.functional(2 * n + 2);
        let tol = TolerancePolicy::default();
        let a = HankelAnalysis::full(&f, &tol, false).unwrap();
        let seq = fops(&f, n, &a, &tol)?;
        let rule = gauss_quadrature(&f, n, &seq, &tol).unwrap();
        let d = rule.exactness().lower_bound().unwrap();
        let p = Polynomial::new(p.coeffs().iter().copied().take(d + 1).collect());
        let t = seq.block_tridiagonal();
        let lhs = rule.apply_polynomial(&p);
        let rhs = matrix_form_evaluate(&t, &p, rule.prefactor(), rule.nu1());
        let exact = f.apply(&p).unwrap();
        let scale = 1.0 + exact.norm() + p.max_abs_coeff();
        prop_assert!((lhs - rhs).norm() <= 1e-8 * scale, "{} vs {}", lhs, rhs);
        prop_assert!((lhs - exact).norm() <= 1e-8 * scale);
    }

    #[test]
    fn lanczos_invariants(seed in any::<u64>(), n in 2usize..7, look_ahead in any::<bool>()) {
        let t = random_triplet(&mut rng(seed), n);
        let tol = TolerancePolicy::default();
        let run = if look_ahead { look_ahead_lanczos } else { lanczos };
        let (st, _) = run(t.a(), t.v(), t.w(), n, &tol).unwrap();
        let f = Functional::from_triplet(t.clone());
        let a = HankelAnalysis::full(&f, &tol, false).unwrap();
        // Biorthogonality decays in proportion to the inverse coupling as a
        // run approaches breakdown, seen either in the Hankel pattern or, for
        // plain runs, in nearly orthogonal pairs v_j, w_j.
        let mut coupling = (1e-6 / min_relative(&a, st.step())).max(1.0);
        if !look_ahead {
            for (v, w) in st.v().iter().zip(st.w()) {
                let norm = |x: &[C64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let dot: C64 = w.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
                coupling = coupling.max(1e-1 * norm(v) * norm(w) / dot.norm());
            }
        }
        prop_assert!(st.biorthogonality_residual() <= tol.residual_tol * coupling);
        let (rv, rw) = st.krylov_residuals();
        prop_assert!(rv <= tol.residual_tol && rw <= tol.residual_tol, "{} {}", rv, rw);
        if let Some(closed) = st.closed_t() {
            let rep = matching_moment_check(&closed, &f, 2 * closed.dim() - 1).unwrap();
            prop_assert!(rep.max_residual <= 1e-8 * coupling, "{:?}", rep);
            // Compare the leading blocks on which the moment pattern and the
            // Lanczos run agree; the moment route can flag a tiny Δ as zero
            // that the vector recurrences still resolve.
            let seq = fops(&f, closed.dim(), &a, &tol)?;
            let fop_t = seq.block_tridiagonal();
            let shared = fop_t
                .boundaries()
                .iter()
                .zip(closed.boundaries())
                .take_while(|(x, y)| x == y)
                .count();
            prop_assert!(shared >= 2);
            let fop_blocks = fop_t.block_characteristic_polynomials();
            let lanczos_blocks = closed.block_characteristic_polynomials();
            for (x, y) in fop_blocks.iter().zip(&lanczos_blocks).take(shared - 1) {
                let d = x.degree().unwrap();
                // The moment route loses accuracy as the leading Hankel
                // determinants approach the zero threshold.
                let conditioning = min_relative(&a, d);
                let xc: Vec<C64> = (0..=d).map(|k| x.coeff(k)).collect();
                let yc: Vec<C64> = (0..=d).map(|k| y.coeff(k)).collect();
                prop_assert!(max_rel_diff(&xc, &yc) <= tol.residual_tol * coupling / conditioning);
            }
        }
    }

    #[test]
    fn realization_round_trip_and_similarity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_measure(&mut r, shape(seed));
        let len = 2 * m.total() + 2;
        let seq = m.sequence(len);
        let tol = TolerancePolicy::default();
        let k = r.gen_range(0..len);
        let real = match minimal_partial_realization(&seq, k, &tol) {
            Ok(real) => real,
            Err(e) => return Err(TestCaseError::fail(format!("k = {k}: {e}"))),
        };
        let markov = markov_parameters(&real.triplet, k).unwrap();
        let dim = real.triplet.dim();
        prop_assume!(dim > 0);
        // Rounding in w* A^j v is bounded by the same products taken over
        // the entrywise moduli.
        let abs = |z: &[C64]| z.iter().map(|x| C64::new(x.norm(), 0.0)).collect::<Vec<_>>();
        let t = &real.triplet;
        let modulus = Triplet::new(
            abs(t.w()),
            CMatrix::from_fn(dim, dim, |i, j| C64::new(t.a()[(i, j)].norm(), 0.0)),
            abs(t.v()),
        )
        .unwrap();
        let scale = modulus.markov_parameters(k).iter().map(|z| z.norm()).fold(0.0, f64::max);
        // Either the Hankel conditioning or the modulus products bound the
        // round trip; the latter is what the certificate uses.
        let f = Functional::from_moments(seq.as_slice().to_vec()).unwrap();
        let analysis = HankelAnalysis::full(&f, &tol, false).unwrap();
        let rel = min_relative(&analysis, real.n.max(1));
        let bound = 1e-9f64.max(1e-12 / rel);
        let max_m = seq.as_slice()[..=k].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale_bound = tol.residual_tol * scale / max_m;
        prop_assert!(max_rel_diff(markov.as_slice(), &seq.as_slice()[..=k]) <= bound.max(scale_bound));
        let b = CMatrix::from_fn(dim, dim, |i, j| {
            let off = c64(r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3));
            if i == j { off + 1.0 } else { off }
        });
        let inv = Lu::new(&b).inverse().unwrap();
        let moved = Triplet::new(
            b.adjoint().matvec(real.triplet.w()),
            inv.matmul(real.triplet.a()).matmul(&b),
            inv.matvec(real.triplet.v()),
        )
        .unwrap();
        let again = markov_parameters(&moved, k).unwrap();
        let err = again.as_slice().iter().zip(markov.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err <= tol.residual_tol * scale, "{} vs scale {}", err, scale);
    }

    #[test]
    fn incurable_ritz_values_are_eigenvalues(seed in any::<u64>(), dim in 2usize..8) {
        let mut r = rng(seed);
        let support = r.gen_range(1..dim);
        let (a, v, w, _) = masked_instance(&mut r, dim, support);
        let rep = mismatch_check(&a, &v, &w, &TolerancePolicy::default()).unwrap();
        let norm = (0..dim).map(|k| a[(k, k)].norm()).fold(0.0, f64::max);
        prop_assert!(rep.applicable);
        // A nearly cancelling masked w gives a small m_0 and a far from
        // normal T_n whose eigenvalues move like eps |T_n|^2 / |A|.
        let (state, _) = look_ahead_lanczos(&a, &v, &w, dim, &TolerancePolicy::default()).unwrap();
        let t = state.t().leading(rep.breakdown.step).matrix().frobenius_norm();
        let bound = (1e-8 * norm).max(1e-13 * t * t / norm);
        prop_assert!(rep.max_min_distance <= bound, "{} vs {}", rep.max_min_distance, bound);
    }
}

#[test]
fn gap_polynomial_rule_has_gauss_defect() {
    // p_2 = λ p_1 is orthogonal to P_0 only, so its rule is exact on P_2 and
    // not on P_3.
    let f = Functional::from_moments(real(&[1.0, 0.0, 0.0, 1.0, 0.0, 0.5, -0.25])).unwrap();
    let tol = TolerancePolicy::default();
    let a = HankelAnalysis::full(&f, &tol, false).unwrap();
    let seq = FopSequence::build(&f, 3, &a, &tol).unwrap();
    let rule = interpolatory_rule(&f, seq.poly(2), &tol).unwrap();
    assert_eq!(
        degree_of_exactness(&rule, &f, &tol).unwrap(),
        Exactness::Degree(2)
    );
}

#[test]
fn gap_polynomial_rules_collapse_to_gauss() {
    let mut r = rng(11);
    for _ in 0..10 {
        let f = Functional::from_moments(gap_class(&mut r, 14)).unwrap();
        let tol = TolerancePolicy::default();
        let a = HankelAnalysis::full(&f, &tol, false).unwrap();
        let seq = FopSequence::build(&f, 3, &a, &tol).unwrap();
        let gauss = gauss_quadrature(&f, 1, &seq, &tol).unwrap();
        let pruned = interpolatory_rule(&f, seq.poly(2), &tol)
            .unwrap()
            .pruned(&tol);
        assert_eq!(pruned.nodes().len(), 1);
        let (x, y) = (&pruned.nodes()[0], &gauss.nodes()[0]);
        assert!((x.node - y.node).norm() < 1e-9);
        assert_eq!(x.weights.len(), y.weights.len());
        for (p, q) in x.weights.iter().zip(&y.weights) {
            assert!((p - q).norm() < 1e-9 * q.norm());
        }
    }
}

#[test]
fn moment_sequence_rejects_empty_and_nonfinite() {
    assert!(MomentSequence::new(Vec::new()).is_err());
    assert!(MomentSequence::new(vec![c64(f64::NAN, 0.0)]).is_err());
    assert!(MomentSequence::from_real(&[1.0, f64::INFINITY]).is_err());
}
