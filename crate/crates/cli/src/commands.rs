//! The subcommands. Each returns the full report as a JSON value.

use std::io::Read;

use momenta_core::hankel::{ExactnessBound, HankelAnalysis, KroneckerIndex};
use momenta_core::lanczos::{classify_breakdown, lanczos, look_ahead_lanczos};
use momenta_core::quadrature::{gauss_quadrature, matching_moment_check};
use momenta_core::realization::{minimal_partial_realization_with, mismatch_check, Certificate};
use momenta_core::{BlockTridiagonal, Error, Exactness, FopSequence, Functional, TolerancePolicy};
use serde_json::{json, Map, Value};

use crate::problem::{self, Problem};
use crate::report::{self, real};
use crate::{Cli, CliError, Command, Flags};

fn read_input(path: &str, stdin: &mut dyn Read) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    if path == "-" {
        stdin.read_to_end(&mut bytes).map_err(CliError::Io)?;
    } else {
        bytes = std::fs::read(path).map_err(CliError::Io)?;
    }
    Ok(bytes)
}

fn load(path: &str, stdin: &mut dyn Read) -> Result<(Problem, String), CliError> {
    let bytes = read_input(path, stdin)?;
    let text =
        std::str::from_utf8(&bytes).map_err(|_| CliError::Input("input is not UTF-8".into()))?;
    Ok((problem::parse(text)?, report::digest(&bytes)))
}

/// File tolerances overridden by command-line flags.
fn tolerances(base: TolerancePolicy, flags: &Flags) -> Result<TolerancePolicy, CliError> {
    Ok(TolerancePolicy::new(
        flags.tol_zero.unwrap_or(base.zero_det_tol),
        flags.tol_cluster.unwrap_or(base.cluster_tol),
        flags.tol_residual.unwrap_or(base.residual_tol),
    )?)
}

pub fn execute(cli: &Cli, echo: &[String], stdin: &mut dyn Read) -> Result<Value, CliError> {
    let flags = &cli.flags;
    if let Command::Analyze {
        pattern: Some(p), ..
    } = &cli.command
    {
        let tol = tolerances(TolerancePolicy::default(), flags)?;
        let payload = analyze_pattern(p, flags)?;
        return Ok(report::envelope(
            echo,
            &report::digest(p.as_bytes()),
            report::tolerances(&tol, true),
            payload,
        ));
    }
    let path = match &cli.command {
        Command::Analyze { input, .. } => input.as_deref().expect("clap requires input or pattern"),
        Command::Quadrature { input, .. }
        | Command::Lanczos { input, .. }
        | Command::Realize { input, .. }
        | Command::Verify { input } => input,
    };
    let (problem, digest) = load(path, stdin)?;
    let tol = tolerances(problem.tolerances, flags)?;
    let payload = match &cli.command {
        Command::Analyze { .. } => analyze(&problem, &tol, flags)?,
        Command::Quadrature { n, .. } => quadrature(&problem, *n, &tol, flags)?,
        Command::Lanczos {
            n_max, look_ahead, ..
        } => run_lanczos(&problem, *n_max, *look_ahead, &tol, flags)?,
        Command::Realize { k, .. } => realize(&problem, *k, &tol, flags)?,
        Command::Verify { .. } => verify(&problem, &tol, flags)?,
    };
    Ok(report::envelope(
        echo,
        &digest,
        report::tolerances(&tol, flags.exact),
        payload,
    ))
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("payloads are objects"),
    }
}

fn parse_pattern(p: &str) -> Result<Vec<bool>, CliError> {
    p.chars()
        .map(|c| match c {
            'x' | 'X' => Ok(false),
            '0' => Ok(true),
            _ => Err(CliError::Input(format!(
                "pattern character {c:?} is neither 'x' nor '0'"
            ))),
        })
        .collect()
}

fn analyze_pattern(p: &str, flags: &Flags) -> Result<Map<String, Value>, CliError> {
    let pattern = parse_pattern(p)?;
    if pattern.is_empty() {
        return Err(CliError::Input("pattern is empty".into()));
    }
    Ok(analysis_payload(
        &HankelAnalysis::from_pattern(&pattern),
        flags,
    ))
}

fn analyze(
    problem: &Problem,
    tol: &TolerancePolicy,
    flags: &Flags,
) -> Result<Map<String, Value>, CliError> {
    let f = problem.functional()?;
    let analysis = HankelAnalysis::full(&f, tol, flags.exact)?;
    Ok(analysis_payload(&analysis, flags))
}

fn analysis_payload(a: &HankelAnalysis, flags: &Flags) -> Map<String, Value> {
    let max_degree = flags.max_degree.unwrap_or(a.len());
    let classification: Vec<Value> = (0..=max_degree)
        .map(|n| {
            let kind = match a.classify_degree(n) {
                Ok(k) => report::snake(&format!("{k:?}")),
                Err(_) => "undetermined".into(),
            };
            json!({ "degree": n, "kind": kind })
        })
        .collect();
    let kronecker: Vec<Value> = a
        .kronecker()
        .iter()
        .map(|k| match *k {
            KroneckerIndex::Exact(n) => json!(n),
            KroneckerIndex::AtLeast(n) => json!({ "at_least": n }),
            KroneckerIndex::Unbounded => json!("unbounded"),
        })
        .collect();
    object(json!({
        "determinants": report::complex_list(a.deltas()),
        "relative_magnitudes": report::real_list(a.relative_magnitudes()),
        "pattern": a.pattern_string(),
        "regular_indices": a.regular_indices(),
        "kronecker": kronecker,
        "euclidean": a.euclidean(),
        "classification": classification,
        "incurable_from": a.incurable_from(),
        "tail_certified": a.tail_certified(),
    }))
}

fn bound_value(b: ExactnessBound) -> Value {
    match b {
        ExactnessBound::Degree(d) => json!({ "degree": d }),
        ExactnessBound::AtLeast(d) => json!({ "at_least": d }),
        ExactnessBound::Unbounded => json!("unbounded"),
    }
}

/// Largest moment index the matching moment property covers for a regular
/// `n`, capped by the available moments.
fn matching_range(a: &HankelAnalysis, f: &Functional, n: usize) -> usize {
    let cap = f.horizon().unwrap_or(usize::MAX);
    let d = match a.exactness_bound(n) {
        ExactnessBound::Degree(d) | ExactnessBound::AtLeast(d) => d,
        ExactnessBound::Unbounded => f
            .horizon()
            .or(f.dimension().map(|d| 2 * d))
            .unwrap_or(2 * n),
    };
    d.min(cap)
}

fn matching_payload(
    t: &BlockTridiagonal,
    a: &HankelAnalysis,
    f: &Functional,
) -> Result<Value, CliError> {
    let k_max = matching_range(a, f, t.dim());
    let rep = matching_moment_check(t, f, k_max)?;
    Ok(json!({
        "k_max": k_max,
        "residuals": report::real_list(&rep.residuals),
        "max_residual": real(rep.max_residual),
    }))
}

fn quadrature(
    problem: &Problem,
    n: usize,
    tol: &TolerancePolicy,
    flags: &Flags,
) -> Result<Map<String, Value>, CliError> {
    let f = problem.functional()?;
    let analysis = HankelAnalysis::full(&f, tol, flags.exact)?;
    if analysis.is_regular_degree(n) == Some(false) {
        return Err(Error::NotRegularDegree {
            degree: n,
            below: analysis.prev_regular(n),
            above: analysis.next_regular(n),
        }
        .into());
    }
    let seq = FopSequence::build(&f, n, &analysis, tol)?;
    let rule = gauss_quadrature(&f, n, &seq, tol)?;
    let nodes: Vec<Value> = rule
        .nodes()
        .iter()
        .map(|q| {
            json!({
                "node": report::complex(q.node),
                "multiplicity": q.multiplicity(),
                "weights": report::complex_list(&q.weights),
            })
        })
        .collect();
    let exactness = match rule.exactness() {
        Exactness::None => json!("none"),
        Exactness::Degree(d) => json!({ "degree": d }),
        Exactness::AtLeast(d) => json!({ "at_least": d }),
    };
    let t = match rule.source() {
        Some(t) => t.clone(),
        None => seq.block_tridiagonal().leading(n),
    };
    Ok(object(json!({
        "n": n,
        "nu1": rule.nu1(),
        "prefactor": report::complex(rule.prefactor()),
        "nodes": nodes,
        "exactness": exactness,
        "exactness_bound": bound_value(analysis.exactness_bound(n)),
        "suspect_nodes": rule.suspect_nodes(),
        "cluster_radius": real(rule.cluster_radius()),
        "gauss_residual": real(rule.gauss_residual()),
        "t": report::block_tridiagonal(&t),
        "matching": matching_payload(&t, &analysis, &f)?,
    })))
}

fn run_lanczos(
    problem: &Problem,
    n_max: Option<usize>,
    look_ahead: bool,
    tol: &TolerancePolicy,
    flags: &Flags,
) -> Result<Map<String, Value>, CliError> {
    let t = problem.triplet()?;
    let limit = n_max
        .unwrap_or(t.dim())
        .min(flags.max_degree.unwrap_or(usize::MAX));
    let run = if look_ahead {
        look_ahead_lanczos
    } else {
        lanczos
    };
    let (state, stop) = run(t.a(), t.v(), t.w(), limit, tol)?;
    let f = problem.functional()?;
    let analysis = HankelAnalysis::full(&f, tol, flags.exact)?;
    let (rv, rw) = state.krylov_residuals();
    Ok(object(json!({
        "variant": if look_ahead { "look_ahead" } else { "plain" },
        "n_max": limit,
        "steps": state.step(),
        "beta0": report::complex(state.beta0()),
        "t": report::block_tridiagonal(state.t()),
        "breakdown": report::breakdown(&stop),
        "classification": report::breakdown(&classify_breakdown(&state, &analysis)),
        "residuals": {
            "biorthogonality": real(state.biorthogonality_residual()),
            "identity": real(state.identity_residual()),
            "krylov_v": real(rv),
            "krylov_w": real(rw),
        },
    })))
}

fn realize(
    problem: &Problem,
    k: usize,
    tol: &TolerancePolicy,
    flags: &Flags,
) -> Result<Map<String, Value>, CliError> {
    problem.moments()?;
    let f = problem.functional()?;
    f.require(k)?;
    let analysis = HankelAnalysis::full(&f, tol, flags.exact)?;
    let r = minimal_partial_realization_with(&f, k, &analysis, tol)?;
    let certificate = match r.certificate {
        Certificate::Pattern { exact_to } => json!({ "pattern": { "exact_to": exact_to } }),
        Certificate::MarkovCheck => json!("markov_check"),
    };
    Ok(object(json!({
        "k": k,
        "dimension": r.n,
        "certificate": certificate,
        "triplet": {
            "A": report::matrix(r.triplet.a()),
            "v": report::complex_list(r.triplet.v()),
            "w": report::complex_list(r.triplet.w()),
        },
        "markov_parameters": report::complex_list(&r.triplet.markov_parameters(k)),
        "markov_residual": real(r.markov_residual),
    })))
}

fn verify(
    problem: &Problem,
    tol: &TolerancePolicy,
    flags: &Flags,
) -> Result<Map<String, Value>, CliError> {
    let t = problem.triplet()?;
    let rep = mismatch_check(t.a(), t.v(), t.w(), tol)?;
    let f = problem.functional()?;
    let analysis = HankelAnalysis::full(&f, tol, flags.exact)?;
    let matching = match &rep.t {
        Some(t) if t.dim() > 0 => matching_payload(t, &analysis, &f)?,
        _ => Value::Null,
    };
    Ok(object(json!({
        "breakdown": report::breakdown(&rep.breakdown),
        "mismatch_theorem": if rep.applicable { "applicable" } else { "not applicable" },
        "t": rep.t.as_ref().map(report::block_tridiagonal),
        "ritz": report::complex_list(&rep.ritz),
        "spectrum": report::complex_list(&rep.spectrum),
        "max_min_distance": real(rep.max_min_distance),
        "matching": matching,
    })))
}
