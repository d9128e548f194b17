//! Problem files: a moment list or a matrix triplet, plus optional
//! tolerances.

use momenta_core::{c64, CMatrix, Functional, TolerancePolicy, Triplet, C64};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    moments: Option<Vec<[f64; 2]>>,
    #[serde(rename = "A")]
    a: Option<Vec<Vec<[f64; 2]>>>,
    v: Option<Vec<[f64; 2]>>,
    w: Option<Vec<[f64; 2]>>,
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    zero_det_tol: Option<f64>,
    cluster_tol: Option<f64>,
    residual_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Moments(Vec<C64>),
    Triplet(Triplet),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub input: Input,
    pub tolerances: TolerancePolicy,
}

impl Problem {
    pub fn functional(&self) -> Result<Functional, CliError> {
        Ok(match &self.input {
            Input::Moments(m) => Functional::from_moments(m.clone())?,
            Input::Triplet(t) => Functional::from_triplet(t.clone()),
        })
    }

    pub fn triplet(&self) -> Result<&Triplet, CliError> {
        match &self.input {
            Input::Triplet(t) => Ok(t),
            Input::Moments(_) => Err(CliError::Input(
                "this command needs a triplet input (A, v, w)".into(),
            )),
        }
    }

    pub fn moments(&self) -> Result<&[C64], CliError> {
        match &self.input {
            Input::Moments(m) => Ok(m),
            Input::Triplet(_) => Err(CliError::Input("this command needs a moment input".into())),
        }
    }
}

fn complex(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[re, im]| c64(re, im)).collect()
}

/// Parse a problem file. Tolerances missing from the file keep their
/// defaults.
pub fn parse(text: &str) -> Result<Problem, CliError> {
    let raw: RawProblem = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("malformed problem file: {e}")))?;
    let input = match (raw.moments, raw.a, raw.v, raw.w) {
        (Some(m), None, None, None) => {
            if m.is_empty() {
                return Err(CliError::Input("moment list is empty".into()));
            }
            Input::Moments(complex(&m))
        }
        (None, Some(a), Some(v), Some(w)) => {
            let n = a.len();
            if a.iter().any(|row| row.len() != n) {
                return Err(CliError::Input("A must be square".into()));
            }
            let rows: Vec<Vec<C64>> = a.iter().map(|r| complex(r)).collect();
            let matrix = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
            Input::Triplet(Triplet::new(complex(&w), matrix, complex(&v))?)
        }
        (None, ..) => {
            return Err(CliError::Input(
                "expected either \"moments\" or all of \"A\", \"v\", \"w\"".into(),
            ))
        }
        (Some(_), ..) => {
            return Err(CliError::Input(
                "\"moments\" cannot be combined with \"A\", \"v\", \"w\"".into(),
            ))
        }
    };
    let raw_tol = raw.tolerances.unwrap_or_default();
    let d = TolerancePolicy::default();
    let tolerances = TolerancePolicy {
        zero_det_tol: raw_tol.zero_det_tol.unwrap_or(d.zero_det_tol),
        cluster_tol: raw_tol.cluster_tol.unwrap_or(d.cluster_tol),
        residual_tol: raw_tol.residual_tol.unwrap_or(d.residual_tol),
    };
    Ok(Problem { input, tolerances })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_and_tolerances() {
        let p = parse(r#"{"moments": [[1, 0], [2, 0.5]], "tolerances": {"cluster_tol": 1e-6}}"#)
            .unwrap();
        assert_eq!(p.input, Input::Moments(vec![c64(1.0, 0.0), c64(2.0, 0.5)]));
        assert_eq!(p.tolerances.cluster_tol, 1e-6);
        assert_eq!(p.tolerances.zero_det_tol, 1e-10);
    }

    #[test]
    fn triplet() {
        let p = parse(
            r#"{"A": [[[1,0],[0,0]],[[0,0],[2,0]]], "v": [[1,0],[1,0]], "w": [[1,0],[0,0]]}"#,
        )
        .unwrap();
        let t = p.triplet().unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.a()[(1, 1)], c64(2.0, 0.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        for text in [
            r#"{"moments": []}"#,
            r#"{}"#,
            r#"{"moments": [[1,0]], "A": [[[1,0]]], "v": [[1,0]], "w": [[1,0]]}"#,
            r#"{"A": [[[1,0],[0,0]]], "v": [[1,0]], "w": [[1,0]]}"#,
            r#"{"A": [[[1,0]]], "v": [[1,0],[0,0]], "w": [[1,0]]}"#,
            r#"{"moments": [[1]]}"#,
            r#"{"moments": [[1,0]], "extra": 1}"#,
        ] {
            assert!(parse(text).is_err(), "{text}");
        }
    }
}
