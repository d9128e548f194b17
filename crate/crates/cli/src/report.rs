//! JSON rendering. Floats are written with 17 significant digits and complex
//! numbers as `[re, im]`, so identical runs give identical bytes.

use momenta_core::lanczos::{BreakdownReport, StopReason};
use momenta_core::{BlockTridiagonal, CMatrix, TolerancePolicy, C64};
use serde_json::{json, Map, Number, Value};
use sha2::{Digest, Sha256};

pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    // Negative zero prints as "-0", which differs byte-wise from "0".
    let x = if x == 0.0 { 0.0 } else { x };
    let text = format!("{x:.16e}");
    Value::Number(
        text.parse::<Number>()
            .expect("formatted float is a JSON number"),
    )
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![real(z.re), real(z.im)])
}

pub fn complex_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| complex(z)).collect())
}

pub fn real_list(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| real(x)).collect())
}

pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn block_tridiagonal(t: &BlockTridiagonal) -> Value {
    json!({
        "dimension": t.dim(),
        "matrix": matrix(t.matrix()),
        "boundaries": t.boundaries(),
    })
}

pub fn tolerances(tol: &TolerancePolicy, exact: bool) -> Value {
    json!({
        "zero_det_tol": real(tol.zero_det_tol),
        "cluster_tol": real(tol.cluster_tol),
        "residual_tol": real(tol.residual_tol),
        "exact": exact,
    })
}

pub fn breakdown(r: &BreakdownReport) -> Value {
    let reason = match r.reason {
        StopReason::MaxSteps => json!({ "max_steps": {} }),
        StopReason::SpaceExhausted => json!({ "space_exhausted": {} }),
        StopReason::VectorVanished { v, w } => json!({ "vector_vanished": { "v": v, "w": w } }),
        StopReason::CouplingVanished { coupling } => {
            json!({ "coupling_vanished": { "coupling": real(coupling) } })
        }
        StopReason::BlockOpen { start, size } => {
            json!({ "block_open": { "start": start, "size": size } })
        }
        StopReason::IncurableTail { from } => json!({ "incurable_tail": { "from": from } }),
    };
    json!({
        "kind": snake(&format!("{:?}", r.kind)),
        "step": r.step,
        "reason": reason,
    })
}

/// `CamelCase` to `snake_case`, for enum variant names.
pub fn snake(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Indented JSON in which arrays of scalars (complex numbers, index lists)
/// and small flat objects stay on one line.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            let parts: Vec<String> = items.iter().map(Value::to_string).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) if map.len() <= 3 && map.values().all(is_scalar) => {
            let parts: Vec<String> = map
                .iter()
                .map(|(k, v)| format!("{}: {v}", Value::String(k.clone())))
                .collect();
            out.push_str("{ ");
            out.push_str(&parts.join(", "));
            out.push_str(" }");
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Common envelope around a command payload.
pub fn envelope(
    args: &[String],
    input_digest: &str,
    tol: Value,
    payload: Map<String, Value>,
) -> Value {
    json!({
        "command": {
            "program": "momenta",
            "args": args,
        },
        "input_sha256": input_digest,
        "tolerances": tol,
        "result": Value::Object(payload),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use momenta_core::c64;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(real(0.5).to_string(), "5.0000000000000000e-1");
        assert_eq!(real(-3.0).to_string(), "-3.0000000000000000e+0");
        assert_eq!(real(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(real(f64::NAN), Value::Null);
        assert_eq!(
            complex(c64(1.0, -2.0)).to_string(),
            "[1.0000000000000000e+0,-2.0000000000000000e+0]"
        );
    }

    #[test]
    fn negative_zero_is_zero() {
        assert_eq!(real(-0.0), real(0.0));
    }

    #[test]
    fn scalar_arrays_stay_inline() {
        let v = json!({ "a": [[1, 2], [3, 4]], "b": {}, "c": [], "d": { "e": 1 } });
        assert_eq!(render(&v), "{\n  \"a\": [\n    [1, 2],\n    [3, 4]\n  ],\n  \"b\": {},\n  \"c\": [],\n  \"d\": { \"e\": 1 }\n}\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, f64::MAX] {
            let back: f64 = serde_json::from_str(&real(x).to_string()).unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn snake_case() {
        assert_eq!(snake("IncurableWithinBound"), "incurable_within_bound");
        assert_eq!(snake("None"), "none");
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
