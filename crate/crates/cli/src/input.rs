//! Input documents. One JSON object per file, `schema_version` `"1"`, with
//! exactly one payload: `{n, H}`, `{n, psi1}`, `{n, frames}` or
//! `{ensemble, count, seed}`.

use std::fmt;

use maslov_core::numerics::{mat_from_row_major, Mat, Tolerances};
use maslov_core::symplectic::{
    HamiltonianMat, LagrangianFrame, SpectrumProfile, SymplecticMat, SymplecticSpace,
};
use serde::Deserialize;

pub const SCHEMA_VERSION: &str = "1";

/// A parse or validation failure with the 1-based line it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for InputError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    schema_version: String,
    n: Option<usize>,
    #[serde(rename = "H")]
    h: Option<Vec<f64>>,
    psi1: Option<Vec<f64>>,
    frames: Option<Vec<Vec<f64>>>,
    ensemble: Option<String>,
    count: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub enum Payload {
    Hamiltonian(HamiltonianMat),
    Monodromy(SymplecticMat),
    Frames(Vec<LagrangianFrame>),
    Ensemble {
        profile: SpectrumProfile,
        count: usize,
        seed: u64,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Hamiltonian(_) => "H",
            Payload::Monodromy(_) => "psi1",
            Payload::Frames(_) => "frames",
            Payload::Ensemble { .. } => "ensemble",
        }
    }
}

/// Line of the first occurrence of `"key"`, or 1.
fn key_line(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map_or(1, |i| i + 1)
}

fn at(text: &str, key: &str, message: impl Into<String>) -> InputError {
    InputError {
        line: key_line(text, key),
        message: message.into(),
    }
}

pub fn parse_document(text: &str, tol: &Tolerances) -> Result<Payload, InputError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| InputError {
        line: e.line().max(1),
        message: format!("column {}: {e}", e.column()),
    })?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(at(
            text,
            "schema_version",
            format!(
                "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
                raw.schema_version
            ),
        ));
    }
    let present: Vec<&str> = [
        ("H", raw.h.is_some()),
        ("psi1", raw.psi1.is_some()),
        ("frames", raw.frames.is_some()),
        ("ensemble", raw.ensemble.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, p)| p.then_some(k))
    .collect();
    let key = match present.as_slice() {
        [k] => *k,
        [] => {
            return Err(at(
                text,
                "schema_version",
                "document has no payload; expected one of H, psi1, frames, ensemble",
            ))
        }
        [_, second, ..] => {
            return Err(at(
                text,
                second,
                format!("document has several payloads: {}", present.join(", ")),
            ))
        }
    };
    if key == "ensemble" {
        if raw.n.is_some() {
            return Err(at(text, "n", "n is not used with an ensemble payload"));
        }
        let name = raw.ensemble.unwrap_or_default();
        let profile = name
            .parse::<SpectrumProfile>()
            .map_err(|e| at(text, "ensemble", e.to_string()))?;
        return Ok(Payload::Ensemble {
            profile,
            count: raw.count.unwrap_or(10),
            seed: raw.seed.unwrap_or(0),
        });
    }
    for extra in ["count", "seed"] {
        let used = if extra == "count" {
            raw.count.is_some()
        } else {
            raw.seed.is_some()
        };
        if used {
            return Err(at(
                text,
                extra,
                format!("{extra} is only used with an ensemble payload"),
            ));
        }
    }
    let n = raw
        .n
        .ok_or_else(|| at(text, key, format!("payload {key} requires n")))?;
    if n == 0 {
        return Err(at(text, "n", "n must be positive"));
    }
    let dim = 2 * n;
    match key {
        "H" | "psi1" => {
            let data = if key == "H" { raw.h } else { raw.psi1 }.unwrap_or_default();
            let m = mat_from_row_major(dim, dim, &data)
                .map_err(|e| at(text, key, format!("{key}: {e}")))?;
            if key == "H" {
                HamiltonianMat::new(m, tol)
                    .map(Payload::Hamiltonian)
                    .map_err(|e| at(text, key, e.to_string()))
            } else {
                SymplecticMat::new(m, tol)
                    .map(Payload::Monodromy)
                    .map_err(|e| at(text, key, e.to_string()))
            }
        }
        _ => {
            let frames = raw.frames.unwrap_or_default();
            let space = SymplecticSpace::standard(n);
            let mut out = Vec::with_capacity(frames.len());
            for (i, f) in frames.iter().enumerate() {
                if f.len() != dim * n {
                    return Err(at(
                        text,
                        "frames",
                        format!(
                            "frame {} has {} entries, expected {} ({dim}x{n} column-major)",
                            i + 1,
                            f.len(),
                            dim * n
                        ),
                    ));
                }
                if f.iter().any(|v| !v.is_finite()) {
                    return Err(at(text, "frames", format!("frame {} is not finite", i + 1)));
                }
                let m = Mat::from_column_slice(dim, n, f);
                let frame = LagrangianFrame::new(space.clone(), m, tol)
                    .map_err(|e| at(text, "frames", format!("frame {}: {e}", i + 1)))?;
                out.push(frame);
            }
            Ok(Payload::Frames(out))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Payload, InputError> {
        parse_document(text, &Tolerances::default())
    }

    #[test]
    fn hamiltonian_document() {
        let p = parse(r#"{"schema_version": "1", "n": 1, "H": [0, -2, 2, 0]}"#).unwrap();
        let Payload::Hamiltonian(h) = p else { panic!() };
        assert_eq!(h.matrix()[(0, 1)], -2.0);
    }

    #[test]
    fn frames_are_column_major() {
        let p = parse(r#"{"schema_version": "1", "n": 1, "frames": [[1, 0], [0, 1], [1, 1]]}"#)
            .unwrap();
        let Payload::Frames(f) = p else { panic!() };
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn errors_carry_lines() {
        let text = "{\n  \"schema_version\": \"1\",\n  \"n\": 1,\n  \"H\": [1, 0, 0, 0]\n}";
        let e = parse(text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("Hamiltonian"), "{e}");

        let e =
            parse("{\n  \"schema_version\": \"1\",\n  \"n\": 1,\n  \"H\": [1, 0,\n}").unwrap_err();
        assert_eq!(e.line, 5);

        let e = parse("{\"schema_version\": \"2\", \"n\": 1, \"H\": [0,0,0,0]}").unwrap_err();
        assert!(e.message.contains("schema_version"));
    }

    #[test]
    fn payload_exclusivity() {
        let e = parse(r#"{"schema_version": "1", "n": 1, "H": [0,0,0,0], "psi1": [1,0,0,1]}"#)
            .unwrap_err();
        assert!(e.message.contains("several payloads"));
        assert!(parse(r#"{"schema_version": "1", "n": 1}"#).is_err());
        assert!(parse(r#"{"schema_version": "1", "ensemble": "elliptic", "n": 2}"#).is_err());
        assert!(parse(r#"{"schema_version": "1", "n": 1, "H": [0,0,0,0], "seed": 2}"#).is_err());
    }

    #[test]
    fn ensemble_defaults() {
        let p = parse(r#"{"schema_version": "1", "ensemble": "hyperbolic"}"#).unwrap();
        let Payload::Ensemble {
            profile,
            count,
            seed,
        } = p
        else {
            panic!()
        };
        assert_eq!(profile, SpectrumProfile::Hyperbolic);
        assert_eq!((count, seed), (10, 0));
        assert!(parse(r#"{"schema_version": "1", "ensemble": "bogus"}"#).is_err());
    }

    #[test]
    fn dimension_checks() {
        assert!(parse(r#"{"schema_version": "1", "n": 2, "H": [0,0,0,0]}"#).is_err());
        assert!(parse(r#"{"schema_version": "1", "n": 1, "frames": [[1, 0, 0]]}"#).is_err());
        assert!(parse(r#"{"schema_version": "1", "n": 1, "frames": [[0, 0]]}"#).is_err());
    }
}
