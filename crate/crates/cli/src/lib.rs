//! Matrix input parsing and report envelopes for the `kness` binary.

use std::path::Path;

use kness_core::matrix::{ComplexMatrix, C64};
use kness_core::sl2::{build_standard_triple, principal_e, principal_x, Sl2Element};
use kness_core::spectral::jordan_matrix;
use kness_core::{Partition, Tolerances};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot parse {what} `{text}`")]
    Syntax { what: &'static str, text: String },
    #[error("matrix is not trace-free: trace = {trace}")]
    NotTraceFree { trace: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] kness_core::Error),
}

fn syntax(what: &'static str, text: &str) -> InputError {
    InputError::Syntax { what, text: text.into() }
}

/// Parses `3`, `-1.5`, `2i`, `-i`, `1+2i`, `0.5-3e-2i`.
pub fn parse_complex(text: &str) -> Result<C64, InputError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(re) = t.parse::<f64>() {
        return Ok(C64::new(re, 0.0));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Err(syntax("number", text));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        s => s,
    };
    let re: f64 = re.parse().map_err(|_| syntax("number", text))?;
    let im: f64 = im.parse().map_err(|_| syntax("number", text))?;
    Ok(C64::new(re, im))
}

fn parse_list(text: &str) -> Result<Vec<C64>, InputError> {
    text.split(',').map(parse_complex).collect()
}

fn parse_dim(text: &str) -> Result<usize, InputError> {
    match text.trim().parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(syntax("dimension (n >= 2)", text)),
    }
}

fn parse_partition(text: &str) -> Result<Partition, InputError> {
    text.parse().map_err(|_| syntax("partition", text))
}

/// Builds a matrix from shorthand, inline JSON or a JSON file, without the
/// trace check.
pub fn build_matrix(input: &str) -> Result<ComplexMatrix, InputError> {
    let input = input.trim();
    if input.starts_with('{') {
        return Ok(ComplexMatrix::from_json(input)?);
    }
    let (kind, rest) = input.split_once(':').unwrap_or(("", input));
    match kind {
        "diag" => {
            let d = parse_list(rest)?;
            if d.len() < 2 {
                return Err(syntax("diagonal (two or more entries)", rest));
            }
            Ok(ComplexMatrix::diag(&d))
        }
        "e" => Ok(principal_e(parse_dim(rest)?)),
        "x" => Ok(principal_x(parse_dim(rest)?)),
        "std" => {
            let (parts, coeffs) = rest.split_once(':').ok_or_else(|| syntax("std:<partition>:a,b,c", input))?;
            let p = parse_partition(parts)?;
            let [a, b, c] = <[C64; 3]>::try_from(parse_list(coeffs)?).map_err(|_| syntax("coefficients a,b,c", coeffs))?;
            if p.n() < 2 {
                return Err(syntax("partition of n >= 2", parts));
            }
            Ok(build_standard_triple(&p).embed(Sl2Element::new(a, b, c)))
        }
        "jordan" => {
            let blocks = rest
                .split(',')
                .map(|b| {
                    let (k, lam) = b.split_once('@').ok_or_else(|| syntax("block size@eigenvalue", b))?;
                    let k = k.trim().parse::<usize>().map_err(|_| syntax("block size", k))?;
                    Ok((k, parse_complex(lam)?))
                })
                .collect::<Result<Vec<_>, InputError>>()?;
            Ok(jordan_matrix(&blocks)?)
        }
        _ => {
            let text = std::fs::read_to_string(Path::new(input))
                .map_err(|source| InputError::Io { path: input.into(), source })?;
            Ok(ComplexMatrix::from_json(&text)?)
        }
    }
}

/// `build_matrix` followed by the trace-free check.
pub fn parse_matrix(input: &str, tol: &Tolerances) -> Result<ComplexMatrix, InputError> {
    let m = build_matrix(input)?;
    match m.check_trace_free(tol) {
        Err(kness_core::Error::NotTraceFree { .. }) => Err(InputError::NotTraceFree { trace: fmt_complex(m.trace()) }),
        Err(e) => Err(e.into()),
        Ok(()) => Ok(m),
    }
}

pub fn fmt_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<String>,
    pub config: serde_json::Value,
    pub version: &'static str,
    pub timestamp: String,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, input: Option<&str>, config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.into(),
            input: input.map(Into::into),
            config,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
            seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub manifest: RunManifest,
    pub result: T,
}
