//! Line-oriented text format for an SEM with an attached target.
//!
//! ```text
//! d s
//! j k b_jk          (one line per edge)
//! sigma2 v_0 … v_{d-1}
//! beta b_0 … b_{d-1}
//! noise σ²
//! ```
//!
//! Reals use 17 significant digits so parsing restores every bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DVector;

use super::{sem_covariance, Dag, LinearModel, SemSpec};
use crate::error::{Error, Result};

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_model_text(spec: &SemSpec, model: &LinearModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", spec.d(), model.support().len());
    for (&(j, k), &b) in spec.coeffs() {
        let _ = writeln!(out, "{j} {k} {}", real(b));
    }
    let join = |vals: &mut dyn Iterator<Item = f64>| vals.map(real).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "sigma2 {}", join(&mut spec.noise_vars().iter().copied()));
    let _ = writeln!(out, "beta {}", join(&mut model.beta().iter().copied()));
    let _ = writeln!(out, "noise {}", real(model.noise_var()));
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_reals(line: usize, fields: &[&str], expected: usize) -> Result<Vec<f64>> {
    if fields.len() != expected {
        return Err(parse_err(line, format!("expected {expected} values, found {}", fields.len())));
    }
    fields.iter().map(|f| f.parse::<f64>().map_err(|e| parse_err(line, e.to_string()))).collect()
}

/// Inverse of [`write_model_text`]; the covariance is recomputed from the SEM.
pub fn parse_model_text(text: &str) -> Result<(SemSpec, LinearModel)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let [d, s] = head.as_slice() else {
        return Err(parse_err(hline, "header must be `d s`"));
    };
    let d: usize = d.parse().map_err(|_| parse_err(hline, "bad d"))?;
    let s: usize = s.parse().map_err(|_| parse_err(hline, "bad s"))?;

    let mut coeffs = BTreeMap::new();
    let (mut noise_vars, mut beta, mut noise) = (None, None, None);
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "sigma2" => noise_vars = Some(parse_reals(ln, &fields[1..], d)?),
            "beta" => beta = Some(parse_reals(ln, &fields[1..], d)?),
            "noise" => noise = Some(parse_reals(ln, &fields[1..], 1)?[0]),
            _ => {
                let [j, k, b] = fields.as_slice() else {
                    return Err(parse_err(ln, "edge lines are `j k b_jk`"));
                };
                let j: usize = j.parse().map_err(|_| parse_err(ln, "bad source index"))?;
                let k: usize = k.parse().map_err(|_| parse_err(ln, "bad target index"))?;
                let b: f64 = b.parse().map_err(|_| parse_err(ln, "bad weight"))?;
                if coeffs.insert((j, k), b).is_some() {
                    return Err(parse_err(ln, "duplicate edge"));
                }
            }
        }
    }
    let noise_vars = noise_vars.ok_or_else(|| parse_err(0, "missing sigma2 line"))?;
    let beta = beta.ok_or_else(|| parse_err(0, "missing beta line"))?;
    let noise = noise.ok_or_else(|| parse_err(0, "missing noise line"))?;
    let dag = Dag::new(d, coeffs.keys().copied())?;
    let spec = SemSpec::new(dag, coeffs, noise_vars)?;
    let model = LinearModel::new(DVector::from_vec(beta), sem_covariance(&spec), noise)?;
    if model.support().len() != s {
        return Err(parse_err(hline, format!("header declares s = {s} but beta has {} nonzeros", model.support().len())));
    }
    Ok((spec, model))
}
