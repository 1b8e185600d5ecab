//! Deterministic CSV and JSON writers.
//!
//! Every float is written with 17 significant digits in scientific notation,
//! so identical inputs always give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::error::{Result, ShellError};
use crate::solver::ShellSolution;

/// `{:.16e}`: 17 significant digits, `.` decimal point, no locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number carrying the [`fmt_f64`] text verbatim; non-finite values
/// become `null`.
pub fn json_f64(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    match fmt_f64(x).parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_string(value: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| ShellError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    fs::write(path, json_string(value)?)?;
    Ok(())
}

pub fn write_mu_lambda<W: Write>(sol: &ShellSolution, mut out: W) -> Result<()> {
    writeln!(out, "r,mu,lambda,m")?;
    let grid = sol.grid();
    let mu = sol.metric.mu_nodes();
    for i in 0..grid.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(grid.node(i)),
            fmt_f64(mu[i]),
            fmt_f64(sol.lambda[i]),
            fmt_f64(sol.mass[i])
        )?;
    }
    Ok(())
}

pub fn write_profiles<W: Write>(sol: &ShellSolution, mut out: W) -> Result<()> {
    writeln!(out, "r,rho,p,pT")?;
    let grid = sol.grid();
    let pr = &sol.profiles;
    for i in 0..grid.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(grid.node(i)),
            fmt_f64(pr.rho[i]),
            fmt_f64(pr.p[i]),
            fmt_f64(pr.p_t[i])
        )?;
    }
    Ok(())
}

/// Ordered JSON object from `(key, value)` pairs.
pub fn object<I: IntoIterator<Item = (&'static str, Value)>>(pairs: I) -> Value {
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.1), "-1.0000000000000001e-1");
        let back: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn json_numbers_keep_text() {
        let v = object([("a", json_f64(0.5)), ("b", json_f64(f64::NAN))]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"a":5.0000000000000000e-1,"b":null}"#);
    }
}
