//! Plain-text coefficient formats.
//!
//! Coefficient table (`*.nf`), one record per line:
//!
//! ```text
//! alpha_1 .. alpha_d  beta_1 .. beta_d  re  im
//! ```
//!
//! Action polynomial (`*.ap`), one term per line:
//!
//! ```text
//! n_I n_J1 .. n_Jf  coeff
//! ```
//!
//! Fields are whitespace separated, `#` starts a comment and blank lines are
//! ignored.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{ActionPolynomial, ComplexMonomialTable, MonomialRecord};
use crate::error::{OtocError, Result};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((n + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_exponent(tok: &str, line: usize) -> Result<u32> {
    tok.parse::<u32>().map_err(|_| OtocError::Parse {
        line,
        message: format!("expected a non-negative integer exponent, found `{tok}`"),
    })
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| OtocError::Parse {
        line,
        message: format!("expected a real number, found `{tok}`"),
    })
}

pub fn parse_coefficient_table(text: &str) -> Result<ComplexMonomialTable> {
    let mut width = None;
    let mut records = Vec::new();
    for (line, toks) in data_lines(text) {
        let n = toks.len();
        if n < 6 || n % 2 != 0 {
            return Err(OtocError::Parse {
                line,
                message: format!("expected 2d + 2 fields with d >= 2, found {n}"),
            });
        }
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(OtocError::Parse {
                    line,
                    message: format!("record has {n} fields, previous records have {w}"),
                })
            }
            _ => {}
        }
        let d = (n - 2) / 2;
        let alpha = toks[..d]
            .iter()
            .map(|t| parse_exponent(t, line))
            .collect::<Result<Vec<_>>>()?;
        let beta = toks[d..2 * d]
            .iter()
            .map(|t| parse_exponent(t, line))
            .collect::<Result<Vec<_>>>()?;
        let re = parse_real(toks[2 * d], line)?;
        let im = parse_real(toks[2 * d + 1], line)?;
        records.push(MonomialRecord::new(alpha, beta, Complex64::new(re, im)));
    }
    let width = width.ok_or_else(|| OtocError::MalformedTable("no records".into()))?;
    ComplexMonomialTable::new((width - 2) / 2, records)
}

pub fn parse_action_polynomial(text: &str) -> Result<ActionPolynomial> {
    let mut poly: Option<ActionPolynomial> = None;
    for (line, toks) in data_lines(text) {
        let n = toks.len();
        if n < 3 {
            return Err(OtocError::Parse {
                line,
                message: format!("expected f + 2 fields with f >= 1, found {n}"),
            });
        }
        let exps = toks[..n - 1]
            .iter()
            .map(|t| parse_exponent(t, line))
            .collect::<Result<Vec<_>>>()?;
        let coeff = parse_real(toks[n - 1], line)?;
        let p = poly.get_or_insert_with(|| ActionPolynomial::new(n - 2));
        p.add_term(&exps, coeff).map_err(|e| OtocError::Parse {
            line,
            message: e.to_string(),
        })?;
    }
    poly.ok_or_else(|| OtocError::MalformedTable("no terms".into()))
}

pub fn read_coefficient_table(path: impl AsRef<Path>) -> Result<ComplexMonomialTable> {
    parse_coefficient_table(&std::fs::read_to_string(path)?)
}

pub fn read_action_polynomial(path: impl AsRef<Path>) -> Result<ActionPolynomial> {
    parse_action_polynomial(&std::fs::read_to_string(path)?)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Serializes a table; `header` lines are emitted as `#` comments.
pub fn write_coefficient_table(table: &ComplexMonomialTable, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for r in table.records() {
        let _ = writeln!(
            out,
            "{}  {}  {:.16e} {:.16e}",
            join(&r.alpha),
            join(&r.beta),
            r.coeff.re,
            r.coeff.im
        );
    }
    out
}

/// Serializes a polynomial; `header` lines are emitted as `#` comments.
pub fn write_action_polynomial(poly: &ActionPolynomial, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for (e, c) in poly.terms() {
        let _ = writeln!(out, "{}  {:.16e}", join(e), c);
    }
    out
}
