//! Line-oriented problem files:
//!
//! ```text
//! # comment
//! var x1 in [-1, 2]
//! var x2 in [-1, 1]
//! objective cos(x1)*sin(x2) - x1/(x2^2+1)
//! d = [3, 2]
//! ```

use std::path::Path;

use thiserror::Error;

use crate::expr::{parse, Expr};
use crate::interval::{Interval, IntervalBox};

#[derive(Debug, Clone)]
pub struct Problem {
    pub names: Vec<String>,
    pub bx: IntervalBox,
    pub objective: Expr,
    /// Scaling-vector override from the file, if any.
    pub d: Option<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("no objective")]
    NoObjective,
    #[error("no variables declared")]
    NoVariables,
}

fn line_err(line: usize, msg: impl Into<String>) -> ProblemError {
    ProblemError::Line { line, msg: msg.into() }
}

fn parse_number(s: &str, line: usize) -> Result<f64, ProblemError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| line_err(line, format!("expected a number, found `{}`", s.trim())))?;
    if !v.is_finite() {
        return Err(line_err(line, "bounds must be finite"));
    }
    Ok(v)
}

/// `[a, b, ...]` → numbers.
fn parse_bracket_list(s: &str, line: usize) -> Result<Vec<f64>, ProblemError> {
    let s = s.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| line_err(line, "expected a bracketed list `[...]`"))?;
    inner
        .split(',')
        .map(|p| parse_number(p, line))
        .collect()
}

pub fn load_problem_str(text: &str) -> Result<Problem, ProblemError> {
    let mut names: Vec<String> = Vec::new();
    let mut bounds: Vec<Interval> = Vec::new();
    let mut objective_text: Option<(usize, String)> = None;
    let mut d: Option<Vec<f64>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("var ") {
            let (name, range) = rest
                .split_once(" in ")
                .ok_or_else(|| line_err(line_no, "expected `var <name> in [<lo>, <hi>]`"))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(line_err(line_no, format!("invalid variable name `{}`", name)));
            }
            if names.iter().any(|n| n == name) {
                return Err(line_err(line_no, format!("variable `{}` declared twice", name)));
            }
            let vals = parse_bracket_list(range, line_no)?;
            if vals.len() != 2 {
                return Err(line_err(line_no, "expected exactly two bounds"));
            }
            if vals[0] > vals[1] {
                return Err(line_err(
                    line_no,
                    format!("lower bound {} exceeds upper bound {}", vals[0], vals[1]),
                ));
            }
            names.push(name.to_string());
            bounds.push(Interval::new(vals[0], vals[1]));
        } else if let Some(rest) = line.strip_prefix("objective ") {
            if objective_text.is_some() {
                return Err(line_err(line_no, "objective declared twice"));
            }
            objective_text = Some((line_no, rest.trim().to_string()));
        } else if let Some(rest) = line.strip_prefix("d ") {
            let rest = rest
                .trim_start()
                .strip_prefix('=')
                .ok_or_else(|| line_err(line_no, "expected `d = [...]`"))?;
            d = Some(parse_bracket_list(rest, line_no)?);
        } else {
            return Err(line_err(line_no, format!("unrecognized line `{}`", line)));
        }
    }

    if names.is_empty() {
        return Err(ProblemError::NoVariables);
    }
    let (obj_line, obj_text) = objective_text.ok_or(ProblemError::NoObjective)?;
    let objective = parse(&obj_text, &names)
        .map_err(|e| line_err(obj_line, e.to_string()))?;
    if let Some(dv) = &d {
        if dv.len() != names.len() {
            return Err(line_err(
                0,
                format!("d has {} components for {} variables", dv.len(), names.len()),
            ));
        }
        if dv.iter().any(|&v| !(v > 0.0)) {
            return Err(line_err(0, "d components must be positive"));
        }
    }
    Ok(Problem {
        names,
        bx: IntervalBox::new(bounds),
        objective,
        d,
    })
}

pub fn load_problem(path: &Path) -> Result<Problem, ProblemError> {
    load_problem_str(&std::fs::read_to_string(path)?)
}
