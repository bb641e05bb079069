//! Expression AST, text parser, printer, and point evaluation.
//!
//! Variables are positional (`Var(i)`); names exist only at the parse and
//! format boundary. The grammar is infix with precedence
//! `^` > unary `-` > `*`,`/` > `+`,`-`, function application `name(expr)`,
//! and decimal or scientific literals. Implicit multiplication is a syntax
//! error.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        }
    }
}

/// Expression tree. `Add`/`Mul` are flattened n-ary (>= 2 children);
/// `Sub` and `Neg` are kept distinct at parse time for faithful printing
/// and normalized away inside the symbolic engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn num(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn add2(a: Expr, b: Expr) -> Expr {
        match a {
            Expr::Add(mut v) => {
                v.push(b);
                Expr::Add(v)
            }
            _ => Expr::Add(vec![a, b]),
        }
    }

    pub fn mul2(a: Expr, b: Expr) -> Expr {
        match a {
            Expr::Mul(mut v) => {
                v.push(b);
                Expr::Mul(v)
            }
            _ => Expr::Mul(vec![a, b]),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn func(f: Func, a: Expr) -> Expr {
        Expr::Func(f, Box::new(a))
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Add(v) | Expr::Mul(v) => v.iter().map(Expr::node_count).sum(),
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.node_count(),
            Expr::Sub(a, b) | Expr::Div(a, b) => a.node_count() + b.node_count(),
        }
    }

    /// Exact set of variable indices occurring in the expression.
    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    fn collect_vars(&self, s: &mut BTreeSet<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(i) => {
                s.insert(*i);
            }
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|c| c.collect_vars(s)),
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.collect_vars(s),
            Expr::Sub(a, b) | Expr::Div(a, b) => {
                a.collect_vars(s);
                b.collect_vars(s);
            }
        }
    }

    /// Substitute `Var(i)` by a constant, shifting every higher index down
    /// by one. Used when a box component has zero width.
    pub fn substitute_var(&self, i: usize, value: f64) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(j) if *j == i => Expr::Const(value),
            Expr::Var(j) if *j > i => Expr::Var(j - 1),
            Expr::Var(j) => Expr::Var(*j),
            Expr::Add(v) => Expr::Add(v.iter().map(|c| c.substitute_var(i, value)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|c| c.substitute_var(i, value)).collect()),
            Expr::Neg(a) => Expr::neg(a.substitute_var(i, value)),
            Expr::Sub(a, b) => Expr::sub(a.substitute_var(i, value), b.substitute_var(i, value)),
            Expr::Div(a, b) => Expr::div(a.substitute_var(i, value), b.substitute_var(i, value)),
            Expr::Pow(a, k) => Expr::pow(a.substitute_var(i, value), *k),
            Expr::Func(f, a) => Expr::func(*f, a.substitute_var(i, value)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("parse error at position {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("evaluation error at node {path}: {msg}")]
pub struct EvalError {
    /// Dot-separated child indices from the root.
    pub path: String,
    pub msg: String,
}

/// Standard real evaluation. Domain violations (log of non-positive,
/// division by zero) are reported with the node path.
pub fn eval_point(e: &Expr, point: &[f64]) -> Result<f64, EvalError> {
    let mut path = Vec::new();
    eval_at(e, point, &mut path)
}

fn eval_err(path: &[usize], msg: impl Into<String>) -> EvalError {
    let mut p = String::from("root");
    for i in path {
        let _ = write!(p, ".{i}");
    }
    EvalError {
        path: p,
        msg: msg.into(),
    }
}

fn eval_at(e: &Expr, x: &[f64], path: &mut Vec<usize>) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var(i) => {
            if *i < x.len() {
                Ok(x[*i])
            } else {
                Err(eval_err(path, format!("variable index {i} out of range")))
            }
        }
        Expr::Add(v) => {
            let mut s = 0.0;
            for (k, c) in v.iter().enumerate() {
                path.push(k);
                s += eval_at(c, x, path)?;
                path.pop();
            }
            Ok(s)
        }
        Expr::Mul(v) => {
            let mut p = 1.0;
            for (k, c) in v.iter().enumerate() {
                path.push(k);
                p *= eval_at(c, x, path)?;
                path.pop();
            }
            Ok(p)
        }
        Expr::Neg(a) => {
            path.push(0);
            let v = eval_at(a, x, path)?;
            path.pop();
            Ok(-v)
        }
        Expr::Sub(a, b) => {
            path.push(0);
            let va = eval_at(a, x, path)?;
            path.pop();
            path.push(1);
            let vb = eval_at(b, x, path)?;
            path.pop();
            Ok(va - vb)
        }
        Expr::Div(a, b) => {
            path.push(0);
            let va = eval_at(a, x, path)?;
            path.pop();
            path.push(1);
            let vb = eval_at(b, x, path)?;
            path.pop();
            if vb == 0.0 {
                return Err(eval_err(path, "division by zero"));
            }
            Ok(va / vb)
        }
        Expr::Pow(a, k) => {
            path.push(0);
            let v = eval_at(a, x, path)?;
            path.pop();
            if *k < 0 && v == 0.0 {
                return Err(eval_err(path, "zero raised to a negative power"));
            }
            Ok(v.powi(*k))
        }
        Expr::Func(f, a) => {
            path.push(0);
            let v = eval_at(a, x, path)?;
            path.pop();
            match f {
                Func::Log if v <= 0.0 => Err(eval_err(path, format!("log of {v}"))),
                Func::Sqrt if v < 0.0 => Err(eval_err(path, format!("sqrt of {v}"))),
                _ => Ok(f.apply(v)),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                break;
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(start),
                c => {
                    return Err(ParseError {
                        pos: start,
                        msg: format!("unexpected character '{}'", c as char),
                    })
                }
            };
            out.push((start, tok));
        }
        Ok(out)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 32) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all (e.g. "2*exp(x)")
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError {
                pos: start,
                msg: format!("malformed number '{text}'"),
            })
    }

    fn ident(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    vars: &'a [String],
    end: usize,
}

/// Parse `text` against the given ordered variable names.
pub fn parse(text: &str, var_names: &[String]) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        vars: var_names,
        end: text.len(),
    };
    let e = p.sum()?;
    if let Some((pos, _)) = p.peek_at() {
        return Err(ParseError {
            pos,
            msg: "unexpected trailing input (implicit multiplication is not supported)".into(),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn peek_at(&self) -> Option<(usize, &Tok)> {
        self.toks.get(self.idx).map(|(p, t)| (*p, t))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek_at().map(|(p, _)| p).unwrap_or(self.end)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some((_, t)) if t == tok => Ok(()),
            Some((p, _)) => Err(ParseError {
                pos: p,
                msg: format!("expected {what}"),
            }),
            None => Err(ParseError {
                pos: self.end,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::add2(acc, rhs);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = Expr::mul2(acc, rhs);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = Expr::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let k = self.exponent()?;
            // negative exponents normalize to a reciprocal power
            return Ok(if k < 0 {
                Expr::div(Expr::num(1.0), Expr::pow(base, -k))
            } else {
                Expr::pow(base, k)
            });
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parenthesized = matches!(self.peek(), Some(Tok::LParen));
        if parenthesized {
            self.bump();
        }
        let mut sign = 1i64;
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            sign = -1;
        }
        let (pos, tok) = self.bump().ok_or(ParseError {
            pos: self.end,
            msg: "expected integer exponent".into(),
        })?;
        let k = match tok {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => sign * v as i64,
            Tok::Num(_) => {
                return Err(ParseError {
                    pos,
                    msg: "non-integer exponent".into(),
                })
            }
            _ => {
                return Err(ParseError {
                    pos,
                    msg: "expected integer exponent".into(),
                })
            }
        };
        if parenthesized {
            self.expect(Tok::RParen, "')'")?;
        }
        Ok(k as i32)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some((_, Tok::Num(v))) => Ok(Expr::num(v)),
            Some((_, Tok::LParen)) => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some((pos, Tok::Ident(name))) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::var(i));
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.sum()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::func(f, arg));
                }
                Err(ParseError {
                    pos,
                    msg: format!("unknown identifier '{name}'"),
                })
            }
            Some((pos, _)) => Err(ParseError {
                pos,
                msg: "expected a number, variable, function, or '('".into(),
            }),
            None => Err(ParseError {
                pos: self.here(),
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Printer

/// Render with the given variable names; output reparses to an expression
/// structurally equal to the input after flattening normalization.
pub fn format(e: &Expr, var_names: &[String]) -> String {
    let mut s = String::new();
    fmt_prec(e, var_names, 0, &mut s);
    s
}

/// Render with default names `x1..xn`.
pub fn format_default(e: &Expr) -> String {
    let n = e.free_vars().iter().max().map(|m| m + 1).unwrap_or(0);
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    format(e, &names)
}

// precedence levels: 1 additive, 2 multiplicative, 3 unary, 4 power, 5 atom
fn prec_of(e: &Expr) -> u8 {
    match e {
        Expr::Add(_) | Expr::Sub(_, _) => 1,
        Expr::Mul(_) | Expr::Div(_, _) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0.0 => 3,
        Expr::Pow(_, _) => 4,
        Expr::Const(_) | Expr::Var(_) | Expr::Func(_, _) => 5,
    }
}

fn fmt_prec(e: &Expr, names: &[String], parent: u8, out: &mut String) {
    let my = prec_of(e);
    let paren = my < parent;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Expr::Var(i) => {
            if let Some(n) = names.get(*i) {
                out.push_str(n);
            } else {
                let _ = write!(out, "x{}", i + 1);
            }
        }
        Expr::Add(v) => {
            for (k, c) in v.iter().enumerate() {
                if k == 0 {
                    fmt_prec(c, names, 1, out);
                    continue;
                }
                if let Some(m) = negated_view(c) {
                    out.push('-');
                    fmt_prec(&m, names, 2, out);
                } else {
                    out.push('+');
                    fmt_prec(c, names, 2, out);
                }
            }
        }
        Expr::Sub(a, b) => {
            fmt_prec(a, names, 1, out);
            out.push('-');
            fmt_prec(b, names, 2, out);
        }
        Expr::Mul(v) => {
            for (k, c) in v.iter().enumerate() {
                if k > 0 {
                    out.push('*');
                }
                // later Div factors need parens so reparsing keeps structure
                let need = if k == 0 { 2 } else { 3 };
                fmt_prec(c, names, need, out);
            }
        }
        Expr::Div(a, b) => {
            fmt_prec(a, names, 2, out);
            out.push('/');
            fmt_prec(b, names, 3, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            fmt_prec(a, names, 3, out);
        }
        Expr::Pow(a, k) => {
            fmt_prec(a, names, 5, out);
            if *k < 0 {
                let _ = write!(out, "^({k})");
            } else {
                let _ = write!(out, "^{k}");
            }
        }
        Expr::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            fmt_prec(a, names, 0, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

/// If `e` is naturally printed with a leading minus, return its magnitude.
fn negated_view(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Neg(a) => Some((**a).clone()),
        Expr::Const(c) if *c < 0.0 => Some(Expr::Const(-c)),
        Expr::Mul(v) => match v.first() {
            Some(Expr::Const(c)) if *c < 0.0 => {
                let mut w = v.clone();
                if *c == -1.0 && w.len() > 1 {
                    w.remove(0);
                    if w.len() == 1 {
                        return Some(w.pop().unwrap());
                    }
                } else {
                    w[0] = Expr::Const(-c);
                }
                Some(Expr::Mul(w))
            }
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_trig_rational() {
        let vs = names(&["x1", "x2"]);
        let e = parse("cos(x1)*sin(x2) - x1/(x2^2+1)", &vs).unwrap();
        let expect = Expr::sub(
            Expr::Mul(vec![
                Expr::func(Func::Cos, Expr::var(0)),
                Expr::func(Func::Sin, Expr::var(1)),
            ]),
            Expr::div(
                Expr::var(0),
                Expr::Add(vec![Expr::pow(Expr::var(1), 2), Expr::num(1.0)]),
            ),
        );
        assert_eq!(e, expect);
    }

    #[test]
    fn parses_single_var() {
        let vs = names(&["x1"]);
        assert_eq!(parse("x1", &vs).unwrap(), Expr::var(0));
    }

    #[test]
    fn parses_and_evaluates_quartic() {
        let vs = names(&["x1", "x2"]);
        let e = parse("(2*x1+x2-3)^2+(x1*x2-1)^2", &vs).unwrap();
        assert_eq!(eval_point(&e, &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn eval_examples() {
        let vs = names(&["x1", "x2", "x3", "x4"]);
        let f1 = parse(
            "(x1+10*x2)^2+5*(x3-x4)^2+(x2-2*x3)^4+10*(x1-x4)^4",
            &vs,
        )
        .unwrap();
        assert_eq!(eval_point(&f1, &[0.0; 4]).unwrap(), 0.0);

        let vs2 = names(&["x1", "x2"]);
        let f4 = parse("(1+x1-exp(x2))^2", &vs2).unwrap();
        assert_eq!(eval_point(&f4, &[0.0, 0.0]).unwrap(), 0.0);

        let f2 = parse("cos(x1)*sin(x2) - x1/(x2^2+1)", &vs2).unwrap();
        assert_eq!(eval_point(&f2, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn free_vars_examples() {
        let vs = names(&["x1", "x2"]);
        let e = parse("2-4*exp(x2)", &vs).unwrap();
        assert_eq!(e.free_vars().into_iter().collect::<Vec<_>>(), vec![1]);
        assert!(Expr::num(5.0).free_vars().is_empty());

        let vs4 = names(&["x1", "x2", "x3", "x4"]);
        let f1 = parse(
            "(x1+10*x2)^2+5*(x3-x4)^2+(x2-2*x3)^4+10*(x1-x4)^4",
            &vs4,
        )
        .unwrap();
        assert_eq!(
            f1.free_vars().into_iter().collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn format_examples() {
        assert_eq!(format(&Expr::num(-18.0), &[]), "-18");
        let vs = names(&["x1", "x2", "x3", "x4"]);
        let e = Expr::Mul(vec![
            Expr::num(120.0),
            Expr::pow(Expr::sub(Expr::var(0), Expr::var(3)), 2),
        ]);
        assert_eq!(format(&e, &vs), "120*(x1-x4)^2");
    }

    #[test]
    fn error_positions() {
        let vs = names(&["x1"]);
        let err = parse("x1 + y", &vs).unwrap_err();
        assert_eq!(err.pos, 5);
        assert!(err.msg.contains("unknown identifier"));

        let err = parse("x1^2.5", &vs).unwrap_err();
        assert!(err.msg.contains("non-integer exponent"));

        // implicit multiplication rejected
        assert!(parse("2x1", &vs).is_err());
    }

    #[test]
    fn negative_exponent_normalizes() {
        let vs = names(&["x1"]);
        let e = parse("x1^-2", &vs).unwrap();
        assert_eq!(e, Expr::div(Expr::num(1.0), Expr::pow(Expr::var(0), 2)));
        let e2 = parse("x1^(-2)", &vs).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn scientific_literals() {
        let vs = names(&["x1"]);
        let e = parse("1.5e-3*x1", &vs).unwrap();
        assert_eq!(e, Expr::Mul(vec![Expr::num(1.5e-3), Expr::var(0)]));
        // 'e' not followed by digits is an identifier boundary, not an exponent
        let e = parse("2*exp(x1)", &vs).unwrap();
        assert_eq!(
            e,
            Expr::Mul(vec![Expr::num(2.0), Expr::func(Func::Exp, Expr::var(0))])
        );
    }
}
