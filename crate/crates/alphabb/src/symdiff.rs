//! Symbolic differentiation (gradient, Hessian) and expression
//! simplification.
//!
//! Simplification is a fixed-point iteration of rewriting passes: constant
//! folding, flattening, like-term collection over an atom basis, common
//! factor extraction, and quotient cancellation. A pass's output is kept
//! only if its node count does not exceed its input's; iteration stops at a
//! fixed point or after 16 rounds. Atoms are variables and maximal
//! non-decomposable subtrees (function applications, parenthesized sums
//! used as power bases, whole quotients), so structure like `(x1-x4)^2` or
//! `exp(x2)` is matched without expansion.

use std::cmp::Ordering;

use thiserror::Error;

use crate::expr::{Expr, Func};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("differentiation through abs is unsupported")]
    NonSmoothAbs,
}

// ---------------------------------------------------------------------------
// Canonical ordering (deterministic tie-breaking for all rewrites)

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) => 0,
        Expr::Var(_) => 1,
        Expr::Func(_, _) => 2,
        Expr::Pow(_, _) => 3,
        Expr::Mul(_) => 4,
        Expr::Add(_) => 5,
        Expr::Div(_, _) => 6,
        Expr::Neg(_) => 7,
        Expr::Sub(_, _) => 8,
    }
}

pub fn cmp_expr(a: &Expr, b: &Expr) -> Ordering {
    match rank(a).cmp(&rank(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x.total_cmp(y),
        (Expr::Var(i), Expr::Var(j)) => i.cmp(j),
        (Expr::Func(f, x), Expr::Func(g, y)) => f.cmp(g).then_with(|| cmp_expr(x, y)),
        (Expr::Pow(x, k), Expr::Pow(y, m)) => cmp_expr(x, y).then(k.cmp(m)),
        (Expr::Mul(x), Expr::Mul(y)) | (Expr::Add(x), Expr::Add(y)) => cmp_slices(x, y),
        (Expr::Div(x1, x2), Expr::Div(y1, y2)) | (Expr::Sub(x1, x2), Expr::Sub(y1, y2)) => {
            cmp_expr(x1, y1).then_with(|| cmp_expr(x2, y2))
        }
        (Expr::Neg(x), Expr::Neg(y)) => cmp_expr(x, y),
        _ => unreachable!("rank dispatch"),
    }
}

fn cmp_slices(a: &[Expr], b: &[Expr]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match cmp_expr(x, y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

// ---------------------------------------------------------------------------
// Differentiation

fn zero() -> Expr {
    Expr::Const(0.0)
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 1.0)
}

/// `base^k` as an expression, normalizing k in {0,1} and negative k.
fn pow_expr(base: Expr, k: i32) -> Expr {
    match k {
        0 => Expr::Const(1.0),
        1 => base,
        k if k < 0 => Expr::div(Expr::Const(1.0), Expr::pow(base, -k)),
        k => Expr::pow(base, k),
    }
}

fn mul_pruned(factors: Vec<Expr>) -> Expr {
    let mut out: Vec<Expr> = Vec::new();
    for f in factors {
        if is_zero(&f) {
            return zero();
        }
        if is_one(&f) {
            continue;
        }
        out.push(f);
    }
    match out.len() {
        0 => Expr::Const(1.0),
        1 => out.pop().unwrap(),
        _ => Expr::Mul(out),
    }
}

fn add_pruned(terms: Vec<Expr>) -> Expr {
    let mut out: Vec<Expr> = terms.into_iter().filter(|t| !is_zero(t)).collect();
    match out.len() {
        0 => zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

/// Partial derivative with respect to variable `i`. Results stay factored
/// (chain rule output is not expanded).
pub fn diff(e: &Expr, i: usize) -> Result<Expr, DiffError> {
    Ok(match e {
        Expr::Const(_) => zero(),
        Expr::Var(j) => Expr::Const(if *j == i { 1.0 } else { 0.0 }),
        Expr::Add(v) => {
            let mut terms = Vec::new();
            for c in v {
                terms.push(diff(c, i)?);
            }
            add_pruned(terms)
        }
        Expr::Sub(a, b) => {
            let da = diff(a, i)?;
            let db = diff(b, i)?;
            if is_zero(&db) {
                da
            } else if is_zero(&da) {
                Expr::neg(db)
            } else {
                Expr::sub(da, db)
            }
        }
        Expr::Neg(a) => {
            let da = diff(a, i)?;
            if is_zero(&da) {
                zero()
            } else {
                Expr::neg(da)
            }
        }
        Expr::Mul(v) => {
            let mut terms = Vec::new();
            for (k, c) in v.iter().enumerate() {
                let dc = diff(c, i)?;
                if is_zero(&dc) {
                    continue;
                }
                let mut factors: Vec<Expr> =
                    v.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, f)| f.clone()).collect();
                factors.push(dc);
                terms.push(mul_pruned(factors));
            }
            add_pruned(terms)
        }
        Expr::Div(u, v) => {
            let du = diff(u, i)?;
            let dv = diff(v, i)?;
            if is_zero(&dv) {
                if is_zero(&du) {
                    zero()
                } else {
                    Expr::div(du, (**v).clone())
                }
            } else if is_zero(&du) {
                Expr::div(
                    Expr::neg(mul_pruned(vec![(**u).clone(), dv])),
                    Expr::pow((**v).clone(), 2),
                )
            } else {
                Expr::div(
                    Expr::sub(
                        mul_pruned(vec![du, (**v).clone()]),
                        mul_pruned(vec![(**u).clone(), dv]),
                    ),
                    Expr::pow((**v).clone(), 2),
                )
            }
        }
        Expr::Pow(b, k) => {
            let db = diff(b, i)?;
            if is_zero(&db) || *k == 0 {
                zero()
            } else {
                mul_pruned(vec![
                    Expr::Const(f64::from(*k)),
                    pow_expr((**b).clone(), k - 1),
                    db,
                ])
            }
        }
        Expr::Func(f, a) => {
            let da = diff(a, i)?;
            if is_zero(&da) {
                return Ok(zero());
            }
            let u = (**a).clone();
            match f {
                Func::Sin => mul_pruned(vec![Expr::func(Func::Cos, u), da]),
                Func::Cos => mul_pruned(vec![Expr::neg(Expr::func(Func::Sin, u)), da]),
                Func::Exp => mul_pruned(vec![Expr::func(Func::Exp, u), da]),
                Func::Log => Expr::div(da, u),
                Func::Sqrt => Expr::div(
                    da,
                    mul_pruned(vec![Expr::Const(2.0), Expr::func(Func::Sqrt, u)]),
                ),
                Func::Abs => return Err(DiffError::NonSmoothAbs),
            }
        }
    })
}

/// Symmetric matrix of expressions (Hessian entries).
#[derive(Debug, Clone)]
pub struct SymMatrix {
    n: usize,
    entries: Vec<Expr>,
}

impl SymMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }
}

/// Symbolic Hessian: entry (i,j) is `simplify(d²f/dxᵢdxⱼ)` when `simplified`
/// is set, the raw factored derivative otherwise. Only the upper triangle is
/// computed, then mirrored.
pub fn hessian_sym_with(f: &Expr, n: usize, simplified: bool) -> Result<SymMatrix, DiffError> {
    let mut entries = vec![zero(); n * n];
    for i in 0..n {
        let gi = diff(f, i)?;
        for j in i..n {
            let mut h = diff(&gi, j)?;
            if simplified {
                h = simplify(&h);
            }
            entries[i * n + j] = h.clone();
            entries[j * n + i] = h;
        }
    }
    Ok(SymMatrix { n, entries })
}

pub fn hessian_sym(f: &Expr, n: usize) -> Result<SymMatrix, DiffError> {
    hessian_sym_with(f, n, true)
}

// ---------------------------------------------------------------------------
// Simplification

/// Rewrite `Sub` and `Neg` into `Add`/`Mul` with -1 coefficients.
pub fn normalize(e: &Expr) -> Expr {
    match e {
        Expr::Sub(a, b) => Expr::Add(vec![
            normalize(a),
            Expr::Mul(vec![Expr::Const(-1.0), normalize(b)]),
        ]),
        Expr::Neg(a) => Expr::Mul(vec![Expr::Const(-1.0), normalize(a)]),
        _ => map_children(e, normalize),
    }
}

fn map_children(e: &Expr, f: impl Fn(&Expr) -> Expr + Copy) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Add(v) => Expr::Add(v.iter().map(f).collect()),
        Expr::Mul(v) => Expr::Mul(v.iter().map(f).collect()),
        Expr::Neg(a) => Expr::neg(f(a)),
        Expr::Sub(a, b) => Expr::sub(f(a), f(b)),
        Expr::Div(a, b) => Expr::div(f(a), f(b)),
        Expr::Pow(a, k) => Expr::pow(f(a), *k),
        Expr::Func(g, a) => Expr::func(*g, f(a)),
    }
}

/// Merge nested Add/Mul and unwrap singletons.
pub fn flatten(e: &Expr) -> Expr {
    let e = map_children(e, flatten);
    match e {
        Expr::Add(v) => {
            let mut out = Vec::new();
            for c in v {
                match c {
                    Expr::Add(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            match out.len() {
                0 => zero(),
                1 => out.pop().unwrap(),
                _ => Expr::Add(out),
            }
        }
        Expr::Mul(v) => {
            let mut out = Vec::new();
            for c in v {
                match c {
                    Expr::Mul(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            match out.len() {
                0 => Expr::Const(1.0),
                1 => out.pop().unwrap(),
                _ => Expr::Mul(out),
            }
        }
        other => other,
    }
}

fn clean_const(c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c
    }
}

/// Constant folding and unit/zero identities.
pub fn fold(e: &Expr) -> Expr {
    let e = map_children(e, fold);
    match e {
        Expr::Add(v) => {
            let mut c = 0.0;
            let mut rest = Vec::new();
            for t in v {
                match t {
                    Expr::Const(x) => c += x,
                    other => rest.push(other),
                }
            }
            if c != 0.0 || rest.is_empty() {
                rest.insert(0, Expr::Const(clean_const(c)));
            }
            match rest.len() {
                1 => rest.pop().unwrap(),
                _ => Expr::Add(rest),
            }
        }
        Expr::Mul(v) => {
            let mut c = 1.0;
            let mut rest = Vec::new();
            for t in v {
                match t {
                    Expr::Const(x) => c *= x,
                    other => rest.push(other),
                }
            }
            if c == 0.0 {
                return zero();
            }
            if c != 1.0 || rest.is_empty() {
                rest.insert(0, Expr::Const(clean_const(c)));
            }
            match rest.len() {
                1 => rest.pop().unwrap(),
                _ => Expr::Mul(rest),
            }
        }
        Expr::Neg(a) => match *a {
            Expr::Const(c) => Expr::Const(clean_const(-c)),
            Expr::Neg(inner) => *inner,
            other => Expr::neg(other),
        },
        Expr::Sub(a, b) => match (*a, *b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(clean_const(x - y)),
            (a, Expr::Const(y)) if y == 0.0 => a,
            (Expr::Const(x), b) if x == 0.0 => Expr::neg(b),
            (a, b) => Expr::sub(a, b),
        },
        Expr::Div(a, b) => match (*a, *b) {
            (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(clean_const(x / y)),
            (a, Expr::Const(y)) if y == 1.0 => a,
            (a, Expr::Const(y)) if y != 0.0 && y.is_finite() => {
                fold(&Expr::Mul(vec![Expr::Const(1.0 / y), a]))
            }
            (Expr::Const(x), b) if x == 0.0 => {
                // keep the denominator's domain constraints out of scope
                let _ = b;
                zero()
            }
            (a, b) => Expr::div(a, b),
        },
        Expr::Pow(a, k) => match (*a, k) {
            (_, 0) => Expr::Const(1.0),
            (a, 1) => a,
            (Expr::Const(c), k) => Expr::Const(clean_const(c.powi(k))),
            (Expr::Pow(inner, m), k) => fold(&Expr::pow(*inner, m.saturating_mul(k))),
            (Expr::Mul(v), k) => fold(&Expr::Mul(
                v.into_iter().map(|f| pow_expr(f, k)).collect(),
            )),
            (a, k) => Expr::pow(a, k),
        },
        Expr::Func(f, a) => match *a {
            Expr::Const(c) => {
                let v = f.apply(c);
                if v.is_finite() {
                    Expr::Const(clean_const(v))
                } else {
                    Expr::func(f, Expr::Const(c))
                }
            }
            other => Expr::func(f, other),
        },
        other => other,
    }
}

// ---------------------------------------------------------------------------
// Monomials over an atom basis

const EXPANSION_CAP: usize = 256;

#[derive(Debug, Clone)]
struct Monomial {
    coeff: f64,
    /// (atom base, exponent), sorted by `cmp_expr` on the base, exponent != 0.
    factors: Vec<(Expr, i32)>,
}

impl Monomial {
    fn constant(c: f64) -> Self {
        Monomial {
            coeff: c,
            factors: Vec::new(),
        }
    }

    fn atom(e: Expr, k: i32) -> Self {
        Monomial {
            coeff: 1.0,
            factors: vec![(e, k)],
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(Expr, i32)> = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            match cmp_expr(&self.factors[i].0, &other.factors[j].0) {
                Ordering::Less => {
                    out.push(self.factors[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.factors[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let k = self.factors[i].1 + other.factors[j].1;
                    if k != 0 {
                        out.push((self.factors[i].0.clone(), k));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial {
            coeff: self.coeff * other.coeff,
            factors: out,
        }
    }

    /// Merge distinct exponential factors: exp(u)^a * exp(v)^b -> exp(a*u + b*v).
    fn merge_exponentials(&mut self) {
        let n_exp = self
            .factors
            .iter()
            .filter(|(b, _)| matches!(b, Expr::Func(Func::Exp, _)))
            .count();
        if n_exp < 2 {
            return;
        }
        let mut args = Vec::new();
        self.factors.retain(|(b, k)| {
            if let Expr::Func(Func::Exp, arg) = b {
                args.push(mul_pruned(vec![
                    Expr::Const(f64::from(*k)),
                    (**arg).clone(),
                ]));
                false
            } else {
                true
            }
        });
        let merged = Expr::func(Func::Exp, fold(&flatten(&add_pruned(args))));
        let pos = self
            .factors
            .binary_search_by(|(b, _)| cmp_expr(b, &merged))
            .unwrap_or_else(|p| p);
        self.factors.insert(pos, (merged, 1));
    }
}

fn cmp_factors(a: &[(Expr, i32)], b: &[(Expr, i32)]) -> Ordering {
    for ((ea, ka), (eb, kb)) in a.iter().zip(b.iter()) {
        match cmp_expr(ea, eb).then(ka.cmp(kb)) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Decompose into a sum of monomials. With `expand`, products distribute
/// over sum factors (capped); without it, a sum factor is kept as an atom.
/// Returns None when the decomposition would exceed the cap.
fn decompose(e: &Expr, expand: bool) -> Option<Vec<Monomial>> {
    Some(match e {
        Expr::Const(c) => vec![Monomial::constant(*c)],
        Expr::Var(_) | Expr::Func(_, _) | Expr::Div(_, _) => vec![Monomial::atom(e.clone(), 1)],
        Expr::Neg(a) => decompose(a, expand)?
            .into_iter()
            .map(|mut m| {
                m.coeff = -m.coeff;
                m
            })
            .collect(),
        Expr::Sub(a, b) => {
            if !expand {
                return Some(vec![Monomial::atom(e.clone(), 1)]);
            }
            let mut out = decompose(a, true)?;
            out.extend(decompose(b, true)?.into_iter().map(|mut m| {
                m.coeff = -m.coeff;
                m
            }));
            out
        }
        Expr::Add(v) => {
            if !expand {
                return Some(vec![Monomial::atom(e.clone(), 1)]);
            }
            let mut out = Vec::new();
            for c in v {
                out.extend(decompose(c, true)?);
                if out.len() > EXPANSION_CAP {
                    return None;
                }
            }
            out
        }
        Expr::Mul(v) => {
            let mut acc = vec![Monomial::constant(1.0)];
            for c in v {
                let parts = match c {
                    // sum factors distribute only in expanding mode
                    Expr::Add(_) | Expr::Sub(_, _) if !expand => {
                        vec![Monomial::atom(c.clone(), 1)]
                    }
                    _ => decompose(c, expand)?,
                };
                let mut next = Vec::with_capacity(acc.len() * parts.len());
                for m in &acc {
                    for p in &parts {
                        next.push(m.mul(p));
                    }
                }
                if next.len() > EXPANSION_CAP {
                    return None;
                }
                acc = next;
            }
            for m in &mut acc {
                m.merge_exponentials();
            }
            acc
        }
        Expr::Pow(b, k) => match &**b {
            Expr::Const(c) => vec![Monomial::constant(c.powi(*k))],
            Expr::Mul(_) | Expr::Pow(_, _) => {
                // distribute the exponent over the factors
                let base = decompose(b, false)?;
                if base.len() != 1 {
                    return Some(vec![Monomial::atom(e.clone(), 1)]);
                }
                let m = &base[0];
                if *k < 0 && m.coeff != 1.0 && m.coeff != -1.0 {
                    return Some(vec![Monomial::atom(e.clone(), 1)]);
                }
                vec![Monomial {
                    coeff: m.coeff.powi(*k),
                    factors: m
                        .factors
                        .iter()
                        .map(|(f, p)| (f.clone(), p * *k))
                        .collect(),
                }]
            }
            _ => vec![Monomial::atom((**b).clone(), *k)],
        },
    })
}

fn merge_monomials(ms: Vec<Monomial>) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = Vec::new();
    'outer: for m in ms {
        for o in &mut out {
            if cmp_factors(&o.factors, &m.factors) == Ordering::Equal {
                o.coeff += m.coeff;
                continue 'outer;
            }
        }
        out.push(m);
    }
    out.retain(|m| m.coeff != 0.0);
    out.sort_by(|a, b| cmp_factors(&a.factors, &b.factors).then(a.coeff.total_cmp(&b.coeff)));
    out
}

fn recompose_monomial(m: &Monomial) -> Expr {
    let mut num: Vec<Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    for (base, k) in &m.factors {
        if *k > 0 {
            num.push(pow_expr(base.clone(), *k));
        } else {
            den.push(pow_expr(base.clone(), -k));
        }
    }
    let coeff = clean_const(m.coeff);
    let num_expr = if num.is_empty() {
        Expr::Const(coeff)
    } else if coeff == 1.0 {
        mul_pruned(num)
    } else {
        let mut v = vec![Expr::Const(coeff)];
        v.extend(num);
        Expr::Mul(v)
    };
    if den.is_empty() {
        num_expr
    } else {
        Expr::div(num_expr, mul_pruned(den))
    }
}

fn recompose_sum(ms: &[Monomial]) -> Expr {
    match ms.len() {
        0 => zero(),
        1 => recompose_monomial(&ms[0]),
        _ => Expr::Add(ms.iter().map(recompose_monomial).collect()),
    }
}

/// Like-term collection: at each sum, decompose terms into monomials over
/// the atom basis (distributing products over sums) and merge identical
/// monomials. Kept per node only when it does not grow the subtree.
fn collect(e: &Expr) -> Expr {
    let e = map_children(e, collect);
    match &e {
        Expr::Add(_) => {
            for expand in [true, false] {
                if let Some(ms) = decompose(&e, expand) {
                    let out = recompose_sum(&merge_monomials(ms));
                    if out.node_count() <= e.node_count() {
                        return out;
                    }
                }
            }
            e
        }
        Expr::Mul(_) | Expr::Pow(_, _) => {
            if let Some(ms) = decompose(&e, false) {
                if ms.len() == 1 {
                    let out = recompose_monomial(&ms[0]);
                    if out.node_count() <= e.node_count() {
                        return out;
                    }
                }
            }
            e
        }
        _ => e,
    }
}

fn f64_as_u64_int(c: f64) -> Option<u64> {
    let a = c.abs();
    if a.fract() == 0.0 && a <= 2f64.powi(53) && a >= 1.0 {
        Some(a as u64)
    } else {
        None
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Common-factor extraction from sums whose terms all share a syntactic
/// factor (including shared power bases with differing exponents) or an
/// integral coefficient divisor.
fn extract(e: &Expr) -> Expr {
    let e = map_children(e, extract);
    let Expr::Add(terms) = &e else { return e };
    let mut monos = Vec::with_capacity(terms.len());
    for t in terms {
        match decompose(t, false) {
            Some(ms) if ms.len() == 1 => monos.push(ms.into_iter().next().unwrap()),
            _ => return e,
        }
    }
    // shared bases: present in every term, extracted at the minimum exponent
    let mut shared: Vec<(Expr, i32)> = monos[0].factors.clone();
    for m in &monos[1..] {
        shared.retain_mut(|(base, k)| {
            for (b2, k2) in &m.factors {
                if cmp_expr(base, b2) == Ordering::Equal && *k2 > 0 && *k > 0 {
                    *k = (*k).min(*k2);
                    return true;
                }
            }
            false
        });
        if shared.is_empty() {
            break;
        }
    }
    // integral coefficient gcd, negated when every term is negative
    let mut g = 1.0;
    if let Some(ints) = monos
        .iter()
        .map(|m| f64_as_u64_int(m.coeff))
        .collect::<Option<Vec<_>>>()
    {
        let mut acc = ints[0];
        for v in &ints[1..] {
            acc = gcd_u64(acc, *v);
        }
        g = acc as f64;
        if monos.iter().all(|m| m.coeff < 0.0) {
            g = -g;
        }
    }
    if shared.is_empty() && g == 1.0 {
        return e;
    }
    let shared_mono = Monomial {
        coeff: 1.0 / g,
        factors: shared.iter().map(|(b, k)| (b.clone(), -k)).collect(),
    };
    let residual: Vec<Monomial> = monos.iter().map(|m| m.mul(&shared_mono)).collect();
    let mut factors = vec![];
    if g != 1.0 {
        factors.push(Expr::Const(g));
    }
    factors.extend(shared.iter().map(|(b, k)| pow_expr(b.clone(), *k)));
    factors.push(recompose_sum(&residual));
    let out = mul_pruned(factors);
    if out.node_count() <= e.node_count() {
        out
    } else {
        e
    }
}

/// Quotient cancellation of syntactic factors shared between numerator and
/// denominator.
fn cancel(e: &Expr) -> Expr {
    let e = map_children(e, cancel);
    let Expr::Div(u, v) = &e else { return e };
    let (Some(mu), Some(mv)) = (decompose(u, false), decompose(v, false)) else {
        return e;
    };
    if mu.len() != 1 || mv.len() != 1 {
        return e;
    }
    let (mut mu, mv) = (mu.into_iter().next().unwrap(), mv.into_iter().next().unwrap());
    if mv.coeff == 0.0 {
        return e;
    }
    // fold the denominator coefficient and negate shared factors into the
    // numerator; whatever remains of the denominator stays below the bar
    let inv = Monomial {
        coeff: 1.0 / mv.coeff,
        factors: mv
            .factors
            .iter()
            .filter(|(b, k)| {
                *k > 0 && mu.factors.iter().any(|(b2, k2)| {
                    *k2 > 0 && cmp_expr(b, b2) == Ordering::Equal
                })
            })
            .map(|(b, k)| {
                let k2 = mu
                    .factors
                    .iter()
                    .find(|(b2, _)| cmp_expr(b, b2) == Ordering::Equal)
                    .map(|(_, k2)| *k2)
                    .unwrap();
                (b.clone(), -(*k).min(k2))
            })
            .collect(),
    };
    if inv.coeff == 1.0 && inv.factors.is_empty() {
        return e;
    }
    let cancelled = inv.factors.clone();
    mu = mu.mul(&inv);
    let rest: Vec<(Expr, i32)> = mv
        .factors
        .iter()
        .filter_map(|(b, k)| {
            let removed = cancelled
                .iter()
                .find(|(b2, _)| cmp_expr(b, b2) == Ordering::Equal)
                .map(|(_, k2)| -k2)
                .unwrap_or(0);
            let left = k - removed;
            (left != 0).then(|| (b.clone(), left))
        })
        .collect();
    let num = recompose_monomial(&mu);
    let out = if rest.is_empty() {
        num
    } else {
        Expr::div(
            num,
            mul_pruned(rest.into_iter().map(|(b, k)| pow_expr(b, k)).collect()),
        )
    };
    if out.node_count() <= e.node_count() {
        out
    } else {
        e
    }
}

/// Fixed-point simplification. The result is semantically equal to the
/// input on its domain; identity is always a legal output.
pub fn simplify(e: &Expr) -> Expr {
    let mut cur = flatten(&fold(&normalize(e)));
    for _ in 0..16 {
        let mut next = cur.clone();
        for pass in [fold, flatten, collect, extract, cancel, fold, flatten] {
            let cand = pass(&next);
            if cand.node_count() <= next.node_count() {
                next = cand;
            }
        }
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}
