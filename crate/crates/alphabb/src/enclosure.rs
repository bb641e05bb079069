//! Range enclosures of expressions over interval boxes: natural interval
//! evaluation, the mean value form, the slope form, and a one-pass
//! monotonicity refinement. All derived forms are intersected with natural
//! evaluation before being returned.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::Expr;
use crate::expr::Func;
use crate::interval::{Interval, IntervalBox, IntervalError};
use crate::symdiff::{diff, simplify, DiffError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnclosureError {
    #[error("evaluation error at node {path}: {msg}")]
    Eval { path: String, msg: String },
    #[error(transparent)]
    NonSmooth(#[from] DiffError),
    /// Disjoint results from two supposedly sound enclosures: an internal
    /// soundness violation, never a user error.
    #[error("internal inconsistency: enclosure forms produced disjoint intervals")]
    Inconsistent,
}

fn node_err(path: &[usize], err: &IntervalError) -> EnclosureError {
    let mut p = String::from("root");
    for i in path {
        let _ = write!(p, ".{i}");
    }
    EnclosureError::Eval {
        path: p,
        msg: err.to_string(),
    }
}

/// Recursive natural interval evaluation; `outward` widens every
/// intermediate result by one ulp per endpoint, making the enclosure sound
/// under outward rounding.
fn ieval(
    e: &Expr,
    bx: &IntervalBox,
    outward: bool,
    path: &mut Vec<usize>,
) -> Result<Interval, EnclosureError> {
    let round = |v: Interval| if outward { v.outward() } else { v };
    match e {
        Expr::Const(c) => Ok(Interval::point(*c)),
        Expr::Var(i) => {
            if *i < bx.dim() {
                Ok(*bx.component(*i))
            } else {
                Err(EnclosureError::Eval {
                    path: {
                        let mut p = String::from("root");
                        for k in path.iter() {
                            let _ = write!(p, ".{k}");
                        }
                        p
                    },
                    msg: format!("variable index {i} out of range"),
                })
            }
        }
        Expr::Add(v) => {
            let mut s = Interval::point(0.0);
            for (k, c) in v.iter().enumerate() {
                path.push(k);
                let vi = ieval(c, bx, outward, path)?;
                path.pop();
                s = round(s.add(&vi));
            }
            Ok(s)
        }
        Expr::Mul(v) => {
            let mut p = Interval::point(1.0);
            for (k, c) in v.iter().enumerate() {
                path.push(k);
                let vi = ieval(c, bx, outward, path)?;
                path.pop();
                p = round(p.mul(&vi));
            }
            Ok(p)
        }
        Expr::Neg(a) => {
            path.push(0);
            let v = ieval(a, bx, outward, path)?;
            path.pop();
            Ok(v.neg())
        }
        Expr::Sub(a, b) => {
            path.push(0);
            let va = ieval(a, bx, outward, path)?;
            path.pop();
            path.push(1);
            let vb = ieval(b, bx, outward, path)?;
            path.pop();
            Ok(round(va.sub(&vb)))
        }
        Expr::Div(a, b) => {
            path.push(0);
            let va = ieval(a, bx, outward, path)?;
            path.pop();
            path.push(1);
            let vb = ieval(b, bx, outward, path)?;
            path.pop();
            va.div(&vb).map(round).map_err(|er| node_err(path, &er))
        }
        Expr::Pow(a, k) => {
            path.push(0);
            let v = ieval(a, bx, outward, path)?;
            path.pop();
            v.powi(*k).map(round).map_err(|er| node_err(path, &er))
        }
        Expr::Func(f, a) => {
            path.push(0);
            let v = ieval(a, bx, outward, path)?;
            path.pop();
            let r = match f {
                Func::Sin => Ok(v.sin()),
                Func::Cos => Ok(v.cos()),
                Func::Exp => Ok(v.exp()),
                Func::Log => v.ln(),
                Func::Sqrt => v.sqrt(),
                Func::Abs => Ok(v.abs()),
            };
            r.map(round).map_err(|er| node_err(path, &er))
        }
    }
}

pub fn natural_eval(e: &Expr, bx: &IntervalBox) -> Result<Interval, EnclosureError> {
    ieval(e, bx, false, &mut Vec::new())
}

/// Natural evaluation with one-ulp outward widening of every intermediate.
pub fn natural_eval_outward(e: &Expr, bx: &IntervalBox) -> Result<Interval, EnclosureError> {
    ieval(e, bx, true, &mut Vec::new())
}

fn point_box(c: &[f64]) -> IntervalBox {
    IntervalBox::new(c.iter().map(|&x| Interval::point(x)).collect())
}

/// f(c) + Σᵢ Gᵢ·(𝒙ᵢ − cᵢ) with Gᵢ the natural enclosure of the simplified
/// partial derivative; intersected with natural evaluation.
pub fn mean_value_form(
    e: &Expr,
    bx: &IntervalBox,
    center: &[f64],
) -> Result<Interval, EnclosureError> {
    let natural = natural_eval(e, bx)?;
    let fc = natural_eval(e, &point_box(center))?;
    let mut acc = fc;
    for i in 0..bx.dim() {
        let g = natural_eval(&simplify(&diff(e, i)?), bx)?;
        let dx = bx.component(i).sub(&Interval::point(center[i]));
        acc = acc.add(&g.mul(&dx));
    }
    acc.intersect(&natural)
        .map_err(|_| EnclosureError::Inconsistent)
}

/// Enclosure of f over the box as f(c) + slopeᵀ(𝒙 − c).
#[derive(Debug, Clone)]
pub struct SlopePair {
    pub value_at_center: Interval,
    pub slope: Vec<Interval>,
}

/// One node of the recursive slope evaluation: an enclosure of the range
/// over the box, of the value at the center, and of the slope vector.
#[derive(Debug, Clone)]
struct SlopeTriple {
    range: Interval,
    value: Interval,
    slope: Vec<Interval>,
}

impl SlopeTriple {
    fn constant(c: f64, n: usize) -> Self {
        SlopeTriple {
            range: Interval::point(c),
            value: Interval::point(c),
            slope: vec![Interval::point(0.0); n],
        }
    }
}

fn slope_add(a: &SlopeTriple, b: &SlopeTriple) -> SlopeTriple {
    SlopeTriple {
        range: a.range.add(&b.range),
        value: a.value.add(&b.value),
        slope: a
            .slope
            .iter()
            .zip(&b.slope)
            .map(|(x, y)| x.add(y))
            .collect(),
    }
}

fn slope_neg(a: &SlopeTriple) -> SlopeTriple {
    SlopeTriple {
        range: a.range.neg(),
        value: a.value.neg(),
        slope: a.slope.iter().map(Interval::neg).collect(),
    }
}

/// slope(u·v) = slope(u)·range(v) + u(c)·slope(v)
fn slope_mul(a: &SlopeTriple, b: &SlopeTriple) -> SlopeTriple {
    SlopeTriple {
        range: a.range.mul(&b.range),
        value: a.value.mul(&b.value),
        slope: a
            .slope
            .iter()
            .zip(&b.slope)
            .map(|(sa, sb)| sa.mul(&b.range).add(&a.value.mul(sb)))
            .collect(),
    }
}

/// slope(u/v) = (slope(u) − (u/v)(𝒙)·slope(v)) / range(v)
fn slope_div(
    a: &SlopeTriple,
    b: &SlopeTriple,
    path: &mut Vec<usize>,
) -> Result<SlopeTriple, EnclosureError> {
    let range = a.range.div(&b.range).map_err(|er| node_err(path, &er))?;
    let value = a.value.div(&b.value).map_err(|er| node_err(path, &er))?;
    let slope = a
        .slope
        .iter()
        .zip(&b.slope)
        .map(|(sa, sb)| {
            sa.sub(&range.mul(sb))
                .div(&b.range)
                .map_err(|er| node_err(path, &er))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SlopeTriple { range, value, slope })
}

/// φ-slope-enclosure: hull of φ′ over hull(range(u) ∪ {u(c)}); for abs the
/// sign constant when the hull does not straddle zero, else [−1,1].
fn phi_slope(f: Func, h: &Interval, path: &mut Vec<usize>) -> Result<Interval, EnclosureError> {
    Ok(match f {
        Func::Sin => h.cos(),
        Func::Cos => h.sin().neg(),
        Func::Exp => h.exp(),
        Func::Log => Interval::point(1.0)
            .div(h)
            .map_err(|er| node_err(path, &er))?,
        Func::Sqrt => {
            let s = h.sqrt().map_err(|er| node_err(path, &er))?;
            Interval::point(1.0)
                .div(&s.scale(2.0))
                .map_err(|er| node_err(path, &er))?
        }
        Func::Abs => {
            if h.zero_in_interior() {
                Interval::new(-1.0, 1.0)
            } else if h.lo() >= 0.0 {
                Interval::point(1.0)
            } else {
                Interval::point(-1.0)
            }
        }
    })
}

fn slope_eval(
    e: &Expr,
    bx: &IntervalBox,
    center: &[f64],
    path: &mut Vec<usize>,
) -> Result<SlopeTriple, EnclosureError> {
    let n = bx.dim();
    match e {
        Expr::Const(c) => Ok(SlopeTriple::constant(*c, n)),
        Expr::Var(i) => {
            let mut slope = vec![Interval::point(0.0); n];
            slope[*i] = Interval::point(1.0);
            Ok(SlopeTriple {
                range: *bx.component(*i),
                value: Interval::point(center[*i]),
                slope,
            })
        }
        Expr::Add(v) => {
            let mut acc = SlopeTriple::constant(0.0, n);
            for (k, c) in v.iter().enumerate() {
                path.push(k);
                let t = slope_eval(c, bx, center, path)?;
                path.pop();
                acc = slope_add(&acc, &t);
            }
            Ok(acc)
        }
        Expr::Mul(v) => {
            let mut acc = SlopeTriple::constant(1.0, n);
            for (k, c) in v.iter().enumerate() {
                path.push(k);
                let t = slope_eval(c, bx, center, path)?;
                path.pop();
                acc = slope_mul(&acc, &t);
            }
            Ok(acc)
        }
        Expr::Neg(a) => {
            path.push(0);
            let t = slope_eval(a, bx, center, path)?;
            path.pop();
            Ok(slope_neg(&t))
        }
        Expr::Sub(a, b) => {
            path.push(0);
            let ta = slope_eval(a, bx, center, path)?;
            path.pop();
            path.push(1);
            let tb = slope_eval(b, bx, center, path)?;
            path.pop();
            Ok(slope_add(&ta, &slope_neg(&tb)))
        }
        Expr::Div(a, b) => {
            path.push(0);
            let ta = slope_eval(a, bx, center, path)?;
            path.pop();
            path.push(1);
            let tb = slope_eval(b, bx, center, path)?;
            path.pop();
            slope_div(&ta, &tb, path)
        }
        Expr::Pow(a, k) => {
            path.push(0);
            let t = slope_eval(a, bx, center, path)?;
            path.pop();
            if *k < 0 {
                let inv = slope_div(&SlopeTriple::constant(1.0, n), &pow_triple(&t, -k), path)?;
                return Ok(inv);
            }
            let mut out = pow_triple(&t, *k);
            // the product recursion loses the even-power image; the direct
            // power of the range is sound and at least as tight
            if let Ok(exact) = t.range.powi(*k) {
                if let Ok(tight) = out.range.intersect(&exact) {
                    out.range = tight;
                }
            }
            Ok(out)
        }
        Expr::Func(f, a) => {
            path.push(0);
            let t = slope_eval(a, bx, center, path)?;
            path.pop();
            let range = match f {
                Func::Sin => t.range.sin(),
                Func::Cos => t.range.cos(),
                Func::Exp => t.range.exp(),
                Func::Log => t.range.ln().map_err(|er| node_err(path, &er))?,
                Func::Sqrt => t.range.sqrt().map_err(|er| node_err(path, &er))?,
                Func::Abs => t.range.abs(),
            };
            let value = match f {
                Func::Sin => t.value.sin(),
                Func::Cos => t.value.cos(),
                Func::Exp => t.value.exp(),
                Func::Log => t.value.ln().map_err(|er| node_err(path, &er))?,
                Func::Sqrt => t.value.sqrt().map_err(|er| node_err(path, &er))?,
                Func::Abs => t.value.abs(),
            };
            let hull = t.range.hull(&t.value);
            let phi = phi_slope(*f, &hull, path)?;
            Ok(SlopeTriple {
                range,
                value,
                slope: t.slope.iter().map(|s| phi.mul(s)).collect(),
            })
        }
    }
}

/// u^k for k ≥ 0 by repeated application of the product slope rule
/// (slope of u² is range(u) + u(c), etc.).
fn pow_triple(t: &SlopeTriple, k: i32) -> SlopeTriple {
    let mut acc = SlopeTriple::constant(1.0, t.slope.len());
    for _ in 0..k {
        acc = slope_mul(&acc, t);
    }
    acc
}

/// Slope pair of `e` at `center`: the enclosure f(c) + slopeᵀ(𝒙 − c)
/// contains f(𝒙) for every 𝒙 in the box.
pub fn slope_pair(
    e: &Expr,
    bx: &IntervalBox,
    center: &[f64],
) -> Result<SlopePair, EnclosureError> {
    let t = slope_eval(e, bx, center, &mut Vec::new())?;
    Ok(SlopePair {
        value_at_center: t.value,
        slope: t.slope,
    })
}

pub fn slope_form(e: &Expr, bx: &IntervalBox, center: &[f64]) -> Result<Interval, EnclosureError> {
    let natural = natural_eval(e, bx)?;
    let sp = slope_pair(e, bx, center)?;
    let mut acc = sp.value_at_center;
    for i in 0..bx.dim() {
        let dx = bx.component(i).sub(&Interval::point(center[i]));
        acc = acc.add(&sp.slope[i].mul(&dx));
    }
    acc.intersect(&natural)
        .map_err(|_| EnclosureError::Inconsistent)
}

/// One-pass monotonicity refinement: variables whose gradient enclosure is
/// sign-stable over the box are fixed at the extremizing endpoints.
pub fn monotonic_refine(e: &Expr, bx: &IntervalBox) -> Result<Interval, EnclosureError> {
    let natural = natural_eval(e, bx)?;
    let mut lo_box: Vec<Interval> = bx.components().to_vec();
    let mut hi_box: Vec<Interval> = bx.components().to_vec();
    for i in 0..bx.dim() {
        let g = natural_eval(&simplify(&diff(e, i)?), bx)?;
        let c = bx.component(i);
        if g.lo() >= 0.0 {
            lo_box[i] = Interval::point(c.lo());
            hi_box[i] = Interval::point(c.hi());
        } else if g.hi() <= 0.0 {
            lo_box[i] = Interval::point(c.hi());
            hi_box[i] = Interval::point(c.lo());
        }
    }
    let lo = natural_eval(e, &IntervalBox::new(lo_box))?;
    let hi = natural_eval(e, &IntervalBox::new(hi_box))?;
    Interval::new(lo.lo(), hi.hi())
        .intersect(&natural)
        .map_err(|_| EnclosureError::Inconsistent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    Natural,
    MeanValue,
    Slope,
    Monotonic,
}

/// Intersection of the selected forms' enclosures, all centered at the box
/// midpoint. A genuinely empty intersection means one of the enclosures was
/// unsound and is reported as an internal inconsistency.
pub fn best_enclosure(
    e: &Expr,
    bx: &IntervalBox,
    forms: &[Form],
) -> Result<Interval, EnclosureError> {
    assert!(!forms.is_empty(), "at least one enclosure form required");
    let c = bx.midpoint();
    let mut acc: Option<Interval> = None;
    for f in forms {
        let v = match f {
            Form::Natural => natural_eval(e, bx)?,
            Form::MeanValue => mean_value_form(e, bx, &c)?,
            Form::Slope => slope_form(e, bx, &c)?,
            Form::Monotonic => monotonic_refine(e, bx)?,
        };
        acc = Some(match acc {
            None => v,
            Some(a) => a.intersect(&v).map_err(|_| EnclosureError::Inconsistent)?,
        });
    }
    Ok(acc.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(text: &str, vars: &[&str]) -> Expr {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        parse(text, &names).unwrap()
    }

    fn bx(ivs: &[(f64, f64)]) -> IntervalBox {
        IntervalBox::new(ivs.iter().map(|&(l, h)| Interval::new(l, h)).collect())
    }

    #[test]
    fn natural_dependency_widening() {
        // the two algebraically equal quadratics evaluate differently
        let b = bx(&[(1.0, 4.0)]);
        let loose = natural_eval(&p("x1^2-6*x1+9", &["x1"]), &b).unwrap();
        assert_eq!((loose.lo(), loose.hi()), (-14.0, 19.0));
        let tight = natural_eval(&p("(x1-3)^2", &["x1"]), &b).unwrap();
        assert_eq!((tight.lo(), tight.hi()), (0.0, 4.0));
    }

    #[test]
    fn natural_constant_is_point() {
        let b = bx(&[(-5.0, 5.0)]);
        let v = natural_eval(&p("3.25", &["x1"]), &b).unwrap();
        assert_eq!((v.lo(), v.hi()), (3.25, 3.25));
    }

    #[test]
    fn natural_domain_violation_has_path() {
        let b = bx(&[(-1.0, 1.0)]);
        let err = natural_eval(&p("1/x1", &["x1"]), &b).unwrap_err();
        match err {
            EnclosureError::Eval { path, .. } => assert!(path.starts_with("root")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn outward_contains_plain() {
        let b = bx(&[(0.1, 0.9), (0.2, 1.7)]);
        let e = p("exp(x1)*sin(x2)+x1/(x2+1)", &["x1", "x2"]);
        let plain = natural_eval(&e, &b).unwrap();
        let wide = natural_eval_outward(&e, &b).unwrap();
        assert!(wide.contains_interval(&plain));
        assert!(wide.width() > plain.width());
    }

    #[test]
    fn mean_value_form_examples() {
        let b = bx(&[(1.0, 4.0)]);
        let e = p("(x1-3)^2", &["x1"]);
        let mv = mean_value_form(&e, &b, &[2.5]).unwrap();
        assert!(mv.contains_interval(&Interval::new(0.0, 4.0)));
        // exact for linear expressions
        let lin = p("2*x1+1", &["x1"]);
        let v = mean_value_form(&lin, &bx(&[(0.0, 1.0)]), &[0.5]).unwrap();
        assert_eq!((v.lo(), v.hi()), (1.0, 3.0));
    }

    #[test]
    fn mean_value_form_is_sound_by_sampling() {
        let b = bx(&[(1.0, 4.0)]);
        let e = p("(x1-3)^2", &["x1"]);
        let mv = mean_value_form(&e, &b, &[2.5]).unwrap();
        for k in 0..1000 {
            let x = 1.0 + 3.0 * (k as f64 / 999.0);
            let v = (x - 3.0) * (x - 3.0);
            assert!(mv.contains(v));
        }
    }

    #[test]
    fn slope_form_tighter_than_mean_value() {
        let b = bx(&[(1.0, 4.0)]);
        let e = p("x1^2", &["x1"]);
        let sf = slope_form(&e, &b, &[2.5]).unwrap();
        let mv = mean_value_form(&e, &b, &[2.5]).unwrap();
        assert!(mv.contains_interval(&sf));
        for k in 0..1000 {
            let x = 1.0 + 3.0 * (k as f64 / 999.0);
            assert!(sf.contains(x * x));
        }
    }

    #[test]
    fn slope_form_handles_abs() {
        let b = bx(&[(-1.0, 2.0)]);
        let e = p("abs(x1)", &["x1"]);
        let sf = slope_form(&e, &b, &[0.5]).unwrap();
        for k in 0..1000 {
            let x = -1.0 + 3.0 * (k as f64 / 999.0);
            assert!(sf.contains(x.abs()), "{x} not in {sf:?}");
        }
        // constants stay points under the slope form
        let c = slope_form(&p("7", &["x1"]), &b, &[0.0]).unwrap();
        assert_eq!((c.lo(), c.hi()), (7.0, 7.0));
    }

    #[test]
    fn slope_form_bilinear_corpus_rows_are_exact_integers() {
        // the two scaled-off-diagonal row expressions of the bilinear
        // least-squares problem on [0,4]² with midpoint center
        let b = bx(&[(0.0, 4.0), (0.0, 4.0)]);
        let h1 = p("6+2*x2^2-4*x1*x2", &["x1", "x2"]);
        let h2 = p("2*x1^2-4*x1*x2", &["x1", "x2"]);
        let s1 = slope_form(&h1, &b, &[2.0, 2.0]).unwrap();
        let s2 = slope_form(&h2, &b, &[2.0, 2.0]).unwrap();
        assert_eq!((s1.lo(), s1.hi()), (-42.0, 38.0));
        assert_eq!((s2.lo(), s2.hi()), (-48.0, 32.0));
        // simplification must not change either enclosure
        let s1s = slope_form(&simplify(&h1), &b, &[2.0, 2.0]).unwrap();
        let s2s = slope_form(&simplify(&h2), &b, &[2.0, 2.0]).unwrap();
        assert_eq!((s1s.lo(), s1s.hi()), (-42.0, 38.0));
        assert_eq!((s2s.lo(), s2s.hi()), (-48.0, 32.0));
    }

    #[test]
    fn monotonic_refine_examples() {
        // strictly decreasing: the image is exact
        let v = monotonic_refine(&p("2-4*exp(x1)", &["x1"]), &bx(&[(0.0, 2.0)])).unwrap();
        assert_eq!(v.hi(), -2.0);
        assert!((v.lo() - (2.0 - 4.0 * (2f64).exp())).abs() < 1e-12);
        // increasing square
        let v = monotonic_refine(&p("x1^2", &["x1"]), &bx(&[(1.0, 2.0)])).unwrap();
        assert_eq!((v.lo(), v.hi()), (1.0, 4.0));
        // sign change: falls back to natural
        let v = monotonic_refine(&p("x1^2", &["x1"]), &bx(&[(-1.0, 1.0)])).unwrap();
        assert_eq!((v.lo(), v.hi()), (0.0, 1.0));
    }

    #[test]
    fn best_enclosure_intersects() {
        let b = bx(&[(1.0, 4.0)]);
        let e = p("x1^2-6*x1+9", &["x1"]);
        let nat = natural_eval(&e, &b).unwrap();
        let best = best_enclosure(&e, &b, &[Form::Natural, Form::MeanValue]).unwrap();
        assert!(nat.contains_interval(&best));
        // a single selected form is just that form
        let only = best_enclosure(&e, &b, &[Form::Natural]).unwrap();
        assert_eq!((only.lo(), only.hi()), (nat.lo(), nat.hi()));
        // slope participation keeps the row bound at -42 for the corpus row
        let b2 = bx(&[(0.0, 4.0), (0.0, 4.0)]);
        let h1 = p("6+2*x2^2-4*x1*x2", &["x1", "x2"]);
        let best = best_enclosure(
            &h1,
            &b2,
            &[Form::Natural, Form::MeanValue, Form::Slope],
        )
        .unwrap();
        assert!(best.lo() >= -42.0);
    }

    #[test]
    fn soundness_random_sampling_across_forms() {
        let vars = ["x1", "x2"];
        let exprs = [
            "x1^2-6*x1+9",
            "(2*x1+x2-3)^2+(x1*x2-1)^2",
            "cos(x1)*sin(x2)-x1/(x2^2+1)",
            "(1+x1-exp(x2))^2+x2^2",
        ];
        let b = bx(&[(0.1, 2.0), (0.3, 1.7)]);
        let c = b.midpoint();
        // deterministic low-discrepancy points
        let mut s = 0x9e3779b97f4a7c15u64;
        for text in exprs {
            let e = p(text, &vars);
            let nat = natural_eval(&e, &b).unwrap();
            let mv = mean_value_form(&e, &b, &c).unwrap();
            let sf = slope_form(&e, &b, &c).unwrap();
            let mr = monotonic_refine(&e, &b).unwrap();
            for _ in 0..2500 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u1 = ((s >> 11) as f64) / (1u64 << 53) as f64;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u2 = ((s >> 11) as f64) / (1u64 << 53) as f64;
                let pt = [0.1 + 1.9 * u1, 0.3 + 1.4 * u2];
                let v = crate::expr::eval_point(&e, &pt).unwrap();
                let tol = 1e-9 * (1.0 + v.abs());
                for (name, iv) in [("nat", nat), ("mv", mv), ("sf", sf), ("mr", mr)] {
                    assert!(
                        iv.lo() - tol <= v && v <= iv.hi() + tol,
                        "{text} {name} {pt:?} {v} not in {iv:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_occurrence_natural_is_optimal() {
        // every variable occurs once: natural evaluation is the exact image
        let e = p("2-4*exp(x1)+sin(x2)", &["x1", "x2"]);
        let b = bx(&[(0.0, 1.0), (0.0, 1.0)]);
        let nat = natural_eval(&e, &b).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..200 {
            for j in 0..200 {
                let pt = [i as f64 / 199.0, j as f64 / 199.0];
                let v = crate::expr::eval_point(&e, &pt).unwrap();
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let tol = 1e-9 * (1.0 + nat.width());
        assert!((nat.lo() - lo).abs() <= 1e-4 + tol); // grid resolution
        assert!((nat.hi() - hi).abs() <= 1e-4 + tol);
        assert!(nat.lo() <= lo && hi <= nat.hi());
    }
}
