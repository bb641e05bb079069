//! Forward-mode interval evaluation carrying value, gradient, and Hessian
//! enclosures through the expression tree, the way automatic
//! differentiation toolboxes do. Integer powers are evaluated as repeated
//! products by binary exponentiation (x² = x·x, x⁴ = (x·x)·(x·x)), which is
//! what those toolboxes actually execute and what the enclosures here are
//! calibrated against.

use crate::enclosure::EnclosureError;
use crate::expr::{Expr, Func};
use crate::interval::{Interval, IntervalBox, IntervalError, IntervalMatrix};

/// Value, gradient, and upper-triangle Hessian enclosures at one node.
#[derive(Debug, Clone)]
struct Triple {
    x: Interval,
    dx: Vec<Interval>,
    /// Upper triangle (i ≤ j), row-major packed.
    hx: Vec<Interval>,
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn tri_idx(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i * (2 * n - i + 1) / 2 + (j - i)
}

impl Triple {
    fn constant(c: f64, n: usize) -> Self {
        Triple {
            x: Interval::point(c),
            dx: vec![Interval::point(0.0); n],
            hx: vec![Interval::point(0.0); tri_len(n)],
        }
    }

    fn variable(i: usize, range: Interval, n: usize) -> Self {
        let mut t = Triple::constant(0.0, n);
        t.x = range;
        t.dx[i] = Interval::point(1.0);
        t
    }

    fn n(&self) -> usize {
        self.dx.len()
    }
}

fn tri_add(a: &Triple, b: &Triple) -> Triple {
    Triple {
        x: a.x.add(&b.x),
        dx: a.dx.iter().zip(&b.dx).map(|(p, q)| p.add(q)).collect(),
        hx: a.hx.iter().zip(&b.hx).map(|(p, q)| p.add(q)).collect(),
    }
}

fn tri_neg(a: &Triple) -> Triple {
    Triple {
        x: a.x.neg(),
        dx: a.dx.iter().map(Interval::neg).collect(),
        hx: a.hx.iter().map(Interval::neg).collect(),
    }
}

fn tri_sub(a: &Triple, b: &Triple) -> Triple {
    tri_add(a, &tri_neg(b))
}

fn tri_mul(a: &Triple, b: &Triple) -> Triple {
    let n = a.n();
    let x = a.x.mul(&b.x);
    let dx = (0..n)
        .map(|i| a.dx[i].mul(&b.x).add(&a.x.mul(&b.dx[i])))
        .collect();
    let mut hx = Vec::with_capacity(tri_len(n));
    for i in 0..n {
        for j in i..n {
            let k = tri_idx(n, i, j);
            let v = a.hx[k]
                .mul(&b.x)
                .add(&a.dx[i].mul(&b.dx[j]))
                .add(&a.dx[j].mul(&b.dx[i]))
                .add(&a.x.mul(&b.hx[k]));
            hx.push(v);
        }
    }
    Triple { x, dx, hx }
}

fn tri_div(a: &Triple, b: &Triple) -> Result<Triple, IntervalError> {
    let n = a.n();
    let x = a.x.div(&b.x)?;
    let mut dx = Vec::with_capacity(n);
    for i in 0..n {
        dx.push(a.dx[i].sub(&x.mul(&b.dx[i])).div(&b.x)?);
    }
    let mut hx = Vec::with_capacity(tri_len(n));
    for i in 0..n {
        for j in i..n {
            let k = tri_idx(n, i, j);
            let v = a.hx[k]
                .sub(&dx[i].mul(&b.dx[j]).scale(2.0))
                .sub(&x.mul(&b.hx[k]))
                .div(&b.x)?;
            hx.push(v);
        }
    }
    Ok(Triple { x, dx, hx })
}

/// Power by repeated products, as the chain of multiplications executes it:
/// intermediate value slots are the dependent products (x·x over [−1,1] is
/// [−1,1], not [0,1]).
fn tri_pow_chain(a: &Triple, k: u32) -> Triple {
    match k {
        0 => Triple::constant(1.0, a.n()),
        1 => a.clone(),
        k if k % 2 == 0 => {
            let h = tri_pow_chain(a, k / 2);
            tri_mul(&h, &h)
        }
        k => tri_mul(a, &tri_pow_chain(a, k - 1)),
    }
}

fn tri_pow(a: &Triple, k: i32) -> Result<Triple, IntervalError> {
    let n = a.n();
    if k < 0 {
        return tri_div(&Triple::constant(1.0, n), &tri_pow(a, -k)?);
    }
    let mut t = tri_pow_chain(a, k as u32);
    // the node's own value is the exact power image (even powers do not dip
    // below zero); derivative slots keep the repeated-product enclosures
    t.x = a.x.powi(k)?;
    Ok(t)
}

/// First and second derivative enclosures of the elementary function over
/// the operand's value enclosure.
fn phi_derivs(f: Func, x: &Interval) -> Result<(Interval, Interval), IntervalError> {
    Ok(match f {
        Func::Sin => (x.cos(), x.sin().neg()),
        Func::Cos => (x.sin().neg(), x.cos().neg()),
        Func::Exp => (x.exp(), x.exp()),
        Func::Log => {
            let inv = Interval::point(1.0).div(x)?;
            (inv, inv.mul(&inv).neg())
        }
        Func::Sqrt => {
            let s = x.sqrt()?;
            let d1 = Interval::point(0.5).div(&s)?;
            let d2 = Interval::point(-0.25).div(&x.mul(&s))?;
            (d1, d2)
        }
        Func::Abs => unreachable!("abs is rejected before derivative rules apply"),
    })
}

fn tri_func(f: Func, a: &Triple) -> Result<Triple, EnclosureError> {
    if f == Func::Abs {
        return Err(EnclosureError::NonSmooth(
            crate::symdiff::DiffError::NonSmoothAbs,
        ));
    }
    let n = a.n();
    let wrap = |er: IntervalError| EnclosureError::Eval {
        path: "root".into(),
        msg: er.to_string(),
    };
    let x = match f {
        Func::Sin => a.x.sin(),
        Func::Cos => a.x.cos(),
        Func::Exp => a.x.exp(),
        Func::Log => a.x.ln().map_err(wrap)?,
        Func::Sqrt => a.x.sqrt().map_err(wrap)?,
        Func::Abs => unreachable!(),
    };
    let (d1, d2) = phi_derivs(f, &a.x).map_err(wrap)?;
    let dx = a.dx.iter().map(|g| d1.mul(g)).collect();
    let mut hx = Vec::with_capacity(tri_len(n));
    for i in 0..n {
        for j in i..n {
            let k = tri_idx(n, i, j);
            hx.push(d2.mul(&a.dx[i]).mul(&a.dx[j]).add(&d1.mul(&a.hx[k])));
        }
    }
    Ok(Triple { x, dx, hx })
}

fn tri_eval(e: &Expr, bx: &IntervalBox) -> Result<Triple, EnclosureError> {
    let n = bx.dim();
    let wrap = |er: IntervalError| EnclosureError::Eval {
        path: "root".into(),
        msg: er.to_string(),
    };
    match e {
        Expr::Const(c) => Ok(Triple::constant(*c, n)),
        Expr::Var(i) => {
            if *i < n {
                Ok(Triple::variable(*i, *bx.component(*i), n))
            } else {
                Err(EnclosureError::Eval {
                    path: "root".into(),
                    msg: format!("variable index {i} out of range"),
                })
            }
        }
        Expr::Add(v) => {
            let mut acc = Triple::constant(0.0, n);
            for c in v {
                acc = tri_add(&acc, &tri_eval(c, bx)?);
            }
            Ok(acc)
        }
        Expr::Mul(v) => {
            let mut acc = Triple::constant(1.0, n);
            for c in v {
                acc = tri_mul(&acc, &tri_eval(c, bx)?);
            }
            Ok(acc)
        }
        Expr::Neg(a) => Ok(tri_neg(&tri_eval(a, bx)?)),
        Expr::Sub(a, b) => Ok(tri_sub(&tri_eval(a, bx)?, &tri_eval(b, bx)?)),
        Expr::Div(a, b) => {
            tri_div(&tri_eval(a, bx)?, &tri_eval(b, bx)?).map_err(wrap)
        }
        Expr::Pow(a, k) => tri_pow(&tri_eval(a, bx)?, *k).map_err(wrap),
        Expr::Func(f, a) => tri_func(*f, &tri_eval(a, bx)?),
    }
}

/// Hessian enclosure of `f` over the box by one forward sweep.
pub fn hessian_forward(f: &Expr, bx: &IntervalBox) -> Result<IntervalMatrix, EnclosureError> {
    let n = bx.dim();
    let t = tri_eval(f, bx)?;
    let mut m = IntervalMatrix::zeros(n, true);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, t.hx[tri_idx(n, i, j)]);
        }
    }
    Ok(m)
}
