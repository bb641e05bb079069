//! Closed-interval arithmetic with exact image semantics.
//!
//! All values are immutable and all operations are pure; endpoints are
//! finite `f64`. Default arithmetic rounds to nearest; [`Interval::outward`]
//! widens an interval by one ulp on each side for conservative enclosures.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("division by an interval containing zero: {0}")]
    DivisionByZero(Interval),
    #[error("negative power of an interval containing zero: {0}")]
    NegativePowerOfZero(Interval),
    #[error("log of an interval reaching non-positive values: {0}")]
    LogDomain(Interval),
    #[error("sqrt of an interval with negative values: {0}")]
    SqrtDomain(Interval),
    #[error("empty intersection of {0} and {1}")]
    EmptyIntersection(Interval, Interval),
    #[error("invalid interval endpoints [{0}, {1}]")]
    InvalidEndpoints(f64, f64),
}

/// A closed real interval `[lo, hi]` with `lo <= hi`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(
            lo.is_finite() && hi.is_finite() && lo <= hi,
            "invalid interval endpoints [{lo}, {hi}]"
        );
        // normalize -0.0 so structural comparisons behave
        Self {
            lo: lo + 0.0,
            hi: hi + 0.0,
        }
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self::new(lo, hi))
        } else {
            Err(IntervalError::InvalidEndpoints(lo, hi))
        }
    }

    /// Degenerate interval `[c, c]`.
    pub fn point(c: f64) -> Self {
        Self::new(c, c)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn rad(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Magnitude: `max(|lo|, |hi|)`.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// True iff `lo < 0 < hi`. Zero on a boundary is sign-stable.
    pub fn zero_in_interior(&self) -> bool {
        self.lo < 0.0 && 0.0 < self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn hull_point(&self, x: f64) -> Interval {
        Interval::new(self.lo.min(x), self.hi.max(x))
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval, IntervalError> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Ok(Interval::new(lo, hi))
        } else {
            Err(IntervalError::EmptyIntersection(*self, *other))
        }
    }

    /// Widen each endpoint to the adjacent representable value.
    pub fn outward(&self) -> Interval {
        Interval::new(next_down(self.lo), next_up(self.hi))
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval::new(self.lo - other.hi, self.hi - other.lo)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        Interval::new(min4(p), max4(p))
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::new(c * self.lo, c * self.hi)
        } else {
            Interval::new(c * self.hi, c * self.lo)
        }
    }

    pub fn div(&self, other: &Interval) -> Result<Interval, IntervalError> {
        if other.lo <= 0.0 && 0.0 <= other.hi {
            return Err(IntervalError::DivisionByZero(*other));
        }
        let p = [
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        ];
        Ok(Interval::new(min4(p), max4(p)))
    }

    /// Exact image of `x -> x^k`. `k < 0` requires `0 ∉ self`.
    pub fn powi(&self, k: i32) -> Result<Interval, IntervalError> {
        if k < 0 {
            if self.contains(0.0) {
                return Err(IntervalError::NegativePowerOfZero(*self));
            }
            return Interval::point(1.0).div(&self.powi(-k)?);
        }
        match k {
            0 => Ok(Interval::point(1.0)),
            1 => Ok(*self),
            _ if k % 2 == 1 => {
                // odd powers are monotone
                Ok(Interval::new(powi_f(self.lo, k), powi_f(self.hi, k)))
            }
            _ => {
                // even power: image touches 0 when the interval straddles it
                let a = powi_f(self.lo, k);
                let b = powi_f(self.hi, k);
                if self.contains(0.0) {
                    Ok(Interval::new(0.0, a.max(b)))
                } else {
                    Ok(Interval::new(a.min(b), a.max(b)))
                }
            }
        }
    }

    pub fn exp(&self) -> Interval {
        Interval::new(self.lo.exp(), self.hi.exp())
    }

    pub fn ln(&self) -> Result<Interval, IntervalError> {
        if self.lo <= 0.0 {
            return Err(IntervalError::LogDomain(*self));
        }
        Ok(Interval::new(self.lo.ln(), self.hi.ln()))
    }

    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::SqrtDomain(*self));
        }
        Ok(Interval::new(self.lo.sqrt(), self.hi.sqrt()))
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval::new(0.0, self.mag())
        }
    }

    /// Exact image of sine: endpoint values plus interior critical points.
    pub fn sin(&self) -> Interval {
        use std::f64::consts::{FRAC_PI_2, PI};
        if self.width() >= 2.0 * PI {
            return Interval::new(-1.0, 1.0);
        }
        let mut lo = self.lo.sin().min(self.hi.sin());
        let mut hi = self.lo.sin().max(self.hi.sin());
        // max at pi/2 + 2k*pi, min at -pi/2 + 2k*pi
        if has_point_of_form(self.lo, self.hi, FRAC_PI_2) {
            hi = 1.0;
        }
        if has_point_of_form(self.lo, self.hi, -FRAC_PI_2) {
            lo = -1.0;
        }
        Interval::new(lo.max(-1.0), hi.min(1.0))
    }

    /// Exact image of cosine.
    pub fn cos(&self) -> Interval {
        use std::f64::consts::PI;
        if self.width() >= 2.0 * PI {
            return Interval::new(-1.0, 1.0);
        }
        let mut lo = self.lo.cos().min(self.hi.cos());
        let mut hi = self.lo.cos().max(self.hi.cos());
        if has_point_of_form(self.lo, self.hi, 0.0) {
            hi = 1.0;
        }
        if has_point_of_form(self.lo, self.hi, PI) {
            lo = -1.0;
        }
        Interval::new(lo.max(-1.0), hi.min(1.0))
    }
}

/// Is there an integer k with lo <= offset + 2k*pi <= hi?
fn has_point_of_form(lo: f64, hi: f64, offset: f64) -> bool {
    use std::f64::consts::PI;
    let k = ((lo - offset) / (2.0 * PI)).ceil();
    offset + 2.0 * PI * k <= hi
}

fn powi_f(x: f64, k: i32) -> f64 {
    x.powi(k)
}

fn min4(p: [f64; 4]) -> f64 {
    p[0].min(p[1]).min(p[2]).min(p[3])
}

fn max4(p: [f64; 4]) -> f64 {
    p[0].max(p[1]).max(p[2]).max(p[3])
}

pub fn next_up(x: f64) -> f64 {
    if x == f64::INFINITY {
        return x;
    }
    let bits = if x == 0.0 { 1 } else if x > 0.0 { x.to_bits() + 1 } else { x.to_bits() - 1 };
    f64::from_bits(bits)
}

pub fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Vector of intervals: the variable domain.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox {
    components: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(components: Vec<Interval>) -> Self {
        assert!(!components.is_empty(), "box must have dimension >= 1");
        Self { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Interval {
        &self.components[i]
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.mid()).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.width()).collect()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.components).all(|(x, c)| c.contains(*x))
    }
}

/// Symmetric-capable square grid of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    n: usize,
    entries: Vec<Interval>,
    symmetric: bool,
}

impl IntervalMatrix {
    pub fn zeros(n: usize, symmetric: bool) -> Self {
        Self {
            n,
            entries: vec![Interval::point(0.0); n * n],
            symmetric,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.entries[i * self.n + j] = v;
        if self.symmetric && i != j {
            self.entries[j * self.n + i] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_endpoint_formulas() {
        let a = Interval::new(1.0, 4.0);
        let b = Interval::point(3.0);
        // (x - 3) over [1,4], then the even power gives [0,4]
        let d = a.sub(&b);
        assert_eq!(d, Interval::new(-2.0, 1.0));
        assert_eq!(d.powi(2).unwrap(), Interval::new(0.0, 4.0));

        // additive identity
        assert_eq!(a.add(&Interval::point(0.0)), a);

        // brute-force checked endpoint product
        assert_eq!(
            Interval::new(-2.0, 4.0).mul(&Interval::new(-4.0, 2.0)),
            Interval::new(-16.0, 8.0)
        );
    }

    #[test]
    fn mul_matches_sampled_extremes() {
        let a = Interval::new(-2.0, 4.0);
        let b = Interval::new(-4.0, 2.0);
        let r = a.mul(&b);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..100 {
            for j in 0..100 {
                let x = a.lo() + a.width() * (i as f64) / 99.0;
                let y = b.lo() + b.width() * (j as f64) / 99.0;
                lo = lo.min(x * y);
                hi = hi.max(x * y);
            }
        }
        assert!((r.lo() - lo).abs() < 1e-12 && (r.hi() - hi).abs() < 1e-12);
    }

    #[test]
    fn powers() {
        assert_eq!(
            Interval::new(-2.0, 1.0).powi(2).unwrap(),
            Interval::new(0.0, 4.0)
        );
        assert_eq!(
            Interval::new(0.0, 1.0).powi(2).unwrap(),
            Interval::new(0.0, 1.0)
        );
        // monotone odd power
        assert_eq!(
            Interval::new(1.0, 2.0).powi(3).unwrap(),
            Interval::new(1.0, 8.0)
        );
        assert!(Interval::new(-1.0, 1.0).powi(-1).is_err());
    }

    #[test]
    fn elementary_images() {
        let c = Interval::new(-1.0, 2.0).cos();
        assert!((c.lo() - (2.0f64).cos()).abs() < 1e-15);
        assert_eq!(c.hi(), 1.0);

        assert_eq!(
            Interval::new(-3.0, 2.8415).abs(),
            Interval::new(0.0, 3.0)
        );
        assert_eq!(Interval::point(0.0).exp(), Interval::point(1.0));

        // sin over an interval containing pi/2
        let s = Interval::new(1.0, 2.0).sin();
        assert_eq!(s.hi(), 1.0);
        // width >= 2*pi clamps
        assert_eq!(Interval::new(0.0, 7.0).sin(), Interval::new(-1.0, 1.0));
    }

    #[test]
    fn cos_dense_sampling_soundness() {
        let a = Interval::new(-1.0, 2.0);
        let img = a.cos();
        for i in 0..=10_000 {
            let x = a.lo() + a.width() * (i as f64) / 10_000.0;
            assert!(img.contains(x.cos()));
        }
    }

    #[test]
    fn stats() {
        let a = Interval::new(-30.0, 10.0);
        assert_eq!(a.mid(), -10.0);
        assert_eq!(a.rad(), 20.0);
        assert_eq!(a.mag(), 30.0);

        let p = Interval::point(2.5);
        assert_eq!(p.mid(), 2.5);
        assert_eq!(p.rad(), 0.0);
        assert_eq!(p.mag(), 2.5);

        let n = Interval::new(-5.0, -1.0);
        assert_eq!(n.mid(), -3.0);
        assert_eq!(n.rad(), 2.0);
        assert_eq!(n.mag(), 5.0);
    }

    #[test]
    fn zero_interior() {
        assert!(Interval::new(-30.0, 10.0).zero_in_interior());
        assert!(!Interval::new(2.0, 66.0).zero_in_interior());
        // zero on the boundary is sign-stable
        assert!(!Interval::new(0.0, 5.0).zero_in_interior());
    }

    #[test]
    fn division_by_zero_interval() {
        let a = Interval::new(1.0, 2.0);
        assert!(a.div(&Interval::new(-1.0, 1.0)).is_err());
        assert!(a.div(&Interval::new(0.0, 1.0)).is_err());
        assert_eq!(
            a.div(&Interval::new(1.0, 2.0)).unwrap(),
            Interval::new(0.5, 2.0)
        );
    }

    #[test]
    fn outward_widens() {
        let a = Interval::new(1.0, 2.0);
        let w = a.outward();
        assert!(w.lo() < 1.0 && w.hi() > 2.0);
        assert!(w.contains_interval(&a));
    }
}
