//! Convex underestimators g(x) = f(x) − Σᵢ αᵢ(x̄ᵢ−xᵢ)(xᵢ−x̲ᵢ): interval
//! Hessian enclosures by two routes, scaled-Gerschgorin α, the row
//! functions hᵢ with four absolute-value treatments, the box-constrained
//! convex minimization, and sampling-based verification.

use thiserror::Error;

use crate::adhess::hessian_forward;
use crate::enclosure::{
    best_enclosure, mean_value_form, monotonic_refine, natural_eval, natural_eval_outward,
    slope_form, EnclosureError, Form,
};
use crate::expr::{eval_point, Expr, Func};
use crate::interval::{Interval, IntervalBox, IntervalMatrix};
use crate::symdiff::{diff, hessian_sym_with, simplify, DiffError, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HessianRoute {
    /// Forward-sweep interval differentiation of f itself; no symbolic
    /// rearrangement, repeated-product powers. The classical baseline.
    IntervalDirect,
    /// Simplified symbolic Hessian entries, images by a selectable range
    /// form.
    SymbolicSimplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbsMode {
    /// |𝒉ᵢⱼ| as the constant magnitude of the entry's enclosure.
    MagConstant,
    /// Drop the absolute value on sign-stable entries; keep an abs node
    /// otherwise.
    SignDrop,
    /// |y| ≤ σy − lo(σ𝒚) with σ matching the enclosure's dominant sign.
    ShiftSurrogate,
    /// The tightest linear upper bound |y| ≤ γy + β on the enclosure.
    LinearSurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RangeForm {
    Natural,
    MeanValue,
    Slope,
    Monotonic,
    /// Intersection of all applicable forms.
    Best,
}

/// Positive per-variable scaling weights of the Gerschgorin row sums.
#[derive(Debug, Clone)]
pub struct ScalingVector(Vec<f64>);

impl ScalingVector {
    pub fn new(d: Vec<f64>) -> Result<Self, RelaxError> {
        if d.is_empty() || d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(RelaxError::Config(
                "scaling vector must have positive finite components".into(),
            ));
        }
        Ok(ScalingVector(d))
    }

    /// The recommended default: the box widths.
    pub fn from_widths(bx: &IntervalBox) -> Result<Self, RelaxError> {
        ScalingVector::new(bx.widths())
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error(transparent)]
    Enclosure(#[from] EnclosureError),
    #[error(transparent)]
    NonSmooth(#[from] DiffError),
    #[error("{0}")]
    Config(String),
    /// The produced underestimator failed a sampling verification. The
    /// report is still fully populated for inspection.
    #[error("verification failed (underestimation: {}, convexity: {})",
        .0.verified_underestimation, .0.verified_convexity)]
    Unverified(Box<UnderestimatorReport>),
}

#[derive(Debug, Clone)]
pub struct UnderestimatorReport {
    pub alpha: Vec<f64>,
    pub hessian: IntervalMatrix,
    pub hi: Vec<Interval>,
    pub lower_bound: f64,
    /// natural_eval(g).lo — certified but looser; only on request.
    pub rigorous_lower_bound: Option<f64>,
    pub minimizer: Vec<f64>,
    pub underestimator: Expr,
    pub route: HessianRoute,
    pub abs_mode: AbsMode,
    pub form: RangeForm,
    pub d: Vec<f64>,
    /// (original index, fixed value) of zero-width variables removed
    /// before analysis; alpha/minimizer are re-expanded, hessian/hi are in
    /// the reduced space.
    pub fixed: Vec<(usize, f64)>,
    pub verified_underestimation: bool,
    pub verified_convexity: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub route: HessianRoute,
    pub abs_mode: AbsMode,
    pub form: RangeForm,
    pub d: Option<Vec<f64>>,
    /// Pass the assembled hᵢ through simplify (the paper's key lever).
    pub simplify_hi: bool,
    pub samples: usize,
    /// Offset into the low-discrepancy sequence used by the verifications.
    pub seed: u64,
    pub rigorous: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            route: HessianRoute::SymbolicSimplified,
            abs_mode: AbsMode::SignDrop,
            form: RangeForm::Best,
            d: None,
            simplify_hi: true,
            samples: 10_000,
            seed: 0,
            rigorous: false,
        }
    }
}

fn contains_abs(e: &Expr) -> bool {
    match e {
        Expr::Func(Func::Abs, _) => true,
        Expr::Const(_) | Expr::Var(_) => false,
        Expr::Add(v) | Expr::Mul(v) => v.iter().any(contains_abs),
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => contains_abs(a),
        Expr::Sub(a, b) | Expr::Div(a, b) => contains_abs(a) || contains_abs(b),
    }
}

/// Range enclosure by the selected form. Derivative-based forms are not
/// defined through abs nodes; those expressions fall back to natural
/// evaluation (intersected with the slope form under `Best`, which handles
/// abs).
pub fn enclose(e: &Expr, bx: &IntervalBox, form: RangeForm) -> Result<Interval, EnclosureError> {
    let c = bx.midpoint();
    let non_smooth = contains_abs(e);
    match form {
        RangeForm::Natural => natural_eval(e, bx),
        RangeForm::MeanValue => {
            if non_smooth {
                natural_eval(e, bx)
            } else {
                mean_value_form(e, bx, &c)
            }
        }
        RangeForm::Slope => slope_form(e, bx, &c),
        RangeForm::Monotonic => {
            if non_smooth {
                natural_eval(e, bx)
            } else {
                monotonic_refine(e, bx)
            }
        }
        RangeForm::Best => {
            if non_smooth {
                natural_eval(e, bx)?
                    .intersect(&slope_form(e, bx, &c)?)
                    .map_err(|_| EnclosureError::Inconsistent)
            } else {
                best_enclosure(
                    e,
                    bx,
                    &[Form::Natural, Form::MeanValue, Form::Slope, Form::Monotonic],
                )
            }
        }
    }
}

/// Symmetric enclosure of the Hessian image over the box.
pub fn interval_hessian(
    f: &Expr,
    bx: &IntervalBox,
    route: HessianRoute,
    form: RangeForm,
) -> Result<IntervalMatrix, RelaxError> {
    match route {
        HessianRoute::IntervalDirect => Ok(hessian_forward(f, bx)?),
        HessianRoute::SymbolicSimplified => {
            let hs = hessian_sym_with(f, bx.dim(), true)?;
            let mut m = IntervalMatrix::zeros(bx.dim(), true);
            for i in 0..bx.dim() {
                for j in i..bx.dim() {
                    m.set(i, j, enclose(hs.get(i, j), bx, form)?);
                }
            }
            Ok(m)
        }
    }
}

/// αᵢ = max{0, −½(h̲ᵢᵢ − Σ_{j≠i} mag(𝒉ᵢⱼ)·dⱼ/dᵢ)} — the scaled Gerschgorin
/// bound applied directly to the interval matrix.
pub fn classical_alpha(h: &IntervalMatrix, d: &ScalingVector) -> Vec<f64> {
    let n = h.dim();
    let d = d.components();
    (0..n)
        .map(|i| {
            let mut row = h.get(i, i).lo();
            for j in 0..n {
                if j != i {
                    row -= h.get(i, j).mag() * d[j] / d[i];
                }
            }
            (-0.5 * row).max(0.0)
        })
        .collect()
}

/// Best linear upper bound of |y| on the interval: |y| ≤ γy + β with
/// equality at both endpoints.
pub fn linear_abs_coeffs(y: &Interval) -> Result<(f64, f64), RelaxError> {
    let (lo, hi) = (y.lo(), y.hi());
    if lo >= hi {
        return Err(RelaxError::Config(
            "degenerate interval has no linear abs surrogate".into(),
        ));
    }
    let gamma = (hi.abs() - lo.abs()) / (hi - lo);
    let beta = (hi * lo.abs() - lo * hi.abs()) / (hi - lo);
    Ok((gamma, beta))
}

/// Row function hᵢ(x) = hᵢᵢ(x) − Σ_{j≠i} |hᵢⱼ(x)|·dⱼ/dᵢ with the absolute
/// values resolved per mode. Sign-stable entries always drop the absolute
/// value as ±hᵢⱼ; only genuinely sign-unstable entries use the mode's
/// surrogate.
pub fn build_hi(
    hs: &SymMatrix,
    h: &IntervalMatrix,
    i: usize,
    d: &ScalingVector,
    mode: AbsMode,
    simplify_final: bool,
) -> Result<Expr, RelaxError> {
    let n = hs.dim();
    let dc = d.components();
    let mut terms = vec![hs.get(i, i).clone()];
    for j in 0..n {
        if j == i {
            continue;
        }
        let entry = hs.get(i, j).clone();
        let enc = h.get(i, j);
        if matches!(entry, Expr::Const(c) if c == 0.0) {
            continue;
        }
        let abs_part = if !enc.zero_in_interior() {
            if enc.lo() >= 0.0 {
                entry
            } else {
                Expr::neg(entry)
            }
        } else {
            match mode {
                AbsMode::MagConstant => Expr::Const(enc.mag()),
                AbsMode::SignDrop => Expr::func(Func::Abs, entry),
                AbsMode::ShiftSurrogate => {
                    let sigma = if enc.mid() >= 0.0 { 1.0 } else { -1.0 };
                    let signed_lo = enc.scale(sigma).lo();
                    Expr::add2(
                        Expr::Mul(vec![Expr::Const(sigma), entry]),
                        Expr::Const(-signed_lo),
                    )
                }
                AbsMode::LinearSurrogate => {
                    let (gamma, beta) = linear_abs_coeffs(&enc)?;
                    Expr::add2(Expr::Mul(vec![Expr::Const(gamma), entry]), Expr::Const(beta))
                }
            }
        };
        terms.push(Expr::Mul(vec![Expr::Const(-dc[j] / dc[i]), abs_part]));
    }
    let hi = Expr::Add(terms);
    Ok(if simplify_final { simplify(&hi) } else { hi })
}

/// αᵢ = max{0, −½·lo(hᵢ(𝒙))} with the enclosure of each row function by
/// the selected range form.
pub fn alpha_from_hi(
    hi_exprs: &[Expr],
    bx: &IntervalBox,
    form: RangeForm,
) -> Result<(Vec<f64>, Vec<Interval>), RelaxError> {
    let mut alpha = Vec::with_capacity(hi_exprs.len());
    let mut encs = Vec::with_capacity(hi_exprs.len());
    for e in hi_exprs {
        let enc = enclose(e, bx, form)?;
        alpha.push((-0.5 * enc.lo()).max(0.0));
        encs.push(enc);
    }
    Ok((alpha, encs))
}

/// g(x) = f(x) − Σᵢ αᵢ(x̄ᵢ−xᵢ)(xᵢ−x̲ᵢ); zero-α terms are omitted.
pub fn build_underestimator(f: &Expr, alpha: &[f64], bx: &IntervalBox) -> Expr {
    let mut terms = vec![f.clone()];
    for (i, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let c = bx.component(i);
        terms.push(Expr::Mul(vec![
            Expr::Const(-a),
            Expr::sub(Expr::Const(c.hi()), Expr::var(i)),
            Expr::sub(Expr::var(i), Expr::Const(c.lo())),
        ]));
    }
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Add(terms)
    }
}

/// Approximate box-constrained minimum of a smooth convex function by
/// projected gradient descent with Armijo backtracking. Returns the value,
/// the minimizer, and whether the projected-gradient test converged.
pub fn convex_lower_bound(
    g: &Expr,
    bx: &IntervalBox,
) -> Result<(f64, Vec<f64>, bool), RelaxError> {
    let n = bx.dim();
    if n == 0 {
        let v = eval_point(g, &[]).map_err(|e| RelaxError::Config(e.to_string()))?;
        return Ok((v, Vec::new(), true));
    }
    let grads: Vec<Expr> = (0..n)
        .map(|i| Ok(simplify(&diff(g, i)?)))
        .collect::<Result<_, DiffError>>()?;
    let project = |x: &mut [f64]| {
        for i in 0..n {
            x[i] = x[i].clamp(bx.component(i).lo(), bx.component(i).hi());
        }
    };
    let eval = |x: &[f64]| eval_point(g, x).map_err(|e| RelaxError::Config(e.to_string()));
    let mut x = bx.midpoint();
    let mut fx = eval(&x)?;
    let mut converged = false;
    // warm-started trial step: grows back after each accepted iteration so
    // the backtracking settles near the curvature-limited step instead of
    // re-halving from scratch every time
    let mut trial_step = 1.0f64;
    for _ in 0..100_000 {
        let mut grad = Vec::with_capacity(n);
        for ge in &grads {
            grad.push(eval_point(ge, &x).map_err(|e| RelaxError::Config(e.to_string()))?);
        }
        // projected-gradient stationarity test
        let mut probe: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - gi).collect();
        project(&mut probe);
        let pg_norm: f64 = x
            .iter()
            .zip(&probe)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if pg_norm <= 1e-9 * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
        let mut step = trial_step;
        let mut advanced = false;
        while step >= 1e-16 {
            let mut xn: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - step * gi).collect();
            project(&mut xn);
            let fxn = eval(&xn)?;
            let descent: f64 = grad
                .iter()
                .zip(x.iter().zip(&xn))
                .map(|(gi, (xi, xni))| gi * (xi - xni))
                .sum();
            // the strict fxn < fx guard stops noise-level acceptances once
            // 1e-4*descent falls below one ulp of fx
            if fxn <= fx - 1e-4 * descent && fxn < fx {
                x = xn;
                fx = fxn;
                advanced = true;
                trial_step = step * 2.0;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            // no representable progress left in this direction
            converged = true;
            break;
        }
    }
    Ok((fx, x, converged))
}

// ---------------------------------------------------------------------------
// Sampling verification

fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().all(|p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// k-th point of the Halton low-discrepancy sequence mapped into the box.
pub fn halton_point(bx: &IntervalBox, primes: &[u64], k: u64) -> Vec<f64> {
    (0..bx.dim())
        .map(|i| {
            let c = bx.component(i);
            c.lo() + c.width() * radical_inverse(k, primes[i])
        })
        .collect()
}

/// f(x) ≥ g(x) − 1e−9 at `samples` low-discrepancy points.
pub fn verify_underestimation(
    f: &Expr,
    g: &Expr,
    bx: &IntervalBox,
    samples: usize,
    seed: u64,
) -> bool {
    let primes = first_primes(bx.dim());
    for k in 0..samples as u64 {
        let p = halton_point(bx, &primes, seed + k + 1);
        match (eval_point(f, &p), eval_point(g, &p)) {
            (Ok(fv), Ok(gv)) => {
                if fv < gv - 1e-9 {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Minimum eigenvalue of a dense symmetric matrix by cyclic Jacobi
/// rotations.
fn min_eigenvalue_symmetric(a: &mut [Vec<f64>]) -> f64 {
    let n = a.len();
    for _ in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-12 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

/// Point-sampled convexity: the symbolic Hessian of g, evaluated at
/// low-discrepancy points, must have minimum eigenvalue ≥ −1e−7
/// everywhere. Returns false when g is not twice differentiable.
pub fn verify_convexity_sampled(g: &Expr, bx: &IntervalBox, samples: usize, seed: u64) -> bool {
    let n = bx.dim();
    if n == 0 {
        return true;
    }
    let Ok(hs) = hessian_sym_with(g, n, true) else {
        return false;
    };
    let primes = first_primes(n);
    for k in 0..samples as u64 {
        let p = halton_point(bx, &primes, seed + k + 1);
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                match eval_point(hs.get(i, j), &p) {
                    Ok(v) => m[i][j] = v,
                    Err(_) => return false,
                }
            }
        }
        if min_eigenvalue_symmetric(&mut m) < -1e-7 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// The full pipeline

pub fn analyze(f: &Expr, bx: &IntervalBox, cfg: &AnalyzeConfig) -> Result<UnderestimatorReport, RelaxError> {
    let mut warnings = Vec::new();

    // zero-width components would make the Gerschgorin ratios divide by
    // zero; fix such variables at their point values
    let mut f_red = f.clone();
    let mut comps = Vec::new();
    let mut fixed = Vec::new();
    for (i, c) in bx.components().iter().enumerate() {
        if c.width() == 0.0 {
            fixed.push((i, c.lo()));
        } else {
            comps.push(*c);
        }
    }
    for &(i, v) in fixed.iter().rev() {
        // descending original index keeps lower indices valid
        f_red = f_red.substitute_var(i, v);
        warnings.push(format!("variable {} fixed at {} (zero-width bound)", i + 1, v));
    }
    let red = IntervalBox::new(comps);
    let n = red.dim();
    if n == 0 {
        let v = eval_point(&f_red, &[]).map_err(|e| RelaxError::Config(e.to_string()))?;
        return Ok(UnderestimatorReport {
            alpha: vec![0.0; fixed.len()],
            hessian: IntervalMatrix::zeros(0, true),
            hi: Vec::new(),
            lower_bound: v,
            rigorous_lower_bound: cfg.rigorous.then_some(v),
            minimizer: fixed.iter().map(|&(_, v)| v).collect(),
            underestimator: f_red,
            route: cfg.route,
            abs_mode: cfg.abs_mode,
            form: cfg.form,
            d: Vec::new(),
            fixed,
            verified_underestimation: true,
            verified_convexity: true,
            warnings,
        });
    }

    let d = match &cfg.d {
        Some(v) => {
            if v.len() != n {
                return Err(RelaxError::Config(format!(
                    "scaling vector has {} components, expected {}",
                    v.len(),
                    n
                )));
            }
            ScalingVector::new(v.clone())?
        }
        None => ScalingVector::from_widths(&red)?,
    };

    let hessian = interval_hessian(&f_red, &red, cfg.route, cfg.form)?;

    let (alpha, hi) = match cfg.route {
        HessianRoute::IntervalDirect => {
            if cfg.abs_mode != AbsMode::MagConstant {
                warnings.push(
                    "direct route treats every |h_ij| as a constant magnitude; abs mode ignored"
                        .into(),
                );
            }
            let alpha = classical_alpha(&hessian, &d);
            let dc = d.components();
            let hi = (0..n)
                .map(|i| {
                    let s: f64 = (0..n)
                        .filter(|&j| j != i)
                        .map(|j| hessian.get(i, j).mag() * dc[j] / dc[i])
                        .sum();
                    hessian.get(i, i).sub(&Interval::point(s))
                })
                .collect();
            (alpha, hi)
        }
        HessianRoute::SymbolicSimplified => {
            // the simplification switch governs the whole symbolic route:
            // raw derivative entries and no final pass when off
            let hs = hessian_sym_with(&f_red, n, cfg.simplify_hi)?;
            let hi_exprs = (0..n)
                .map(|i| build_hi(&hs, &hessian, i, &d, cfg.abs_mode, cfg.simplify_hi))
                .collect::<Result<Vec<_>, _>>()?;
            let (alpha, encs) = alpha_from_hi(&hi_exprs, &red, cfg.form)?;
            (alpha, encs)
        }
    };

    let g = build_underestimator(&f_red, &alpha, &red);
    let (lower_bound, minimizer, converged) = convex_lower_bound(&g, &red)?;
    if !converged {
        warnings.push("convex minimization hit the iteration cap; bound is best-found".into());
    }
    let rigorous_lower_bound = if cfg.rigorous {
        Some(natural_eval_outward(&g, &red)?.lo())
    } else {
        None
    };

    let verified_underestimation = verify_underestimation(&f_red, &g, &red, cfg.samples, cfg.seed);
    let convexity_samples = (cfg.samples / 10).max(1);
    let verified_convexity = verify_convexity_sampled(&g, &red, convexity_samples, cfg.seed);

    // re-expand over the original variable order
    let mut full_alpha = alpha.clone();
    let mut full_min = minimizer.clone();
    for &(i, v) in &fixed {
        full_alpha.insert(i, 0.0);
        full_min.insert(i, v);
    }

    let report = UnderestimatorReport {
        alpha: full_alpha,
        hessian,
        hi,
        lower_bound,
        rigorous_lower_bound,
        minimizer: full_min,
        underestimator: g,
        route: cfg.route,
        abs_mode: cfg.abs_mode,
        form: cfg.form,
        d: d.components().to_vec(),
        fixed,
        verified_underestimation,
        verified_convexity,
        warnings,
    };
    if !verified_underestimation || !verified_convexity {
        return Err(RelaxError::Unverified(Box::new(report)));
    }
    Ok(report)
}
