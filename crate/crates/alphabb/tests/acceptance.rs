//! End-to-end checks of the published numbers on the five corpus problems,
//! one printed pass/fail line per criterion.

use alphabb::enclosure::{mean_value_form, natural_eval, slope_form};
use alphabb::expr::{eval_point, parse, Expr};
use alphabb::interval::{Interval, IntervalBox};
use alphabb::relax::{
    alpha_from_hi, analyze, build_hi, build_underestimator, classical_alpha, convex_lower_bound,
    enclose, interval_hessian, linear_abs_coeffs, verify_convexity_sampled,
    verify_underestimation, AbsMode, AnalyzeConfig, HessianRoute, RangeForm, ScalingVector,
};
use alphabb::symdiff::{hessian_sym_with, simplify};

fn p(text: &str, vars: &[&str]) -> Expr {
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    parse(text, &names).unwrap()
}

fn bx(ivs: &[(f64, f64)]) -> IntervalBox {
    IntervalBox::new(ivs.iter().map(|&(l, h)| Interval::new(l, h)).collect())
}

fn criterion(n: usize, desc: &str, ok: bool) {
    println!("criterion {:2} ({desc}): {}", n, if ok { "pass" } else { "fail" });
    assert!(ok, "criterion {n} failed: {desc}");
}

fn quartic() -> (Expr, IntervalBox) {
    (
        p(
            "(x1+10*x2)^2+5*(x3-x4)^2+(x2-2*x3)^4+10*(x1-x4)^4",
            &["x1", "x2", "x3", "x4"],
        ),
        bx(&[(0.0, 1.0); 4]),
    )
}

fn trig_rational() -> (Expr, IntervalBox) {
    (
        p("cos(x1)*sin(x2)-x1/(x2^2+1)", &["x1", "x2"]),
        bx(&[(-1.0, 2.0), (-1.0, 1.0)]),
    )
}

fn bilinear() -> (Expr, IntervalBox) {
    (
        p("(2*x1+x2-3)^2+(x1*x2-1)^2", &["x1", "x2"]),
        bx(&[(0.0, 4.0); 2]),
    )
}

fn exp_square() -> (Expr, IntervalBox) {
    (
        p("(1+x1-exp(x2))^2", &["x1", "x2"]),
        bx(&[(0.0, 1.0), (0.0, 2.0)]),
    )
}

fn cubic() -> (Expr, IntervalBox) {
    (
        p("20*x1*x2^2+10*x1^3-4*x2^3-7*x1^2-70*x1*x2", &["x1", "x2"]),
        bx(&[(1.0, 2.0); 2]),
    )
}

#[test]
fn criterion_01_quartic_classical() {
    let (f, b) = quartic();
    let cfg = AnalyzeConfig {
        route: HessianRoute::IntervalDirect,
        abs_mode: AbsMode::MagConstant,
        ..AnalyzeConfig::default()
    };
    let r = analyze(&f, &b, &cfg).unwrap();
    criterion(
        1,
        "quartic classical alpha and bound",
        r.alpha == vec![129.0, 0.0, 96.0, 120.0] && (r.lower_bound - -85.1312).abs() < 1e-3,
    );
}

#[test]
fn criterion_02_quartic_sign_drop_unsimplified() {
    let (f, b) = quartic();
    let cfg = AnalyzeConfig {
        form: RangeForm::Natural,
        simplify_hi: false,
        ..AnalyzeConfig::default()
    };
    let r = analyze(&f, &b, &cfg).unwrap();
    criterion(
        2,
        "quartic sign-drop rows, no simplification",
        r.alpha == vec![69.0, 0.0, 48.0, 60.0] && r.hi[0] == Interval::new(-138.0, 102.0),
    );
}

#[test]
fn criterion_03_quartic_fully_simplified() {
    let (f, b) = quartic();
    // the first row function collapses to a constant
    let hs = hessian_sym_with(&f, 4, true).unwrap();
    let h = interval_hessian(&f, &b, HessianRoute::SymbolicSimplified, RangeForm::Natural).unwrap();
    let d = ScalingVector::from_widths(&b).unwrap();
    let h1 = build_hi(&hs, &h, 0, &d, AbsMode::SignDrop, true).unwrap();
    let row_constant = h1 == Expr::Const(-18.0);

    let cfg = AnalyzeConfig {
        form: RangeForm::Natural,
        ..AnalyzeConfig::default()
    };
    let r = analyze(&f, &b, &cfg).unwrap();
    criterion(
        3,
        "quartic simplified rows",
        row_constant
            && r.alpha == vec![9.0, 0.0, 0.0, 0.0]
            && (r.lower_bound - -1.9768).abs() < 1e-3,
    );
}

#[test]
fn criterion_04_trig_rational_classical() {
    let (f, b) = trig_rational();
    let cfg = AnalyzeConfig {
        route: HessianRoute::IntervalDirect,
        abs_mode: AbsMode::MagConstant,
        d: Some(vec![3.0, 2.0]),
        ..AnalyzeConfig::default()
    };
    let r = analyze(&f, &b, &cfg).unwrap();
    criterion(
        4,
        "trig/rational classical alpha and bound",
        (r.alpha[0] - 2.0874).abs() < 5e-4
            && (r.alpha[1] - 13.1707).abs() < 5e-4
            && (r.lower_bound - -18.4970).abs() < 1e-2,
    );
}

#[test]
fn criterion_05_trig_rational_symbolic_rows() {
    // the published row functions, with the simplified quotient and the
    // scaling factor 2/3 on both rows as printed
    let (f, b) = trig_rational();
    let vars = &["x1", "x2"];
    let abs_term = "abs(-sin(x1)*cos(x2)+2*x2/(x2^2+1)^2)";
    let h1 = p(&format!("-cos(x1)*sin(x2)-(2/3)*{abs_term}"), vars);
    let h2 = p(
        &format!("-cos(x1)*sin(x2)+2*x1*(1-3*x2^2)/(x2^2+1)^3-(2/3)*{abs_term}"),
        vars,
    );
    let (alpha, _) = alpha_from_hi(&[h1, h2], &b, RangeForm::Natural).unwrap();
    let g = build_underestimator(&f, &alpha, &b);
    let (bound, _, _) = convex_lower_bound(&g, &b).unwrap();
    criterion(
        5,
        "trig/rational symbolic rows with simplified quotient",
        (alpha[0] - 1.4208).abs() < 5e-4
            && (alpha[1] - 5.4208).abs() < 5e-4
            && (bound - -9.3110).abs() < 1e-2,
    );
}

#[test]
fn criterion_06_bilinear_classical_versus_centered() {
    let (f, b) = bilinear();
    let classical = AnalyzeConfig {
        route: HessianRoute::IntervalDirect,
        abs_mode: AbsMode::MagConstant,
        ..AnalyzeConfig::default()
    };
    let r1 = analyze(&f, &b, &classical).unwrap();
    let centered = AnalyzeConfig {
        form: RangeForm::Slope,
        ..AnalyzeConfig::default()
    };
    let r2 = analyze(&f, &b, &centered).unwrap();
    let improvement = (r1.lower_bound - r2.lower_bound) / r1.lower_bound;
    criterion(
        6,
        "bilinear classical vs slope-centered rows",
        (r1.alpha[0] - 29.0).abs() <= 1e-9
            && (r1.alpha[1] - 32.0).abs() <= 1e-9
            && (r1.lower_bound - -231.0459).abs() < 1e-3
            && (r2.alpha[0] - 21.0).abs() <= 1e-9
            && (r2.alpha[1] - 24.0).abs() <= 1e-9
            && (r2.lower_bound - -168.1901).abs() < 1e-3
            && (improvement - 0.272).abs() < 0.003,
    );
}

#[test]
fn criterion_07_exp_square_simplification_gap() {
    let (f, b) = exp_square();
    let raw = AnalyzeConfig {
        form: RangeForm::Natural,
        simplify_hi: false,
        ..AnalyzeConfig::default()
    };
    let r1 = analyze(&f, &b, &raw).unwrap();
    let simp = AnalyzeConfig {
        form: RangeForm::Natural,
        ..AnalyzeConfig::default()
    };
    let r2 = analyze(&f, &b, &simp).unwrap();
    criterion(
        7,
        "exp-square bounds before/after simplification",
        (r1.lower_bound - -12.65).abs() < 5e-2 && (r2.lower_bound - -6.5629).abs() < 1e-3,
    );
}

#[test]
fn criterion_08_cubic_abs_surrogates() {
    let (f, b) = cubic();
    let classical = AnalyzeConfig {
        route: HessianRoute::IntervalDirect,
        abs_mode: AbsMode::MagConstant,
        ..AnalyzeConfig::default()
    };
    let r1 = analyze(&f, &b, &classical).unwrap();

    let shift = AnalyzeConfig {
        abs_mode: AbsMode::ShiftSurrogate,
        form: RangeForm::Natural,
        ..AnalyzeConfig::default()
    };
    let r2 = analyze(&f, &b, &shift).unwrap();

    let (gamma, beta) = linear_abs_coeffs(&Interval::new(-30.0, 10.0)).unwrap();
    let linear = AnalyzeConfig {
        abs_mode: AbsMode::LinearSurrogate,
        form: RangeForm::Natural,
        ..AnalyzeConfig::default()
    };
    let r3 = analyze(&f, &b, &linear).unwrap();

    criterion(
        8,
        "cubic: mag/shift/linear absolute-value treatments",
        r1.alpha == vec![0.0, 19.0]
            && r2.hi[1] == Interval::new(-24.0, 32.0)
            && r2.alpha[1] == 12.0
            && (gamma, beta) == (-0.5, 15.0)
            && r3.hi[1] == Interval::new(-18.0, 26.0)
            && r3.alpha[1] == 9.0,
    );
}

#[test]
fn criterion_09_property_spot_checks() {
    // condensed version of the dedicated property suite
    let corpus: Vec<(Expr, IntervalBox)> =
        vec![quartic(), trig_rational(), bilinear(), exp_square(), cubic()];
    let mut ok = true;

    // interval soundness + simplification semantics on sampled points
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut rnd = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for (f, b) in &corpus {
        let enc = natural_eval(f, b).unwrap();
        let fs = simplify(f);
        for _ in 0..2000 {
            let pt: Vec<f64> = (0..b.dim())
                .map(|i| {
                    let c = b.component(i);
                    c.lo() + c.width() * rnd()
                })
                .collect();
            let v = eval_point(f, &pt).unwrap();
            ok &= enc.contains(v);
            let vs = eval_point(&fs, &pt).unwrap();
            ok &= (v - vs).abs() <= 1e-9 * (1.0 + v.abs());
        }
    }

    // slope enclosure within the mean-value enclosure
    for (f, b) in &corpus {
        let c = b.midpoint();
        let m = mean_value_form(f, b, &c).unwrap();
        let s = slope_form(f, b, &c).unwrap();
        ok &= m.contains_interval(&s);
    }

    // the default-mode underestimator really underestimates and is convex
    for (f, b) in &corpus {
        let r = analyze(f, b, &AnalyzeConfig::default()).unwrap();
        ok &= verify_underestimation(f, &r.underestimator, b, 10_000, 7);
        ok &= verify_convexity_sampled(&r.underestimator, b, 500, 7);
    }

    // row functions with constant magnitudes reduce to the classical bound
    for (f, b) in &corpus {
        let n = b.dim();
        let hs = hessian_sym_with(f, n, false).unwrap();
        let mut h = alphabb::interval::IntervalMatrix::zeros(n, true);
        for i in 0..n {
            for j in i..n {
                h.set(i, j, enclose(hs.get(i, j), b, RangeForm::Natural).unwrap());
            }
        }
        let d = ScalingVector::from_widths(b).unwrap();
        let a_classical = classical_alpha(&h, &d);
        let rows: Vec<Expr> = (0..n)
            .map(|i| build_hi(&hs, &h, i, &d, AbsMode::MagConstant, false).unwrap())
            .collect();
        let (a_rows, _) = alpha_from_hi(&rows, b, RangeForm::Natural).unwrap();
        for (a, b2) in a_classical.iter().zip(&a_rows) {
            ok &= (a - b2).abs() <= 1e-12 * (1.0 + a.abs());
        }
    }

    // the linear surrogate dominates |y| inside and matches it at endpoints
    let y = Interval::new(-30.0, 10.0);
    let (gamma, beta) = linear_abs_coeffs(&y).unwrap();
    ok &= (gamma * y.lo() + beta - y.lo().abs()).abs() <= 1e-12;
    ok &= (gamma * y.hi() + beta - y.hi().abs()).abs() <= 1e-12;
    for k in 0..1000 {
        let v = y.lo() + y.width() * k as f64 / 999.0;
        ok &= gamma * v + beta >= v.abs() - 1e-12;
    }

    criterion(9, "property spot checks", ok);
}

#[test]
fn criterion_10_plot_grid_underestimates_row_wise() {
    let exe = env!("CARGO_BIN_EXE_alphabb");
    let dir = std::env::temp_dir().join("alphabb-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let problem = dir.join("trig_rational.txt");
    std::fs::write(
        &problem,
        "var x1 in [-1, 2]\nvar x2 in [-1, 1]\nobjective cos(x1)*sin(x2) - x1/(x2^2+1)\n",
    )
    .unwrap();
    let csv_path = dir.join("grid.csv");
    let status = std::process::Command::new(exe)
        .args([
            "plot",
            problem.to_str().unwrap(),
            "--grid",
            "101",
            "--out",
            csv_path.to_str().unwrap(),
            "--samples",
            "500",
        ])
        .status()
        .unwrap();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut rows = 0;
    let mut ok = status.success();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let (fv, gv) = (cols[2], cols[3]);
        ok &= gv <= fv + 1e-9 * (1.0 + fv.abs());
        rows += 1;
    }
    ok &= rows == 101 * 101;
    criterion(10, "plot grid rows all satisfy g <= f", ok);
}
