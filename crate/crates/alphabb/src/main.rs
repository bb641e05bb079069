use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use alphabb::expr::{eval_point, format as format_expr};
use alphabb::interval::{Interval, IntervalMatrix};
use alphabb::problem::{load_problem, Problem};
use alphabb::relax::{
    analyze, AbsMode, AnalyzeConfig, HessianRoute, RangeForm, RelaxError, UnderestimatorReport,
};

#[derive(Parser)]
#[command(name = "alphabb", about = "Convex underestimators for box-constrained global optimization")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze one problem under one configuration; JSON report on stdout.
    Analyze {
        problem: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
        /// Also report a certified lower bound from outward-rounded
        /// interval evaluation of the underestimator.
        #[arg(long)]
        rigorous: bool,
    },
    /// Run the whole configuration matrix; text table plus a JSON array.
    Compare {
        problem: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit a CSV grid of f and g for external plotting (1 or 2 variables).
    Plot {
        problem: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
        /// Grid points per dimension.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value_t = RouteArg::Symbolic)]
    route: RouteArg,
    #[arg(long, value_enum, default_value_t = AbsArg::SignDrop)]
    abs: AbsArg,
    #[arg(long, value_enum, default_value_t = FormArg::Best)]
    form: FormArg,
    /// Scaling vector source: box widths, or the problem file's `d = [...]`.
    #[arg(long, value_enum, default_value_t = DArg::Auto)]
    d: DArg,
    /// Skip all symbolic simplification of the row functions h_i.
    #[arg(long)]
    no_simplify_hi: bool,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum RouteArg {
    Direct,
    Symbolic,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum AbsArg {
    Mag,
    SignDrop,
    Shift,
    Linear,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormArg {
    Natural,
    Mvf,
    Slope,
    Mono,
    Best,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DArg {
    /// File override if present, box widths otherwise.
    Auto,
    Width,
    Custom,
}

impl RouteArg {
    fn to_route(self) -> HessianRoute {
        match self {
            RouteArg::Direct => HessianRoute::IntervalDirect,
            RouteArg::Symbolic => HessianRoute::SymbolicSimplified,
        }
    }
}

impl AbsArg {
    fn to_mode(self) -> AbsMode {
        match self {
            AbsArg::Mag => AbsMode::MagConstant,
            AbsArg::SignDrop => AbsMode::SignDrop,
            AbsArg::Shift => AbsMode::ShiftSurrogate,
            AbsArg::Linear => AbsMode::LinearSurrogate,
        }
    }
}

impl FormArg {
    fn to_form(self) -> RangeForm {
        match self {
            FormArg::Natural => RangeForm::Natural,
            FormArg::Mvf => RangeForm::MeanValue,
            FormArg::Slope => RangeForm::Slope,
            FormArg::Mono => RangeForm::Monotonic,
            FormArg::Best => RangeForm::Best,
        }
    }
}

fn route_name(r: HessianRoute) -> &'static str {
    match r {
        HessianRoute::IntervalDirect => "direct",
        HessianRoute::SymbolicSimplified => "symbolic",
    }
}

fn abs_name(a: AbsMode) -> &'static str {
    match a {
        AbsMode::MagConstant => "mag",
        AbsMode::SignDrop => "sign-drop",
        AbsMode::ShiftSurrogate => "shift",
        AbsMode::LinearSurrogate => "linear",
    }
}

fn form_name(f: RangeForm) -> &'static str {
    match f {
        RangeForm::Natural => "natural",
        RangeForm::MeanValue => "mvf",
        RangeForm::Slope => "slope",
        RangeForm::Monotonic => "mono",
        RangeForm::Best => "best",
    }
}

fn interval_json(iv: &Interval) -> Value {
    json!([iv.lo(), iv.hi()])
}

fn matrix_json(m: &IntervalMatrix) -> Value {
    Value::Array(
        (0..m.dim())
            .map(|i| Value::Array((0..m.dim()).map(|j| interval_json(&m.get(i, j))).collect()))
            .collect(),
    )
}

fn report_json(r: &UnderestimatorReport, names: &[String], rigorous: bool) -> Value {
    // plot-space names: fixed variables were substituted out of g
    let reduced: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|(i, _)| !r.fixed.iter().any(|&(fi, _)| fi == *i))
        .map(|(_, n)| n.clone())
        .collect();
    json!({
        "alpha": r.alpha,
        "lower_bound": r.lower_bound,
        "rigorous_lower_bound": if rigorous { json!(r.rigorous_lower_bound) } else { Value::Null },
        "minimizer": r.minimizer,
        "hessian": matrix_json(&r.hessian),
        "hi": r.hi.iter().map(interval_json).collect::<Vec<_>>(),
        "underestimator": format_expr(&r.underestimator, &reduced),
        "mode": {
            "route": route_name(r.route),
            "abs": abs_name(r.abs_mode),
            "form": form_name(r.form),
        },
        "d": r.d,
        "verified": {
            "underestimation": r.verified_underestimation,
            "convexity": r.verified_convexity,
        },
        "warnings": r.warnings,
    })
}

fn build_config(p: &Problem, mode: &ModeArgs, rigorous: bool) -> Result<AnalyzeConfig, String> {
    let d = match mode.d {
        DArg::Auto => p.d.clone(),
        DArg::Width => None,
        DArg::Custom => Some(
            p.d.clone()
                .ok_or("--d custom requires a `d = [...]` line in the problem file")?,
        ),
    };
    Ok(AnalyzeConfig {
        route: mode.route.to_route(),
        abs_mode: mode.abs.to_mode(),
        form: mode.form.to_form(),
        d,
        simplify_hi: !mode.no_simplify_hi,
        samples: mode.samples,
        seed: mode.seed,
        rigorous,
    })
}

fn cmd_analyze(path: &PathBuf, mode: &ModeArgs, rigorous: bool) -> ExitCode {
    let p = match load_problem(path) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cfg = match build_config(&p, mode, rigorous) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match analyze(&p.objective, &p.bx, &cfg) {
        Ok(r) => {
            println!("{}", report_json(&r, &p.names, rigorous));
            ExitCode::SUCCESS
        }
        Err(RelaxError::Unverified(r)) => {
            println!("{}", report_json(&r, &p.names, rigorous));
            eprintln!(
                "error: verification failed (underestimation: {}, convexity: {})",
                r.verified_underestimation, r.verified_convexity
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_compare(path: &PathBuf, samples: usize, seed: u64) -> ExitCode {
    let p = match load_problem(path) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let abs_modes = [
        AbsMode::MagConstant,
        AbsMode::SignDrop,
        AbsMode::ShiftSurrogate,
        AbsMode::LinearSurrogate,
    ];
    let forms = [
        RangeForm::Natural,
        RangeForm::MeanValue,
        RangeForm::Slope,
        RangeForm::Monotonic,
        RangeForm::Best,
    ];
    let mut configs = vec![(HessianRoute::IntervalDirect, AbsMode::MagConstant, RangeForm::Natural, true)];
    for &a in &abs_modes {
        for &f in &forms {
            for simplify in [true, false] {
                configs.push((HessianRoute::SymbolicSimplified, a, f, simplify));
            }
        }
    }

    struct Row {
        route: HessianRoute,
        abs: AbsMode,
        form: RangeForm,
        simplify: bool,
        outcome: Result<Box<UnderestimatorReport>, String>,
    }

    let mut rows: Vec<Row> = configs
        .into_iter()
        .map(|(route, abs, form, simplify)| {
            let cfg = AnalyzeConfig {
                route,
                abs_mode: abs,
                form,
                d: p.d.clone(),
                simplify_hi: simplify,
                samples,
                seed,
                rigorous: false,
            };
            let outcome = match analyze(&p.objective, &p.bx, &cfg) {
                Ok(r) => Ok(Box::new(r)),
                Err(RelaxError::Unverified(r)) => Ok(r),
                Err(e) => Err(e.to_string()),
            };
            Row { route, abs, form, simplify, outcome }
        })
        .collect();

    rows.sort_by(|a, b| {
        let key = |r: &Row| match &r.outcome {
            Ok(rep) => rep.lower_bound,
            Err(_) => f64::NEG_INFINITY,
        };
        key(b).partial_cmp(&key(a)).unwrap_or(std::cmp::Ordering::Equal)
    });

    println!(
        "{:<9} {:<10} {:<8} {:<9} {:>12}  {:<24} verified",
        "route", "abs", "form", "simplify", "bound", "alpha"
    );
    let mut json_rows = Vec::new();
    for row in &rows {
        let mode = json!({
            "route": route_name(row.route),
            "abs": abs_name(row.abs),
            "form": form_name(row.form),
            "simplify": row.simplify,
        });
        match &row.outcome {
            Ok(rep) => {
                let alpha_str = rep
                    .alpha
                    .iter()
                    .map(|a| format!("{:.4}", a))
                    .collect::<Vec<_>>()
                    .join(",");
                println!(
                    "{:<9} {:<10} {:<8} {:<9} {:>12.4}  {:<24} {}/{}",
                    route_name(row.route),
                    abs_name(row.abs),
                    form_name(row.form),
                    row.simplify,
                    rep.lower_bound,
                    alpha_str,
                    rep.verified_underestimation,
                    rep.verified_convexity,
                );
                json_rows.push(json!({
                    "mode": mode,
                    "alpha": rep.alpha,
                    "lower_bound": rep.lower_bound,
                    "verified": {
                        "underestimation": rep.verified_underestimation,
                        "convexity": rep.verified_convexity,
                    },
                }));
            }
            Err(msg) => {
                println!(
                    "{:<9} {:<10} {:<8} {:<9} {:>12}  {}",
                    route_name(row.route),
                    abs_name(row.abs),
                    form_name(row.form),
                    row.simplify,
                    "-",
                    msg,
                );
                json_rows.push(json!({ "mode": mode, "error": msg }));
            }
        }
    }
    println!("{}", Value::Array(json_rows));
    ExitCode::SUCCESS
}

fn cmd_plot(path: &PathBuf, mode: &ModeArgs, grid: usize, out: &PathBuf) -> ExitCode {
    let p = match load_problem(path) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let n = p.bx.dim();
    if n > 2 {
        eprintln!("error: plot supports 1 or 2 variables, problem has {n}");
        return ExitCode::from(1);
    }
    if grid < 2 {
        eprintln!("error: grid must be at least 2");
        return ExitCode::from(1);
    }
    if p.bx.widths().iter().any(|&w| w == 0.0) {
        eprintln!("error: plot requires positive-width bounds for every variable");
        return ExitCode::from(1);
    }
    let cfg = match build_config(&p, mode, false) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = match analyze(&p.objective, &p.bx, &cfg) {
        Ok(r) => r,
        Err(RelaxError::Unverified(r)) => {
            eprintln!("warning: underestimator failed verification; emitting grid anyway");
            *r
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let g = &report.underestimator;

    let axis = |i: usize| -> Vec<f64> {
        let c = p.bx.component(i);
        (0..grid)
            .map(|k| c.lo() + c.width() * k as f64 / (grid - 1) as f64)
            .collect()
    };
    let mut csv = String::new();
    csv.push_str(&p.names.join(","));
    csv.push_str(",f,g\n");
    let emit = |csv: &mut String, point: &[f64]| -> Result<(), String> {
        let fv = eval_point(&p.objective, point).map_err(|e| e.to_string())?;
        let gv = eval_point(g, point).map_err(|e| e.to_string())?;
        let coords = point
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        csv.push_str(&format!("{coords},{fv},{gv}\n"));
        Ok(())
    };
    let result = if n == 1 {
        axis(0).iter().try_for_each(|&x| emit(&mut csv, &[x]))
    } else {
        let (a0, a1) = (axis(0), axis(1));
        a0.iter().try_for_each(|&x| {
            a1.iter().try_for_each(|&y| emit(&mut csv, &[x, y]))
        })
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let Err(e) = std::fs::write(out, csv) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Analyze { problem, mode, rigorous } => cmd_analyze(problem, mode, *rigorous),
        Cmd::Compare { problem, samples, seed } => cmd_compare(problem, *samples, *seed),
        Cmd::Plot { problem, mode, grid, out } => cmd_plot(problem, mode, *grid, out),
    }
}
