//! Command-line front end. [`run`] parses arguments, writes results to the
//! given stream (or `--out`) and returns the process exit code: 0 on success,
//! 2 for domain and input errors, 3 when a method does not apply. Errors are
//! written to the error stream as a JSON object with a stable `code`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::families::{
    build_array, build_constant, build_constant_unstable, build_half_array, build_soliton, mu_from_velocity,
    ArrayParam, WaveSolution,
};
use crate::shooting::{hat_mu_extended, solve_hat_mu, DEFAULT_MU_TOL};
use crate::soliton_fixedpoint::{iterate_to_fixed_point_with, FixedPointOptions};
use crate::verify::{asymptotic_check, bounds_sweep, default_grid, property_suite, residual_report, DEFAULT_STEPS};
use crate::washboard::Sign;

#[derive(Debug, Parser)]
#[command(
    name = "sgwave",
    version,
    about = "Travelling waves of the damped, driven sine-Gordon equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The soliton at the tuned dissipation.
    Soliton(SolitonArgs),
    /// A periodic array of solitons.
    Array(ArrayArgs),
    /// A half-array launched from a saddle.
    HalfArray(HalfArrayArgs),
    /// The uniform state.
    Constant(ConstantArgs),
    /// Tuned dissipation with its bounds on a grid of forcing values.
    SweepHatmu(SweepArgs),
    /// Successive approximations for the soliton energy curve.
    FixedPoint(FixedPointArgs),
    /// Residual and tail checks on one solution.
    Verify(VerifyArgs),
    /// Randomized ordering and step-relation suites on the kinetic-energy flow.
    CheckProps(PropsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Soliton,
    Array,
    HalfArray,
    Constant,
}

#[derive(Debug, Args)]
pub struct Physical {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// +1 or -1.
    #[arg(long, default_value = "+1", value_parser = parse_helicity, allow_hyphen_values = true)]
    pub helicity: Sign,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, default_value_t = 801)]
    pub samples: usize,
    /// Sampling window `lo,hi` in the comoving coordinate.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub xi_range: Option<(f64, f64)>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here; metadata then goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("param").required(true).multiple(false)))]
pub struct ArrayParamArgs {
    /// Kinetic energy at the potential maxima.
    #[arg(long, group = "param")]
    pub zm: Option<f64>,
    /// Reduced dissipation; `inf` selects the unit-speed branch.
    #[arg(long, group = "param", value_parser = parse_mu)]
    pub mu: Option<f64>,
    #[arg(long, group = "param")]
    pub xi_period: Option<f64>,
    #[arg(long, group = "param")]
    pub abs_v: Option<f64>,
    #[arg(long, group = "param")]
    pub loop_i: Option<f64>,
}

impl ArrayParamArgs {
    fn param(&self) -> ArrayParam {
        match (self.zm, self.mu, self.xi_period, self.abs_v, self.loop_i) {
            (Some(z), ..) => ArrayParam::ZM(z),
            (_, Some(m), ..) => ArrayParam::Mu(m),
            (_, _, Some(x), ..) => ArrayParam::Xi(x),
            (_, _, _, Some(v), _) => ArrayParam::AbsV(v),
            (.., Some(i)) => ArrayParam::LoopI(i),
            _ => unreachable!("clap enforces one parameter"),
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("half").required(true).multiple(false)))]
pub struct HalfParamArgs {
    #[arg(long, group = "half")]
    pub mu: Option<f64>,
    #[arg(long, group = "half")]
    pub abs_v: Option<f64>,
}

impl HalfParamArgs {
    fn mu(&self, alpha: f64) -> Result<f64> {
        match (self.mu, self.abs_v) {
            (Some(m), _) => Ok(m),
            (_, Some(v)) => mu_from_velocity(v, alpha),
            _ => unreachable!("clap enforces one parameter"),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolitonArgs {
    #[command(flatten)]
    pub physical: Physical,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ArrayArgs {
    #[command(flatten)]
    pub physical: Physical,
    #[command(flatten)]
    pub param: ArrayParamArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct HalfArrayArgs {
    #[command(flatten)]
    pub physical: Physical,
    #[command(flatten)]
    pub param: HalfParamArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConstantArgs {
    #[arg(long)]
    pub gamma: f64,
    /// Also emit the unstable uniform state.
    #[arg(long)]
    pub include_unstable: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Explicit comma-separated grid; overrides `--from/--to/--count`.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    pub from: f64,
    #[arg(long, default_value_t = 0.999)]
    pub to: f64,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Add the extrapolated value at gamma = 1 to JSON output.
    #[arg(long)]
    pub with_limit: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixedPointArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Tolerance of the shooting cross-check.
    #[arg(long, default_value_t = DEFAULT_MU_TOL)]
    pub mu_tol: f64,
    #[arg(long, default_value_t = crate::soliton_fixedpoint::DEFAULT_INTERVALS)]
    pub intervals: usize,
    /// Iterate beyond the proven contraction range.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("vparam").multiple(false)))]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "+1", value_parser = parse_helicity, allow_hyphen_values = true)]
    pub helicity: Sign,
    #[arg(long, group = "vparam")]
    pub zm: Option<f64>,
    #[arg(long, group = "vparam", value_parser = parse_mu)]
    pub mu: Option<f64>,
    #[arg(long, group = "vparam")]
    pub xi_period: Option<f64>,
    #[arg(long, group = "vparam")]
    pub abs_v: Option<f64>,
    #[arg(long, group = "vparam")]
    pub loop_i: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_helicity(s: &str) -> std::result::Result<Sign, String> {
    match s {
        "+1" | "1" | "+" | "plus" => Ok(Sign::Plus),
        "-1" | "-" | "minus" => Ok(Sign::Minus),
        _ => Err(format!("helicity must be +1 or -1, got {s:?}")),
    }
}

fn parse_mu(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_nan() || v == f64::NEG_INFINITY {
        return Err(format!("mu must be a number or inf, got {s:?}"));
    }
    Ok(v)
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad lower bound {a:?}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad upper bound {b:?}"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("need finite lo < hi, got {s:?}"));
    }
    Ok((lo, hi))
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl Failure {
    fn to_json(&self) -> Value {
        match self {
            Failure::Core(e) => json!({"code": e.code(), "message": e.to_string(), "exit_code": e.exit_code()}),
            Failure::Io(m) => json!({"code": "io_error", "message": m, "exit_code": 2}),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) => e.exit_code(),
            Failure::Io(_) => 2,
        }
    }
}

/// Format with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Metadata emitted with every profile.
#[derive(Debug, Clone, Serialize)]
pub struct WaveMeta {
    pub family: &'static str,
    pub gamma: f64,
    pub alpha: f64,
    /// `null` on the unit-speed branch.
    pub mu: Option<f64>,
    pub mu_infinite: bool,
    pub v: f64,
    pub helicity: i32,
    pub winding: i32,
    pub xi_period: Option<f64>,
    pub x_period: Option<f64>,
    pub z_m: Option<f64>,
    pub loop_i: Option<f64>,
    pub balance_residual: Option<f64>,
    pub periodicity_residual: Option<f64>,
    pub iterations: Option<usize>,
    pub stable: bool,
    pub phi: Option<f64>,
    pub merge: Option<Value>,
}

pub fn wave_meta(sol: &WaveSolution) -> WaveMeta {
    let p = &sol.params;
    WaveMeta {
        family: sol.family.name(),
        gamma: p.gamma,
        alpha: p.alpha,
        mu: finite(p.mu),
        mu_infinite: p.mu.is_infinite(),
        v: p.v,
        helicity: sol.helicity.value() as i32,
        winding: sol.winding,
        xi_period: sol.xi_period,
        x_period: sol.x_period,
        z_m: sol.z_m,
        loop_i: sol.loop_i,
        balance_residual: sol.balance_residual,
        periodicity_residual: sol.periodicity_residual,
        iterations: None,
        stable: sol.stable,
        phi: sol.constant_phi,
        merge: sol.merge.as_ref().map(|m| {
            json!({
                "decay_rate": m.decay_rate,
                "decay_bound": m.decay_bound,
                "rho_offset": m.rho_offset,
                "shift": m.shift,
                "asymptotic_shift": m.asymptotic_shift,
                "periods": m.periods,
            })
        }),
    }
}

fn profile_csv(rows: &[[f64; 4]]) -> String {
    let mut s = String::from("xi,g,u,phi\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", fmt17(r[0]), fmt17(r[1]), fmt17(r[2]), fmt17(r[3]));
    }
    s
}

struct Sink<'a> {
    out: &'a mut dyn Write,
}

impl Sink<'_> {
    fn json(&mut self, v: &Value, path: Option<&PathBuf>) -> std::result::Result<(), Failure> {
        let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
        self.text(&text, path)
    }

    fn text(&mut self, text: &str, path: Option<&PathBuf>) -> std::result::Result<(), Failure> {
        match path {
            Some(p) => std::fs::write(p, text)?,
            None => self.out.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn default_window(sol: &WaveSolution) -> (f64, f64) {
    match sol.xi_period {
        Some(xi) if sol.family.is_array() => (0.0, 2.0 * xi),
        _ => (-20.0, 20.0),
    }
}

fn emit_wave(sink: &mut Sink, sol: &WaveSolution, output: &Output) -> std::result::Result<(), Failure> {
    let (lo, hi) = output.xi_range.unwrap_or_else(|| default_window(sol));
    let rows = sol.sample(lo, hi, output.samples)?;
    let meta = wave_meta(sol);
    match output.format {
        Format::Json => {
            let mut v = serde_json::to_value(&meta).expect("serializable");
            v["xi_range"] = json!([lo, hi]);
            v["profile"] = json!(rows);
            sink.json(&v, output.out.as_ref())
        }
        Format::Csv => {
            sink.text(&profile_csv(&rows), output.out.as_ref())?;
            if output.out.is_some() {
                sink.json(&serde_json::to_value(&meta).expect("serializable"), None)?;
            }
            Ok(())
        }
    }
}

fn gamma_grid(args: &SweepArgs) -> Result<Vec<f64>> {
    let mut grid = match &args.gammas {
        Some(g) => g.clone(),
        None => {
            if args.count < 1 || !(args.from <= args.to) {
                return Err(Error::InvalidArgument(format!(
                    "need count >= 1 and from <= to, got {}..{} x{}",
                    args.from, args.to, args.count
                )));
            }
            if args.count == 1 {
                vec![args.from]
            } else {
                let step = (args.to - args.from) / (args.count - 1) as f64;
                (0..args.count).map(|k| args.from + step * k as f64).collect()
            }
        }
    };
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

fn cmd_sweep(sink: &mut Sink, args: &SweepArgs) -> std::result::Result<(), Failure> {
    let grid = gamma_grid(args)?;
    let rows = match args.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            pool.install(|| bounds_sweep(&grid))?
        }
        None => bounds_sweep(&grid)?,
    };
    match args.format {
        Format::Csv => {
            let mut s = String::from("gamma,hat_mu,lower32,upper32,mu1\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt17(r.gamma),
                    fmt17(r.hat_mu),
                    fmt17(r.lower),
                    fmt17(r.upper),
                    fmt17(r.mu1)
                );
            }
            sink.text(&s, args.out.as_ref())
        }
        Format::Json => {
            let all_within = rows.iter().all(|r| r.within_bounds);
            let increasing = rows.iter().all(|r| r.increasing);
            let limit = if args.with_limit {
                Some(hat_mu_extended(1.0, DEFAULT_MU_TOL)?)
            } else {
                None
            };
            let v = json!({
                "rows": rows,
                "limit": limit,
                "checks": [
                    {"name": "within_bounds", "pass": all_within},
                    {"name": "strictly_increasing", "pass": increasing},
                ],
            });
            sink.json(&v, args.out.as_ref())
        }
    }
}

fn cmd_fixed_point(sink: &mut Sink, args: &FixedPointArgs) -> std::result::Result<(), Failure> {
    if !(args.gamma > 0.0) {
        return Err(Error::GammaOutOfRange {
            gamma: args.gamma,
            expected: "(0, 1)",
        }
        .into());
    }
    let opts = FixedPointOptions {
        intervals: args.intervals,
        force: args.force,
        keep_iterates: false,
    };
    let run = iterate_to_fixed_point_with(args.gamma, args.tol, args.max_iter, &opts)?;
    let shoot = solve_hat_mu(args.gamma, args.mu_tol)?;
    let v = json!({
        "gamma": run.gamma,
        "iterations": run.iterations(),
        "mu": run.mu(),
        "lambda": run.lambda,
        "a": run.a,
        "b": run.b,
        "error_bound_mu": run.apriori_error_mu,
        "error_bound_z": run.apriori_error_z,
        "max_observed_ratio": run.max_observed_ratio(),
        "forced": run.forced,
        "mu_shooting": shoot.mu_star,
        "shooting_delta": (run.mu() - shoot.mu_star).abs(),
        "differences": run.differences,
    });
    sink.json(&v, args.out.as_ref())
}

fn check(name: &str, value: Option<f64>, threshold: &str, pass: bool) -> Value {
    json!({"name": name, "value": value, "threshold": threshold, "pass": pass})
}

fn verify_solution(args: &VerifyArgs) -> Result<WaveSolution> {
    let given = [args.zm, args.mu, args.xi_period, args.abs_v, args.loop_i];
    let param = || -> Result<ArrayParam> {
        Ok(match given {
            [Some(z), ..] => ArrayParam::ZM(z),
            [_, Some(m), ..] => ArrayParam::Mu(m),
            [_, _, Some(x), ..] => ArrayParam::Xi(x),
            [_, _, _, Some(v), _] => ArrayParam::AbsV(v),
            [.., Some(i)] => ArrayParam::LoopI(i),
            _ => {
                return Err(Error::InvalidArgument(
                    "array needs one of --zm, --mu, --xi-period, --abs-v, --loop-i".into(),
                ))
            }
        })
    };
    let none_given = given.iter().all(Option::is_none);
    match args.family {
        FamilyArg::Constant | FamilyArg::Soliton if !none_given => Err(Error::InvalidArgument(
            "array parameters apply only to array and half-array".into(),
        )),
        FamilyArg::Constant => build_constant(args.gamma),
        FamilyArg::Soliton => build_soliton(args.gamma, args.alpha, args.helicity),
        FamilyArg::Array => build_array(args.gamma, args.alpha, args.helicity, param()?),
        FamilyArg::HalfArray => {
            let mu = match param()? {
                ArrayParam::Mu(m) => m,
                ArrayParam::AbsV(v) => mu_from_velocity(v, args.alpha)?,
                _ => return Err(Error::InvalidArgument("half-array takes --mu or --abs-v".into())),
            };
            build_half_array(args.gamma, args.alpha, args.helicity, mu)
        }
    }
}

fn cmd_verify(sink: &mut Sink, args: &VerifyArgs) -> std::result::Result<(), Failure> {
    let sol = verify_solution(args)?;
    let grid = default_grid(&sol);
    let res = residual_report(&sol, &grid, &DEFAULT_STEPS)?;
    let asym = asymptotic_check(&sol)?;
    let mut checks = Vec::new();
    if sol.constant_phi.is_some() {
        checks.push(check(
            "pde_residual_zero",
            Some(res.max_residual),
            "== 0",
            res.max_residual == 0.0,
        ));
    } else {
        let order = res.observed_order;
        let pass = order.is_some_and(|o| (1.9..=2.1).contains(&o));
        checks.push(check("pde_residual_order", order, "[1.9, 2.1]", pass));
        let min_u = sol
            .profile
            .as_ref()
            .map(|p| p.u_values().iter().fold(f64::INFINITY, |m, &u| m.min(u)));
        checks.push(check(
            "profile_increasing",
            min_u,
            "> 0",
            min_u.is_some_and(|u| u > 0.0),
        ));
    }
    checks.push(check("asymptotic_limits", Some(asym.limit_error), "<= 1e-6", asym.pass));
    if let Some(b) = sol.balance_residual {
        checks.push(check("energy_balance", Some(b), "<= 1e-8", b <= 1e-8));
    }
    if let Some(p) = sol.periodicity_residual {
        checks.push(check("periodicity", Some(p), "<= 1e-8", p <= 1e-8));
    }
    if let Some(m) = &sol.merge {
        checks.push(check("merge_rate", Some(m.decay_rate), "> 0", m.decay_rate > 0.0));
        checks.push(check(
            "merge_rate_bound",
            Some(m.decay_rate - m.decay_bound),
            ">= 0",
            m.decay_rate >= m.decay_bound,
        ));
    }
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    let mut v = serde_json::to_value(wave_meta(&sol)).expect("serializable");
    v["checks"] = json!(checks);
    v["pass"] = json!(pass);
    v["residual"] = serde_json::to_value(&res).expect("serializable");
    v["asymptotics"] = serde_json::to_value(&asym).expect("serializable");
    sink.json(&v, args.out.as_ref())
}

fn cmd_props(sink: &mut Sink, args: &PropsArgs) -> std::result::Result<(), Failure> {
    let report = property_suite(args.seed, args.cases)?;
    let checks: Vec<Value> = report
        .suites
        .iter()
        .map(|s| {
            json!({
                "name": s.name,
                "value": finite(s.worst),
                "threshold": format!("<= {:e}", s.tolerance),
                "pass": s.passed(),
                "cases": s.cases,
                "failures": s.failures,
                "first_failure": s.first_failure,
            })
        })
        .collect();
    let v = json!({"seed": report.seed, "checks": checks, "pass": report.passed()});
    sink.json(&v, args.out.as_ref())
}

fn dispatch(cli: &Cli, sink: &mut Sink) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Soliton(a) => {
            let sol = build_soliton(a.physical.gamma, a.physical.alpha, a.physical.helicity)?;
            emit_wave(sink, &sol, &a.output)
        }
        Command::Array(a) => {
            let sol = build_array(a.physical.gamma, a.physical.alpha, a.physical.helicity, a.param.param())?;
            emit_wave(sink, &sol, &a.output)
        }
        Command::HalfArray(a) => {
            let mu = a.param.mu(a.physical.alpha)?;
            let sol = build_half_array(a.physical.gamma, a.physical.alpha, a.physical.helicity, mu)?;
            emit_wave(sink, &sol, &a.output)
        }
        Command::Constant(a) => {
            let stable = build_constant(a.gamma)?;
            let mut sols = vec![stable];
            if a.include_unstable {
                sols.push(build_constant_unstable(a.gamma, true)?);
            }
            let mut rows = Vec::new();
            for s in &sols {
                rows.extend(s.sample(0.0, 0.0, 1)?.into_iter().take(1));
            }
            match a.format {
                Format::Csv => sink.text(&profile_csv(&rows), a.out.as_ref()),
                Format::Json => {
                    let mut v = serde_json::to_value(wave_meta(&sols[0])).expect("serializable");
                    v["profile"] = json!(rows);
                    if let Some(u) = sols.get(1) {
                        v["unstable"] = serde_json::to_value(wave_meta(u)).expect("serializable");
                    }
                    sink.json(&v, a.out.as_ref())
                }
            }
        }
        Command::SweepHatmu(a) => cmd_sweep(sink, a),
        Command::FixedPoint(a) => cmd_fixed_point(sink, a),
        Command::Verify(a) => cmd_verify(sink, a),
        Command::CheckProps(a) => cmd_props(sink, a),
    }
}

/// Run the command line `args` (including the program name) and return the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let v = json!({"code": "invalid_argument", "message": e.to_string().trim_end(), "exit_code": 2});
            let _ = writeln!(err, "{v}");
            return 2;
        }
    };
    let mut sink = Sink { out };
    match dispatch(&cli, &mut sink) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "{}", f.to_json());
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;
