//! Command-line front end. `run_cli` parses arguments, performs the requested
//! command and returns the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diagnostics::{failure_report, FailureRequest, FailureRun, DEFAULT_DELTA};
use crate::error::Error;
use crate::integrator::IntegratorConfig;
use crate::methods::MethodKind;
use crate::model::{conserved_quantity, ModelParams, PopulationState};
use crate::preset::{preset, PRESET_NAMES};
use crate::series::{InitialValueProblem, DEFAULT_ORDER};
use crate::svg::phase_plane_svg;
use crate::verify::{run_checks, VerifyOptions, DEFAULT_ORDERS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "predprey", version, about = "Truncated power series versus a reference integrator on Lotka-Volterra dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare one truncated series with the reference and write the outputs.
    Run(RunArgs),
    /// Run the built-in numerical self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Taylor,
    Adomian,
    Hpm,
    Vim,
}

impl From<Method> for MethodKind {
    fn from(m: Method) -> Self {
        match m {
            Method::Taylor => MethodKind::Taylor,
            Method::Adomian => MethodKind::Adomian,
            Method::Hpm => MethodKind::Hpm,
            Method::Vim => MethodKind::Vim,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    /// Named preset (case-I, case-V, decoupled).
    #[arg(long, conflicts_with_all = ["a", "b", "c", "d", "x0", "y0"])]
    preset: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    y0: Option<f64>,
    #[arg(long, value_enum, default_value = "taylor")]
    method: Method,
    /// Truncation order, or iteration count for vim.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Number of uniformly spaced output samples.
    #[arg(long, default_value_t = 2001, value_parser = clap::value_parser!(u64).range(2..))]
    points: u64,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Relative-deviation threshold for the divergence time.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Extra outputs; report.json is always written.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Orders swept by the divergence check.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ORDERS)]
    orders: Vec<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
    Library(Error),
    Io(PathBuf, std::io::Error),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
            Failure::Library(e) if e.is_numeric() => EXIT_NUMERIC,
            Failure::Library(_) => EXIT_USAGE,
            Failure::Io(..) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => m.clone(),
            Failure::Library(e) => e.to_string(),
            Failure::Io(path, e) => format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(&args),
        Command::Verify(args) => verify(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn verify(args: &VerifyArgs) -> Result<i32, Failure> {
    if args.orders.is_empty() || args.orders.contains(&0) {
        return Err(Failure::Usage("--orders needs positive orders".into()));
    }
    let report = run_checks(&VerifyOptions {
        orders: args.orders.clone(),
        ..VerifyOptions::default()
    });
    print!("{}", report.table());
    let failed = report.failures().count();
    if failed == 0 {
        println!("all {} checks passed", report.checks.len());
        Ok(EXIT_OK)
    } else {
        println!("{failed} of {} checks failed", report.checks.len());
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn build_request(args: &RunArgs) -> Result<FailureRequest, Failure> {
    let (label, ivp, order) = match &args.preset {
        Some(name) => {
            let p = preset(name)?;
            let t_end = args.t_end.unwrap_or(p.default_t_end);
            (p.name.to_string(), p.ivp_until(t_end)?, args.order.unwrap_or(p.default_order))
        }
        None => {
            let fields = [
                ("--a", args.a),
                ("--b", args.b),
                ("--c", args.c),
                ("--d", args.d),
                ("--x0", args.x0),
                ("--y0", args.y0),
            ];
            let missing: Vec<_> = fields.iter().filter(|(_, v)| v.is_none()).map(|(n, _)| *n).collect();
            if !missing.is_empty() {
                return Err(Failure::Usage(format!(
                    "give --preset ({}) or all of --a --b --c --d --x0 --y0; missing {}",
                    PRESET_NAMES.join(", "),
                    missing.join(" ")
                )));
            }
            let v = |k: usize| fields[k].1.unwrap_or_default();
            let params = ModelParams::new(v(0), v(1), v(2), v(3))?;
            let initial = PopulationState::new(v(4), v(5))?;
            let ivp = InitialValueProblem::new(params, initial, args.t_end.unwrap_or(10.0))?;
            ("custom".to_string(), ivp, args.order.unwrap_or(DEFAULT_ORDER))
        }
    };
    if !(args.delta.is_finite() && args.delta > 0.0) {
        return Err(Failure::Usage("--delta must be positive".into()));
    }
    let cfg = IntegratorConfig::with_tolerances(args.rel_tol, args.abs_tol);
    cfg.validate()?;
    let mut req = FailureRequest::new(label, ivp, args.method.into(), order);
    req.points = args.points as usize;
    req.cfg = cfg;
    req.delta = args.delta;
    Ok(req)
}

fn run(args: &RunArgs) -> Result<i32, Failure> {
    let req = build_request(args)?;
    // Inputs are validated by now, so a non-finite value means the series overflowed.
    let run = failure_report(&req).map_err(|e| match e {
        Error::NonFinite(m) => Failure::Numeric(m),
        e => e.into(),
    })?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::Io(args.out.clone(), e))?;
    let mut written = Vec::new();
    let json = serde_json::to_string_pretty(&run.report).expect("report serializes") + "\n";
    written.push(write_file(&args.out, "report.json", &json)?);
    if matches!(args.format, Format::Csv | Format::All) {
        written.push(write_file(&args.out, "timeseries.csv", &timeseries_csv(&run, &req.ivp.params))?);
        written.push(write_file(&args.out, "phase.csv", &phase_csv(&run))?);
    }
    if matches!(args.format, Format::Svg | Format::All) {
        let title = format!("{} {} order {}", req.label, req.method, req.order);
        let svg = phase_plane_svg(
            &title,
            &run.reference.points(),
            &run.approx.points(),
            run.report.self_intersection.as_ref(),
        );
        written.push(write_file(&args.out, "phase.svg", &svg)?);
    }

    let r = &run.report;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} / {} / order {} on [0, {}]", r.preset, r.method, r.order, r.t_end);
    let _ = writeln!(out, "divergence time: {}", opt(r.divergence_time));
    let _ = writeln!(
        out,
        "invariant drift: reference {:.3e}, series {:.3e}",
        r.max_invariant_drift_ref, r.max_invariant_drift_approx
    );
    let _ = writeln!(out, "series self-intersection: {}", r.self_intersection.is_some());
    let _ = writeln!(out, "period: {}", opt(r.period_estimate));
    for path in written {
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |t| format!("{t}"))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(path.clone(), e))?;
    Ok(path)
}

/// 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn invariant(p: &ModelParams, x: f64, y: f64) -> String {
    conserved_quantity(p, &PopulationState { x, y }).map(num).unwrap_or_default()
}

fn timeseries_csv(run: &FailureRun, p: &ModelParams) -> String {
    let mut s = String::from("t,x_ref,y_ref,x_approx,y_approx,C_ref,C_approx\n");
    for (r, a) in run.reference.samples().iter().zip(run.approx.samples()) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(r.t),
            num(r.x),
            num(r.y),
            num(a.x),
            num(a.y),
            invariant(p, r.x, r.y),
            invariant(p, a.x, a.y)
        );
    }
    s
}

fn phase_csv(run: &FailureRun) -> String {
    let mut s = String::from("x_ref,y_ref,x_approx,y_approx\n");
    for (r, a) in run.reference.samples().iter().zip(run.approx.samples()) {
        let _ = writeln!(s, "{},{},{},{}", num(r.x), num(r.y), num(a.x), num(a.y));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("predprey").chain(args.iter().copied()))
    }

    #[test]
    fn preset_conflicts_with_custom_parameters() {
        assert!(parse(&["run", "--preset", "case-V", "--a", "2"]).is_err());
    }

    #[test]
    fn negative_order_names_the_flag() {
        let err = parse(&["run", "--preset", "case-V", "--order", "-1"]).unwrap_err();
        assert!(err.to_string().contains("--order"), "{err}");
    }

    #[test]
    fn orders_split_on_commas() {
        let cli = parse(&["verify", "--orders", "3,5"]).unwrap();
        match cli.command {
            Command::Verify(v) => assert_eq!(v.orders, vec![3, 5]),
            _ => panic!("expected verify"),
        }
    }

    #[test]
    fn missing_custom_fields_are_listed() {
        let Command::Run(args) = parse(&["run", "--a", "1", "--b", "1"]).unwrap().command else {
            panic!("expected run")
        };
        let msg = build_request(&args).unwrap_err().message();
        assert!(msg.ends_with("missing --c --d --x0 --y0"), "{msg}");
    }

    #[test]
    fn csv_numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn invariant_is_blank_off_the_open_quadrant() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(invariant(&p, -1.0, 1.0), "");
        assert!(!invariant(&p, 1.0, 1.0).is_empty());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Usage(String::new()).exit_code(), EXIT_USAGE);
        assert_eq!(Failure::Library(Error::Divergence { t: 1.0 }).exit_code(), EXIT_NUMERIC);
        assert_eq!(Failure::Library(Error::Domain(String::new())).exit_code(), EXIT_USAGE);
    }
}
