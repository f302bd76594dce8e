//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and writes one JSON or CSV report.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bigraded::{self, BiSeries, Grid, SeriesJson};
use crate::bundles::{self, BundleFile, SplitBundle};
use crate::coupling;
use crate::error::{Error, Result};
use crate::filtration::{is_upper_unitriangular, FilteredSpace};
use crate::graded::{self, DyadicFloorSequence, ModelJson, ModelSequence, MonomialModel};
use crate::limits::{self, ErrorFn, Mode, Sequence, Violation};
use crate::linalg::Matrix;
use crate::polygon::{polygon_of, Polygon};
use crate::rational::{format_rational, parse_rational, round_sig12, to_f64, RatStr, Rational};
use crate::simplex::{CdfMethod, EmpiricalCdf};

#[derive(Parser, Debug)]
#[command(name = "hnpoly", version, about = "Filtrations, Dirac measures and concave polygons")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path, `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    output: String,
    /// Master seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Combinatorial budget; each command has its own default.
    #[arg(long, global = true)]
    budget: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Filtered vector spaces given as JSON.
    Filtration {
        #[command(subcommand)]
        action: FiltrationCmd,
    },
    /// The coupling measure on products of simplices.
    Coupling {
        #[command(subcommand)]
        action: CouplingCmd,
    },
    /// Monomial models of filtered graded algebras.
    Graded {
        #[command(subcommand)]
        action: GradedCmd,
    },
    /// Split bundles on a curve.
    Bundles {
        #[command(subcommand)]
        action: BundlesCmd,
    },
    /// Bigraded Poincaré series.
    Bigraded {
        #[command(subcommand)]
        action: BigradedCmd,
    },
    /// Limits of almost sub- or super-additive sequences.
    Limits(LimitsArgs),
}

#[derive(Subcommand, Debug)]
enum FiltrationCmd {
    /// Associated measure.
    Measure {
        #[arg(long)]
        input: String,
    },
    /// Polygon of the associated measure.
    Polygon {
        #[arg(long)]
        input: String,
        /// Extra evenly spaced float samples in the CSV.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Maximal basis from `{"space": …, "basis": [[…]]}`.
    MaximalBase {
        #[arg(long)]
        input: String,
    },
}

#[derive(Subcommand, Debug)]
enum CouplingCmd {
    Verify {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BuiltinMeasures {
    /// `δ_{φ(n)}` with `φ(n) = 2^{⌊log₂ n⌋}`.
    DyadicFloor,
}

#[derive(Subcommand, Debug)]
enum GradedCmd {
    /// Polygons of `T_{1/n}ν_n` and the dyadic Cauchy check.
    Converge {
        /// Model JSON.
        #[arg(long, conflicts_with = "sequence")]
        input: Option<String>,
        #[arg(long, value_enum)]
        sequence: Option<BuiltinMeasures>,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 1e-2)]
        tolerance: f64,
    },
    /// Quasi-filtered criterion up to a degree bound.
    Check {
        #[arg(long)]
        input: String,
        /// Error function, see `limits --f`.
        #[arg(long, default_value = "zero")]
        f: String,
        #[arg(long)]
        degree: u64,
        #[arg(long, default_value_t = 2)]
        r_max: usize,
    },
}

#[derive(Args, Debug)]
struct BundleInput {
    /// Bundle JSON.
    #[arg(long, conflicts_with = "mu")]
    input: Option<String>,
    /// Slopes of line bundles, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Option<Vec<String>>,
}

#[derive(Subcommand, Debug)]
enum BundlesCmd {
    /// Harder–Narasimhan data and polygon.
    Polygon {
        #[command(flatten)]
        bundle: BundleInput,
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// `T_{1/n}` of the HN measure of `S^n E`.
    Sym {
        #[command(flatten)]
        bundle: BundleInput,
        #[arg(long)]
        n: u64,
    },
    /// Polygon of `S^n E` next to the limit polygon.
    Limit {
        #[command(flatten)]
        bundle: BundleInput,
        #[arg(long)]
        n: u64,
        /// Monte Carlo samples for the limit when no closed form applies.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Exact,
    MonteCarlo,
}

#[derive(Subcommand, Debug)]
enum BigradedCmd {
    /// Coefficients `a_{n,d}` and the slice measure.
    Slice {
        #[arg(long)]
        input: String,
        #[arg(long)]
        n: i64,
    },
    /// CDF of the limit measure `Σ d_i U_i`.
    Limit {
        /// Series JSON; its denominators give `d`.
        #[arg(long, conflicts_with = "d")]
        input: Option<String>,
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<u32>>,
        /// Evaluation points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Deviation between slice CDFs and the limit CDF.
    Certify {
        #[arg(long)]
        input: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<i64>,
        /// `auto` or comma-separated points.
        #[arg(long, default_value = "auto", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LimitMode {
    Sub,
    Super,
    Constant,
    Pseudo,
    LogSummable,
    Diagnostic,
}

#[derive(Args, Debug)]
struct LimitsArgs {
    #[arg(long, value_enum)]
    mode: LimitMode,
    #[arg(long, default_value_t = 1000)]
    n_max: u64,
    /// Check the pairwise hypothesis on this many pairs.
    #[arg(long)]
    verify_pairs: Option<usize>,
    /// Builtin name (`3n-sqrt(n)`, `5n+2`, `n-log(n+1)`, `n+log2(n)`, `phi`,
    /// `linear:p/q`) or a file with one value per line.
    #[arg(long, default_value = "3n-sqrt(n)")]
    seq: String,
    /// `zero`, `const:p/q`, `bit-length`, `log(n+1)` or `log2(n)`.
    #[arg(long, default_value = "zero")]
    f: String,
    #[arg(long, default_value = "0")]
    c1: String,
    #[arg(long, default_value = "1")]
    c2: String,
    #[arg(long, default_value_t = 1)]
    n0: u64,
    #[arg(long, default_value_t = 10)]
    alpha_max: u32,
    #[arg(long, default_value_t = 1e-2)]
    tolerance: f64,
}

/// Failure after a report was produced: the report is still written.
struct Rejected {
    report: Output,
    message: String,
}

enum Output {
    Json(Value),
    Csv(String),
}

enum Outcome {
    Done(Output),
    Rejected(Rejected),
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code: 0 on success, 2 on any error, with the diagnostic on stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(Outcome::Done(out)) => match emit(&cli.output, out) {
            Ok(()) => 0,
            Err(e) => fail(&e.to_string()),
        },
        Ok(Outcome::Rejected(r)) => {
            if let Err(e) = emit(&cli.output, r.report) {
                return fail(&e.to_string());
            }
            fail(&r.message)
        }
        Err(e) => fail(&e.to_string()),
    }
}

fn fail(message: &str) -> i32 {
    eprintln!("error: {message}");
    2
}

fn emit(path: &str, out: Output) -> Result<()> {
    let text = match out {
        Output::Json(mut v) => {
            round_floats(&mut v);
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidInput(e.to_string()))?;
            s.push('\n');
            s
        }
        Output::Csv(s) => s,
    };
    if path == "-" {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::InvalidInput(format!("stdout: {e}")))
    } else {
        fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{path}: {e}")))
    }
}

/// Floats are printed with 12 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig12(n.as_f64().expect("f64"));
            if let Some(m) = serde_json::Number::from_f64(x) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T> {
    let text = if path == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?
    } else {
        fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{path}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn no_csv(what: &str) -> Error {
    Error::Unsupported(format!("{what} has no CSV form; use --format json"))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Filtration { action } => filtration(cli, action).map(Outcome::Done),
        Command::Coupling { action } => coupling_cmd(cli, action).map(Outcome::Done),
        Command::Graded { action } => graded_cmd(cli, action).map(Outcome::Done),
        Command::Bundles { action } => bundles_cmd(cli, action).map(Outcome::Done),
        Command::Bigraded { action } => bigraded_cmd(cli, action).map(Outcome::Done),
        Command::Limits(args) => limits_cmd(cli, args),
    }
}

fn polygon_output(cli: &Cli, p: &Polygon, samples: usize, extra: Value) -> Output {
    match cli.format {
        Format::Csv => Output::Csv(p.to_csv(samples)),
        Format::Json => {
            let mut v = extra;
            v["polygon"] = to_value(p);
            Output::Json(v)
        }
    }
}

#[derive(Deserialize)]
struct MaximalBaseInput {
    space: FilteredSpace,
    basis: Vec<Vec<RatStr>>,
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(|q| Value::String(format_rational(q))).collect()))
            .collect(),
    )
}

fn filtration(cli: &Cli, action: &FiltrationCmd) -> Result<Output> {
    match action {
        FiltrationCmd::Measure { input } => {
            let space: FilteredSpace = read_json(input)?;
            let nu = space.associated_measure();
            Ok(match cli.format {
                Format::Csv => Output::Csv(nu.to_csv()),
                Format::Json => Output::Json(json!({ "dims": space.dims(), "measure": nu })),
            })
        }
        FiltrationCmd::Polygon { input, samples } => {
            let space: FilteredSpace = read_json(input)?;
            let p = polygon_of(&space.associated_measure())?;
            Ok(polygon_output(cli, &p, *samples, json!({})))
        }
        FiltrationCmd::MaximalBase { input } => {
            if cli.format == Format::Csv {
                return Err(no_csv("maximal-base"));
            }
            let data: MaximalBaseInput = read_json(input)?;
            let seed: Matrix = data.basis.into_iter().map(|r| r.into_iter().map(|q| q.0).collect()).collect();
            let mb = data.space.maximal_base(&seed)?;
            Ok(Output::Json(json!({
                "basis": matrix_json(&mb.basis),
                "change": matrix_json(&mb.change),
                "upper_unitriangular": is_upper_unitriangular(&mb.change),
                "is_maximal": data.space.is_maximal_basis(&mb.basis)?,
                "measure": data.space.basis_measure(&mb.basis)?,
            })))
        }
    }
}

fn coupling_cmd(cli: &Cli, action: &CouplingCmd) -> Result<Output> {
    let CouplingCmd::Verify { d, n } = action;
    if cli.format == Format::Csv {
        return Err(no_csv("coupling verify"));
    }
    let rho = coupling::build_rho(n, *d, cli.budget.unwrap_or(coupling::DEFAULT_BUDGET))?;
    Ok(Output::Json(to_value(&rho.verify())))
}

fn graded_cmd(cli: &Cli, action: &GradedCmd) -> Result<Output> {
    let budget = cli.budget.unwrap_or(graded::DEFAULT_BUDGET);
    match action {
        GradedCmd::Converge { input, sequence, n_max, tolerance } => {
            let report = match (input, sequence) {
                (Some(path), _) => {
                    let model = MonomialModel::try_from(read_json::<ModelJson>(path)?)?;
                    graded::convergence_run(&ModelSequence { model: &model, budget }, *n_max, *tolerance)?
                }
                (None, Some(BuiltinMeasures::DyadicFloor)) => {
                    graded::convergence_run(&DyadicFloorSequence, *n_max, *tolerance)?
                }
                (None, None) => return Err(Error::InvalidInput("give --input or --sequence".into())),
            };
            Ok(match cli.format {
                Format::Csv => {
                    let mut s = String::from("k,vs_half,vs_below\n");
                    for r in &report.dyadic {
                        let _ = writeln!(s, "{},{},{}", r.k, round_sig12(r.vs_half), round_sig12(r.vs_below));
                    }
                    Output::Csv(s)
                }
                Format::Json => Output::Json(to_value(&report)),
            })
        }
        GradedCmd::Check { input, f, degree, r_max } => {
            if cli.format == Format::Csv {
                return Err(no_csv("graded check"));
            }
            let model = MonomialModel::try_from(read_json::<ModelJson>(input)?)?;
            let report = graded::check_quasi_filtered(&model, &error_fn(f)?, *degree, *r_max, budget)?;
            Ok(Output::Json(to_value(&report)))
        }
    }
}

fn load_bundle(b: &BundleInput) -> Result<BundleFile> {
    match (&b.input, &b.mu) {
        (Some(path), _) => read_json(path),
        (None, Some(mu)) => {
            let slopes = mu.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
            Ok(BundleFile {
                curve: bundles::CurveData::new(0, 1)?,
                bundle: SplitBundle::line_bundles(&slopes)?,
            })
        }
        (None, None) => Err(Error::InvalidInput("give --input or --mu".into())),
    }
}

fn bundles_cmd(cli: &Cli, action: &BundlesCmd) -> Result<Output> {
    let budget = cli.budget.unwrap_or(bundles::DEFAULT_BUDGET);
    match action {
        BundlesCmd::Polygon { bundle, samples } => {
            let file = load_bundle(bundle)?;
            let hn = bundles::hn_data(&file.bundle)?;
            let stats = bundles::slope_stats(&file.bundle);
            Ok(polygon_output(
                cli,
                &hn.polygon,
                *samples,
                json!({
                    "a": file.curve.a(),
                    "slopes": stats,
                    "jumps": hn.jumps,
                    "dims": hn.dims,
                    "measure": hn.measure,
                }),
            ))
        }
        BundlesCmd::Sym { bundle, n } => {
            let file = load_bundle(bundle)?;
            let decomposition = bundles::sym_power_decomposition(&file.bundle, *n, budget)?;
            let nu = bundles::sym_measure(&file.bundle, *n, budget)?;
            let p = polygon_of(&nu)?;
            Ok(polygon_output(cli, &p, 0, json!({ "n": n, "summands": decomposition, "measure": nu })))
        }
        BundlesCmd::Limit { bundle, n, samples } => {
            let file = load_bundle(bundle)?;
            bundle_limit(cli, &file.bundle, *n, *samples, budget)
        }
    }
}

/// Knots of `P(ν_n)` with the limit polygon at the same abscissae.
fn bundle_limit(cli: &Cli, e: &SplitBundle, n: u64, samples: u64, budget: u128) -> Result<Output> {
    let p = polygon_of(&bundles::sym_measure(e, n, budget)?)?;
    let knots = p.knots().to_vec();
    let values = p.values();
    let two_lines = e.summands().len() == 2 && e.rank() == 2;
    let limit: Vec<f64>;
    let mut exact_limit: Option<Vec<Rational>> = None;
    let method;
    if two_lines {
        let (mu2, mu1) = (&e.summands()[0].0, &e.summands()[1].0);
        let q = bundles::two_line_limit_polygon(mu1, mu2)?;
        let ex: Vec<Rational> = knots.iter().map(|t| q.eval(t)).collect();
        limit = ex.iter().map(to_f64).collect();
        exact_limit = Some(ex);
        method = json!({ "method": "closed_form", "linear": q.linear, "quadratic": q.quadratic });
    } else {
        let coords: Vec<f64> = e.slope_coordinates().iter().map(to_f64).collect();
        let emp = EmpiricalCdf::sample(&coords, samples, cli.seed)?;
        let sorted: Vec<f64> = emp.sorted().iter().rev().copied().collect();
        limit = knots.iter().map(|t| empirical_polygon(&sorted, to_f64(t))).collect();
        method = json!({ "method": "monte_carlo", "seed": cli.seed, "samples": samples });
    }
    let gaps: Vec<f64> = match &exact_limit {
        Some(ex) => values.iter().zip(ex).map(|(a, b)| to_f64(&(a - b))).collect(),
        None => values.iter().zip(&limit).map(|(a, b)| to_f64(a) - b).collect(),
    };
    let max_gap = gaps.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    match cli.format {
        Format::Csv => {
            let mut s = String::from("t,P_n(t),limit(t)\n");
            for (i, t) in knots.iter().enumerate() {
                let lim = match &exact_limit {
                    Some(ex) => format_rational(&ex[i]),
                    None => round_sig12(limit[i]).to_string(),
                };
                let _ = writeln!(s, "{},{},{}", format_rational(t), format_rational(&values[i]), lim);
            }
            Ok(Output::Csv(s))
        }
        Format::Json => Ok(Output::Json(json!({
            "n": n,
            "limit": method,
            "knots": knots.iter().map(RatStr::from).collect::<Vec<_>>(),
            "polygon": values.iter().map(RatStr::from).collect::<Vec<_>>(),
            "limit_values": limit,
            "max_gap": max_gap,
        }))),
    }
}

/// Polygon of the empirical measure at `t`: the mean of the top `t`
/// fraction of samples times `t`.
fn empirical_polygon(desc: &[f64], t: f64) -> f64 {
    let n = desc.len() as f64;
    let whole = (t * n).floor() as usize;
    let head: f64 = desc[..whole.min(desc.len())].iter().sum();
    let rest = if whole < desc.len() { (t * n - whole as f64) * desc[whole] } else { 0.0 };
    (head + rest) / n
}

fn method_of(arg: MethodArg, seed: u64, samples: u64) -> CdfMethod {
    match arg {
        MethodArg::ClosedForm => CdfMethod::ClosedForm,
        MethodArg::Exact => CdfMethod::Exact,
        MethodArg::MonteCarlo => CdfMethod::MonteCarlo { seed, samples },
    }
}

fn bigraded_cmd(cli: &Cli, action: &BigradedCmd) -> Result<Output> {
    let budget = cli.budget.unwrap_or(bigraded::DEFAULT_BUDGET);
    match action {
        BigradedCmd::Slice { input, n } => {
            let p = BiSeries::try_from(read_json::<SeriesJson>(input)?)?;
            let slice = p.expand_slice(*n, budget)?;
            Ok(match cli.format {
                Format::Csv => {
                    let mut s = String::from("d,coeff\n");
                    for (d, c) in &slice.coeffs {
                        let _ = writeln!(s, "{d},{c}");
                    }
                    Output::Csv(s)
                }
                Format::Json => {
                    let measure = if *n >= 1 { Some(p.slice_measure(*n, budget)?) } else { None };
                    Output::Json(json!({
                        "n": n,
                        "coeffs": slice.coeffs.iter().map(|(d, c)| json!([d, c.to_string()])).collect::<Vec<_>>(),
                        "total": slice.total.to_string(),
                        "measure": measure,
                    }))
                }
            })
        }
        BigradedCmd::Limit { input, d, x, method, samples } => {
            let d_vec = match (input, d) {
                (Some(path), _) => BiSeries::try_from(read_json::<SeriesJson>(path)?)?.denominators().to_vec(),
                (None, Some(d)) => d.clone(),
                (None, None) => return Err(Error::InvalidInput("give --input or --d".into())),
            };
            let m = method_of(*method, cli.seed, *samples);
            let points = x
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let values = match m {
                CdfMethod::MonteCarlo { seed, samples } => {
                    let coords: Vec<f64> = d_vec.iter().map(|&v| f64::from(v)).collect();
                    let emp = EmpiricalCdf::sample(&coords, samples, seed)?;
                    points.iter().map(|&p| emp.eval(p)).collect()
                }
                _ => points
                    .iter()
                    .map(|&p| bigraded::limit_cdf_product(&d_vec, p, m))
                    .collect::<Result<Vec<_>>>()?,
            };
            Ok(match cli.format {
                Format::Csv => {
                    let mut s = String::from("x,cdf\n");
                    for (p, v) in points.iter().zip(&values) {
                        let _ = writeln!(s, "{},{}", round_sig12(*p), round_sig12(*v));
                    }
                    Output::Csv(s)
                }
                Format::Json => Output::Json(json!({
                    "d": d_vec,
                    "oracle": m,
                    "x": points,
                    "cdf": values,
                })),
            })
        }
        BigradedCmd::Certify { input, n, grid, method, samples } => {
            let p = BiSeries::try_from(read_json::<SeriesJson>(input)?)?;
            let m = method_of(*method, cli.seed, *samples);
            let cert = bigraded::convergence_certificate(&p, n, &Grid::parse(grid)?, m, budget)?;
            Ok(match cli.format {
                Format::Csv => {
                    let mut s = String::from("n,grid_points,deviation\n");
                    for r in &cert.rows {
                        let _ = writeln!(s, "{},{},{}", r.n, r.grid_points, round_sig12(r.deviation));
                    }
                    Output::Csv(s)
                }
                Format::Json => Output::Json(to_value(&cert)),
            })
        }
    }
}

fn builtin_sequence(name: &str) -> Result<Sequence> {
    let seq = match name {
        "3n-sqrt(n)" => Sequence::from_fn(name, |n| 3.0 * n as f64 - (n as f64).sqrt()),
        "5n+2" => Sequence::exact(name, |n| Rational::from_integer((5 * n + 2).into())),
        "n-log(n+1)" => Sequence::from_fn(name, |n| n as f64 - ((n + 1) as f64).ln()),
        "n+log2(n)" => Sequence::from_fn(name, |n| n as f64 + (n as f64).log2()),
        "phi" => Sequence::exact(name, |n| Rational::from_integer(limits::dyadic_floor(n).into())),
        _ => match name.strip_prefix("linear:") {
            Some(c) => Sequence::linear(parse_rational(c)?),
            None => return sequence_file(name),
        },
    };
    Ok(seq)
}

/// One value per line, `#` starts a comment. All-rational files stay exact.
fn sequence_file(path: &str) -> Result<Sequence> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{path:?} is neither a builtin sequence nor a readable file: {e}")))?;
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    if let Ok(exact) = lines.iter().map(|l| parse_rational(l)).collect::<Result<Vec<_>>>() {
        return Ok(Sequence::from_exact_values(path, exact));
    }
    let floats = lines
        .iter()
        .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("{path}: {l:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sequence::from_values(path, floats))
}

fn error_fn(name: &str) -> Result<ErrorFn> {
    Ok(match name {
        "zero" => ErrorFn::zero(),
        "bit-length" => ErrorFn::bit_length(),
        "log(n+1)" => ErrorFn::from_fn(name, true, |n| ((n + 1) as f64).ln()),
        "log2(n)" => ErrorFn::from_fn(name, true, |n| if n == 0 { 0.0 } else { (n as f64).log2() }),
        _ => match name.strip_prefix("const:") {
            Some(c) => {
                let c = parse_rational(c)?;
                if c < Rational::from_integer(0.into()) {
                    return Err(Error::InvalidInput("error function must be nonnegative".into()));
                }
                ErrorFn::constant(c)
            }
            None => return Err(Error::InvalidInput(format!("unknown error function {name:?}"))),
        },
    })
}

fn exact_str(q: &Option<Rational>) -> Value {
    q.as_ref().map_or(Value::Null, |q| Value::String(format_rational(q)))
}

fn limits_cmd(cli: &Cli, args: &LimitsArgs) -> Result<Outcome> {
    if cli.format == Format::Csv {
        return Err(no_csv("limits"));
    }
    let f = error_fn(&args.f)?;
    if args.mode == LimitMode::LogSummable {
        let r = limits::log_summable_check(&f, args.alpha_max)?;
        let mut v = to_value(&r);
        v["f"] = json!(f.name());
        v["exact_partial_sum"] = exact_str(&r.exact_partial_sum);
        v["exact_cesaro"] = exact_str(&r.exact_cesaro);
        return Ok(Outcome::Done(Output::Json(v)));
    }
    let a = builtin_sequence(&args.seq)?;
    let pair_budget = args.verify_pairs.unwrap_or(100_000);
    let mut report = json!({ "mode": format!("{:?}", args.mode).to_lowercase(), "sequence": a.name(), "n_max": args.n_max });
    let violations: Vec<Violation> = match args.mode {
        LimitMode::Sub | LimitMode::Super => {
            let mode = if args.mode == LimitMode::Sub { Mode::Sub } else { Mode::Super };
            let b = limits::fekete_bracket(&a, &f, mode, args.n_max)?;
            report["bound"] = json!(b.bound);
            report["bound_at"] = json!(b.bound_at);
            report["estimate"] = json!(b.estimate);
            report["exact_bound"] = exact_str(&b.exact_bound);
            report["exact_estimate"] = exact_str(&b.exact_estimate);
            match args.verify_pairs {
                Some(k) => {
                    let pairs = limits::sampled_pairs(args.n_max, args.n0, k);
                    report["pairs_checked"] = json!(pairs.len());
                    limits::check_pairs(&a, &f, mode, &pairs)
                }
                None => Vec::new(),
            }
        }
        LimitMode::Constant => {
            let (c1, c2) = (parse_rational(&args.c1)?, parse_rational(&args.c2)?);
            let (violations, checked) = limits::check_constant_error(&a, &c1, &c2, args.n_max, pair_budget)?;
            report["pairs_checked"] = json!(checked);
            if violations.is_empty() {
                let r = limits::constant_error_limit(&a, &c1, &c2, args.n_max, pair_budget)?;
                report["bound"] = json!(r.lower_bound);
                report["estimate"] = json!(r.estimate);
                report["exact_bound"] = exact_str(&r.exact_lower_bound);
                report["exact_estimate"] = exact_str(&r.exact_estimate);
            }
            violations
        }
        LimitMode::Pseudo => {
            let pairs = limits::sampled_pairs(args.n_max, args.n0, pair_budget);
            let violations = limits::check_pairs(&a, &f, Mode::Sub, &pairs);
            report["pairs_checked"] = json!(pairs.len());
            if violations.is_empty() {
                let r = limits::pseudo_limit(&a, &f, args.n_max, args.n0, pair_budget)?;
                report["estimate"] = json!(r.estimate);
                report["exact_estimate"] = exact_str(&r.exact_estimate);
                report["diagnostic"] = to_value(&r.diagnostic);
            }
            violations
        }
        LimitMode::Diagnostic => {
            let d = limits::convergence_diagnostic(&a, args.n_max, args.tolerance)?;
            report["diagnostic"] = to_value(&d);
            Vec::new()
        }
        LimitMode::LogSummable => unreachable!("handled above"),
    };
    report["violations"] = to_value(&violations);
    if violations.is_empty() {
        return Ok(Outcome::Done(Output::Json(report)));
    }
    let listed: Vec<String> = violations.iter().take(5).map(ToString::to_string).collect();
    Ok(Outcome::Rejected(Rejected {
        report: Output::Json(report),
        message: format!("hypothesis violated at {}", listed.join("; ")),
    }))
}
