//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or classification failure,
//! 2 usage error, 3 input error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num::Signed;
use serde_json::{json, Value};

use crate::batch::{batch_classify, OutputFormat, RunConfig};
use crate::bounds::{alpha, compare_alpha_b, gamma, xu_gu_bound};
use crate::curvature::{summarize, PointData, RadicalPointData};
use crate::error::Error;
use crate::io::{load_point_data_with, to_json_string, PointFile};
use crate::lawson_simons::{homology_verdict, maximize_theta, OptimizerConfig, ThetaResult};
use crate::models::{
    clifford_minimal, clifford_minimal_exact, einstein_torus, einstein_torus_exact, umbilical_sphere,
    umbilical_sphere_exact,
};
use crate::scalar::{format_rational, int, parse_rational, Field, Rational};
use crate::tolerance::Tolerances;
use crate::verify::run_reproduction;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pinchkit",
    version,
    about = "Pointwise submanifold curvature, Ricci pinching and Lawson-Simons checks"
)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Markdown => OutputFormat::Markdown,
        }
    }
}

#[derive(Debug, Args)]
struct SeedArgs {
    /// Master seed; falls back to PINCHKIT_SEED, then 0.
    #[arg(long, env = "PINCHKIT_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OptimizerArgs {
    #[command(flatten)]
    seed: SeedArgs,
    /// Random starts in addition to coordinate-subset starts.
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Riemannian gradient norm at which ascent stops.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            seed: self.seed.seed,
            max_iters: self.max_iters,
            grad_tol: self.tol,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate alpha, b and the Xu-Gu bound.
    Bounds {
        /// Dimension `n` or an inclusive range `a:b`.
        #[arg(long)]
        n: String,
        /// Inclusive range `a:b` of split indices; defaults to all admissible k.
        #[arg(long)]
        k_range: Option<String>,
        /// `start:stop:count` evenly spaced values of H, exact rationals allowed.
        #[arg(long, default_value = "0:1:2")]
        h_grid: String,
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Curvature summary of one point.
    Analyze { file: PathBuf },
    /// Pointwise verdict for one or more points.
    Classify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Maximize the Lawson-Simons functional over q-planes.
    OptimizeTheta {
        file: PathBuf,
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Compare max Theta_q with q(n-q)c.
    Verdict {
        file: PathBuf,
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Emit point data for a model immersion.
    Model {
        #[arg(value_enum)]
        kind: ModelKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = "1")]
        r: String,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Mean curvature of an umbilical sphere.
        #[arg(long, default_value = "1")]
        h: String,
        #[arg(long)]
        exact: bool,
    },
    /// Run the reproduction checks and print a pass/fail table.
    VerifyPaper {
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelKind {
    Torus,
    Clifford,
    Umbilical,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::Schema { .. } | Error::Symmetry { .. } | Error::DimensionMismatch(_) => {
                EXIT_INPUT
            }
            Error::Domain(_) | Error::NotAProjection { .. } => EXIT_USAGE,
            _ => EXIT_FAILED,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

struct Output {
    text: String,
    code: i32,
}

fn ok(text: String) -> Result<Output, Failure> {
    Ok(Output { text, code: EXIT_OK })
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn parse_range(text: &str, what: &str) -> Result<(u32, u32), Failure> {
    let parse = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| usage(format!("bad {what} {text:?}")))
    };
    match text.split_once(':') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let v = parse(text)?;
            Ok((v, v))
        }
    }
}

fn parse_exact(text: &str, what: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|_| usage(format!("bad {what} {text:?}")))
}

fn h_grid(text: &str) -> Result<Vec<Rational>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(usage(format!("H grid must be start:stop:count, got {text:?}")));
    };
    let start = parse_exact(start, "H grid start")?;
    let stop = parse_exact(stop, "H grid stop")?;
    let count: i64 = count
        .parse()
        .map_err(|_| usage(format!("bad H grid count in {text:?}")))?;
    if count < 1 {
        return Err(usage("H grid count must be >= 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start.clone() + (stop.clone() - start.clone()) * Rational::ratio(i, count - 1))
        .collect())
}

fn bounds_table(n: &str, k_range: Option<&str>, h: &str, c: &str, format: Format) -> Result<Output, Failure> {
    let (n_lo, n_hi) = parse_range(n, "n")?;
    let grid = h_grid(h)?;
    let c = parse_exact(c, "c")?;
    if grid.iter().any(|h| h.is_negative()) {
        return Err(usage("H must be >= 0"));
    }
    let unit_sphere = c == int(1);
    let header = [
        "n",
        "k",
        "H",
        "c",
        "alpha",
        "b",
        "xu_gu",
        "gamma_k",
        "comparison",
        "b_minus_alpha",
    ];
    let mut rows: Vec<Vec<String>> = Vec::new();
    for n in n_lo..=n_hi {
        let (k_lo, k_hi) = match k_range {
            Some(r) => parse_range(r, "k range")?,
            None => (2, n / 2),
        };
        for k in k_lo..=k_hi {
            for h in &grid {
                let a: Rational = alpha(n, k, h, &c)?;
                let xu = xu_gu_bound(n, h, &c)?;
                let mut row = vec![
                    n.to_string(),
                    k.to_string(),
                    format_rational(h),
                    format_rational(&c),
                    format!("{}", a.as_f64()),
                ];
                if unit_sphere {
                    let report = compare_alpha_b(n, k, h)?;
                    row.push(format!("{}", report.b.to_f64()));
                    row.push(format!("{}", xu.as_f64()));
                    row.push(report.gamma_k.to_string());
                    row.push(report.comparison.as_str().to_string());
                    row.push(format!("{}", report.difference.to_f64()));
                } else {
                    // b is only defined on the unit sphere.
                    row.extend([
                        String::new(),
                        format!("{}", xu.as_f64()),
                        gamma(n, k).to_string(),
                        String::new(),
                        String::new(),
                    ]);
                }
                rows.push(row);
            }
        }
    }
    let text = match format {
        Format::Csv => {
            let mut s = header.join(",") + "\n";
            for r in &rows {
                s.push_str(&r.join(","));
                s.push('\n');
            }
            s
        }
        Format::Markdown => {
            let mut s = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
            for r in &rows {
                s.push_str(&format!("| {} |\n", r.join(" | ")));
            }
            s
        }
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| {
                    Value::Object(
                        header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| (h.to_string(), Value::String(v.clone())))
                            .collect(),
                    )
                })
                .collect();
            json_text(&Value::Array(objs))
        }
    };
    ok(text)
}

fn load(path: &PathBuf) -> Result<PointData<f64>, Failure> {
    Ok(load_point_data_with(path, Tolerances::default().symmetry)?.to_float())
}

fn matrix_rows(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|x| json!(x)).collect()))
            .collect(),
    )
}

fn theta_json(r: &ThetaResult) -> Value {
    json!({
        "q": r.q,
        "value": r.value,
        "threshold": r.threshold,
        "verdict": r.verdict.as_str(),
        "equality_band": r.equality_band,
        "global_certified": r.global_certified,
        "certificate": r.certificate,
        "commuting": r.commuting,
        "best_start": r.best_start,
        "starts_run": r.starts_run,
        "best_subset_value": r.best_subset_value,
        "plane": matrix_rows(&r.split.frame()),
        "basis": matrix_rows(r.split.basis()),
    })
}

/// Exact square root of a rational, when it is one.
fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let (p, q) = (x.numer().sqrt(), x.denom().sqrt());
    if &(&p * &p) == x.numer() && &(&q * &q) == x.denom() {
        Some(Rational::new(p, q))
    } else {
        None
    }
}

/// Rational entries when every scale is a perfect square, else `None`.
fn radical_as_rational(p: &RadicalPointData) -> Option<PointData<Rational>> {
    let ops = p
        .ops()
        .iter()
        .map(|op| rational_sqrt(&op.scale_sq).map(|s| op.matrix.map(|x| x * s.clone())))
        .collect::<Option<Vec<_>>>()?;
    PointData::new(p.n(), p.c().clone(), ops).ok()
}

fn model(
    kind: ModelKind,
    n: Option<usize>,
    k: Option<usize>,
    r: &str,
    c: &str,
    m: usize,
    h: &str,
    exact: bool,
) -> Result<Output, Failure> {
    let r_exact = parse_exact(r, "r")?;
    let c_exact = parse_exact(c, "c")?;
    let (r_f, c_f) = (r_exact.as_f64(), c_exact.as_f64());
    let file = match kind {
        ModelKind::Umbilical => {
            let n = n.ok_or_else(|| usage("umbilical needs --n"))?;
            let h_exact = parse_exact(h, "h")?;
            let spec = json!({"kind": "umbilical", "n": n, "m": m, "c": c, "H": h});
            if exact {
                PointFile::exact(umbilical_sphere_exact(n, m, c_exact, h_exact)?).with_model_spec(spec)
            } else {
                PointFile::float(umbilical_sphere(n, m, c_f, h_exact.as_f64())?).with_model_spec(spec)
            }
        }
        ModelKind::Torus | ModelKind::Clifford => {
            let (n, k) = match (kind, n, k) {
                (ModelKind::Clifford, Some(n), _) if n % 2 == 0 => (n, n / 2),
                (ModelKind::Clifford, Some(n), _) => return Err(usage(format!("Clifford needs even n, got {n}"))),
                (ModelKind::Clifford, None, Some(k)) => (2 * k, k),
                (ModelKind::Torus, Some(n), Some(k)) => (n, k),
                _ => return Err(usage("torus needs --n and --k; clifford needs --n or --k")),
            };
            if r_exact <= int(0) {
                return Err(usage("r must be positive"));
            }
            if exact {
                let r_sq = r_exact.clone() * r_exact.clone();
                let (p, spec) = match kind {
                    ModelKind::Clifford => clifford_minimal_exact(k, &r_sq, &c_exact, m)?,
                    _ => einstein_torus_exact(n, k, &r_sq, &c_exact, m)?,
                };
                let mut spec_json = spec.to_json();
                if matches!(kind, ModelKind::Clifford) {
                    spec_json["kind"] = json!("clifford");
                }
                match radical_as_rational(&p) {
                    Some(q) => PointFile::exact(q),
                    None => PointFile::float(p.to_float()),
                }
                .with_model_spec(spec_json)
            } else {
                let (p, spec) = match kind {
                    ModelKind::Clifford => clifford_minimal(k, r_f, c_f, m)?,
                    _ => einstein_torus(n, k, r_f, c_f, m)?,
                };
                PointFile::float(p).with_model_spec(serde_json::to_value(&spec).expect("spec serializes"))
            }
        }
    };
    ok(to_json_string(&file))
}

fn execute(cli: Cli) -> Result<Output, Failure> {
    match cli.command {
        Command::Bounds {
            n,
            k_range,
            h_grid,
            c,
            format,
        } => bounds_table(&n, k_range.as_deref(), &h_grid, &c, format),
        Command::Analyze { file } => {
            let p = load(&file)?;
            ok(json_text(
                &serde_json::to_value(summarize(&p)?).expect("summary serializes"),
            ))
        }
        Command::Classify {
            files,
            k,
            seed,
            workers,
            starts,
            format,
        } => {
            let cfg = RunConfig {
                seed: seed.seed,
                workers,
                starts,
                format: format.into(),
                ..RunConfig::default()
            };
            let report = batch_classify(&files, k, &cfg)?;
            let code = if report.all_input_errors() {
                EXIT_INPUT
            } else if report.error_count() > 0 {
                EXIT_FAILED
            } else {
                EXIT_OK
            };
            Ok(Output {
                text: report.render(),
                code,
            })
        }
        Command::OptimizeTheta { file, q, opt } => {
            let p = load(&file)?;
            ok(json_text(&theta_json(&maximize_theta(&p, q, &opt.config())?)))
        }
        Command::Verdict { file, q, opt } => {
            let p = load(&file)?;
            let r = homology_verdict(&p, q, &opt.config())?;
            ok(json_text(&json!({
                "q": r.q,
                "verdict": r.verdict.as_str(),
                "max_theta": r.value,
                "threshold": r.threshold,
                "equality_band": r.equality_band,
                "global_certified": r.global_certified,
                "certificate": r.certificate,
            })))
        }
        Command::Model {
            kind,
            n,
            k,
            r,
            c,
            m,
            h,
            exact,
        } => model(kind, n, k, &r, &c, m, &h, exact),
        Command::VerifyPaper { seed, workers, format } => {
            let cfg = RunConfig {
                seed: seed.seed,
                workers,
                ..RunConfig::default()
            };
            let report = run_reproduction(&cfg)?;
            let code = if report.all_passed() { EXIT_OK } else { EXIT_FAILED };
            Ok(Output {
                text: report.render(format.into()),
                code,
            })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let out_path = cli.out.clone();
    match execute(cli) {
        Ok(output) => {
            let written = match &out_path {
                Some(path) => {
                    std::fs::write(path, &output.text).map_err(|e| format!("cannot write {}: {e}", path.display()))
                }
                None => stdout.write_all(output.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                let _ = writeln!(stderr, "error: {msg}");
                return EXIT_INPUT;
            }
            output.code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn dispatch() -> i32 {
    run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
