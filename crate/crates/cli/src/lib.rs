//! Command-line front end: trajectories, contour grids, backflow sweeps,
//! threshold scans and the acceptance checks, written as CSV or JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use qbath::analytic::{blp_analytic, c_t, d_abs_c_dt, BlpValue};
use qbath::lindblad::{build_generator, evolve_ode, system_bloch, OdeMethod, DEFAULT_ATOL};
use qbath::markovianity::{blp_numeric, threshold_scan, BlpOptions};
use qbath::verify::{faulty_generator, run_all, VerifyConfig};
use qbath::{BlochVector, CoherenceVector16, ModelParams, QubitState, TimeGrid};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] qbath::Error),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{failed} of {total} checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    /// 1 for bad input or I/O, 2 for numerical breakdown, 3 for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if !e.is_validation() => 2,
            CliError::VerifyFailed { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "qbath",
    version,
    about = "Qubit coupled to a cooled qubit bath: dynamics and Markovianity witnesses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory of the system Bloch vector and the coherence factor c_t.
    Evolve(EvolveArgs),
    /// Grid of d|c_t|/dt over (t, kappa).
    Contour(ContourArgs),
    /// Backflow measure, closed form against numeric, over a kappa sweep.
    Blp(BlpArgs),
    /// Bisect for the cooling rate at which the dynamics turns Markovian.
    Threshold(ThresholdArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub xi: f64,
    #[arg(long, default_value_t = 8.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Initial system Bloch vector.
    #[arg(long, default_value = "0,0,1", value_parser = parse_bloch, allow_hyphen_values = true)]
    pub bloch: [f64; 3],
    /// Absolute tolerance of the adaptive integrator.
    #[arg(long, default_value_t = DEFAULT_ATOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub xi: f64,
    /// Rows as lo:hi:steps.
    #[arg(long, default_value = "0:14:57", value_parser = parse_range)]
    pub kappa_range: Range,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BlpArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub xi: f64,
    /// Single cooling rate; overrides --kappa-range.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value = "0.5:7.5:15", value_parser = parse_range)]
    pub kappa_range: Range,
    /// Integration horizon; chosen from the geometric tail when omitted.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Sign-detection grid step; min(0.01, period/200) when omitted.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Random state pairs checked against the optimal pair.
    #[arg(long, default_value_t = 32)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub xi: f64,
    /// Search interval lo:hi; defaults to 0:16|xi|.
    #[arg(long, value_parser = parse_bracket)]
    pub bracket: Option<(f64, f64)>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Integrator tolerance for the ODE-based check.
    #[arg(long, default_value_t = DEFAULT_ATOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Flip one sign of the generator to exercise the failure path.
    #[arg(long, hide = true)]
    pub inject_generator_fault: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `steps` equally spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + h * k as f64
                }
            })
            .collect()
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not finite: {s:?}"));
    }
    Ok(v)
}

pub fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(format!("expected lo:hi:steps, got {s:?}"));
    };
    let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| format!("steps must be a positive integer, got {steps:?}"))?;
    if steps == 0 || hi < lo || (steps == 1 && hi != lo) {
        return Err(format!("empty or reversed range {s:?}"));
    }
    Ok(Range { lo, hi, steps })
}

pub fn parse_bracket(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    Ok((parse_f64(lo)?, parse_f64(hi)?))
}

pub fn parse_bloch(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [x, y, z] = parts[..] else {
        return Err(format!("expected x,y,z, got {s:?}"));
    };
    let v = [parse_f64(x)?, parse_f64(y)?, parse_f64(z)?];
    QubitState::new(v[0], v[1], v[2]).map_err(|e| e.to_string())?;
    Ok(v)
}

/// CSV token for a number: 16 significant digits, `inf`/`nan` otherwise.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.15e}")
    }
}

trait CsvRow {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

fn render<R: CsvRow + Serialize>(rows: &[R], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut s = R::HEADER.join(",");
            s.push('\n');
            for r in rows {
                s.push_str(&r.cells().join(","));
                s.push('\n');
            }
            Ok(s)
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            Ok(s)
        }
    }
}

fn emit(text: &str, out: &OutputArgs) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(CliError::Usage(format!(
            "--{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct EvolveRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub c_analytic: f64,
    pub c_numeric: f64,
    pub abs_diff: f64,
}

impl CsvRow for EvolveRow {
    const HEADER: &'static [&'static str] =
        &["t", "x", "y", "z", "c_analytic", "c_numeric", "abs_diff"];
    fn cells(&self) -> Vec<String> {
        [
            self.t,
            self.x,
            self.y,
            self.z,
            self.c_analytic,
            self.c_numeric,
            self.abs_diff,
        ]
        .map(fmt_num)
        .to_vec()
    }
}

/// Integrate the joint state from the given Bloch vector; `c_numeric` comes
/// from a second trajectory started at `(0, 0, 1)`.
pub fn evolve_rows(args: &EvolveArgs) -> Result<Vec<EvolveRow>> {
    check_positive("dt", args.dt)?;
    check_positive("t-max", args.t_max)?;
    check_positive("tol", args.tol)?;
    let params = ModelParams::new(args.xi, args.kappa)?;
    let [x, y, z] = args.bloch;
    let start = QubitState::new(x, y, z)?;
    let gen = build_generator(params)?;
    let grid = TimeGrid::with_step(0.0, args.t_max, args.dt)?;
    let method = OdeMethod::Adaptive { atol: args.tol };
    let reference = BlochVector::new(0.0, 0.0, 1.0);
    let (traj, refs) = rayon::join(
        || {
            evolve_ode(
                &gen,
                &CoherenceVector16::initial(start.bloch()),
                &grid,
                method,
            )
        },
        || evolve_ode(&gen, &CoherenceVector16::initial(reference), &grid, method),
    );
    let (traj, refs) = (traj?, refs?);
    Ok(grid
        .times()
        .into_iter()
        .zip(traj.iter().zip(&refs))
        .map(|(t, (v, r))| {
            let b = system_bloch(v);
            let c_analytic = c_t(params, t);
            let c_numeric = system_bloch(r).z;
            EvolveRow {
                t,
                x: b.x,
                y: b.y,
                z: b.z,
                c_analytic,
                c_numeric,
                abs_diff: (c_analytic - c_numeric).abs(),
            }
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct ContourRow {
    pub t: f64,
    pub kappa: f64,
    /// `NaN` (written `nan` / `null`) at zeros of `c_t`, where `|c_t|` has a kink.
    pub d_abs_c_dt: f64,
}

impl CsvRow for ContourRow {
    const HEADER: &'static [&'static str] = &["t", "kappa", "d_abs_c_dt"];
    fn cells(&self) -> Vec<String> {
        [self.t, self.kappa, self.d_abs_c_dt].map(fmt_num).to_vec()
    }
}

pub fn contour_rows(args: &ContourArgs) -> Result<Vec<ContourRow>> {
    check_positive("dt", args.dt)?;
    check_positive("t-max", args.t_max)?;
    let times = TimeGrid::with_step(0.0, args.t_max, args.dt)?.times();
    let params: Vec<ModelParams> = args
        .kappa_range
        .values()
        .into_iter()
        .map(|k| ModelParams::new(args.xi, k))
        .collect::<qbath::Result<_>>()?;
    let rows: Vec<Vec<ContourRow>> = params
        .par_iter()
        .map(|&p| {
            times
                .iter()
                .map(|&t| ContourRow {
                    t,
                    kappa: p.kappa(),
                    d_abs_c_dt: d_abs_c_dt(p, t).unwrap_or(f64::NAN),
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Serialize)]
pub struct BlpRow {
    pub kappa: f64,
    pub blp_analytic: BlpValue,
    pub blp_numeric: BlpValue,
    /// `NaN` when the measure diverges.
    pub abs_gap: f64,
    pub intervals: usize,
}

impl CsvRow for BlpRow {
    const HEADER: &'static [&'static str] = &[
        "kappa",
        "blp_analytic",
        "blp_numeric",
        "abs_gap",
        "intervals",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            fmt_num(self.kappa),
            fmt_num(self.blp_analytic.as_f64()),
            fmt_num(self.blp_numeric.as_f64()),
            fmt_num(self.abs_gap),
            self.intervals.to_string(),
        ]
    }
}

pub fn blp_rows(args: &BlpArgs) -> Result<Vec<BlpRow>> {
    if let Some(h) = args.t_max {
        check_positive("t-max", h)?;
    }
    if let Some(dt) = args.dt {
        check_positive("dt", dt)?;
    }
    let kappas = match args.kappa {
        Some(k) => vec![k],
        None => args.kappa_range.values(),
    };
    let opts = BlpOptions {
        horizon: args.t_max,
        n_pairs: args.pairs,
        seed: args.seed,
        step: args.dt,
    };
    kappas
        .par_iter()
        .map(|&k| {
            let params = ModelParams::new(args.xi, k)?;
            let analytic = blp_analytic(params)?;
            let est = blp_numeric(params, &opts)?;
            let numeric = if est.divergent {
                BlpValue::Infinite
            } else {
                BlpValue::Finite(est.value)
            };
            let abs_gap = match (analytic, numeric) {
                (BlpValue::Finite(a), BlpValue::Finite(n)) => (a - n).abs(),
                _ => f64::NAN,
            };
            Ok(BlpRow {
                kappa: k,
                blp_analytic: analytic,
                blp_numeric: numeric,
                abs_gap,
                intervals: est.intervals_counted,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ThresholdRow {
    pub kappa_star: f64,
    pub error: f64,
    pub witness: &'static str,
}

impl CsvRow for ThresholdRow {
    const HEADER: &'static [&'static str] = &["kappa_star", "error", "witness"];
    fn cells(&self) -> Vec<String> {
        vec![
            fmt_num(self.kappa_star),
            fmt_num(self.error),
            self.witness.to_string(),
        ]
    }
}

pub fn threshold_row(args: &ThresholdArgs) -> Result<ThresholdRow> {
    let (lo, hi) = args.bracket.unwrap_or((0.0, 16.0 * args.xi.abs()));
    let r = threshold_scan(args.xi, lo, hi, args.tol)?;
    Ok(ThresholdRow {
        kappa_star: r.kappa_star,
        error: r.error,
        witness: r.witness,
    })
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    check_positive("tol", args.tol)?;
    let mut config = VerifyConfig {
        ode_tol: args.tol,
        seed: args.seed,
        ..Default::default()
    };
    if args.inject_generator_fault {
        config.generator = faulty_generator;
    }
    let outcomes = run_all(&config);
    let text = match args.output.format {
        Format::Csv => outcomes.iter().map(|o| o.line() + "\n").collect::<String>(),
        Format::Json => serde_json::to_string_pretty(&outcomes).expect("outcomes serialize") + "\n",
    };
    emit(&text, &args.output)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Evolve(a) => emit(&render(&evolve_rows(a)?, a.output.format)?, &a.output),
        Command::Contour(a) => emit(&render(&contour_rows(a)?, a.output.format)?, &a.output),
        Command::Blp(a) => emit(&render(&blp_rows(a)?, a.output.format)?, &a.output),
        Command::Threshold(a) => {
            let row = threshold_row(a)?;
            let text = match a.output.format {
                Format::Csv => render(std::slice::from_ref(&row), Format::Csv)?,
                Format::Json => serde_json::to_string_pretty(&row).expect("row serializes") + "\n",
            };
            emit(&text, &a.output)
        }
        Command::Verify(a) => verify(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:14:57").unwrap().values().len(), 57);
        assert_eq!(parse_range("0:14:57").unwrap().values()[56], 14.0);
        assert_eq!(parse_range("2:2:1").unwrap().values(), vec![2.0]);
        assert!(parse_range("3:1:4").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:nan:3").is_err());
    }

    #[test]
    fn bloch_and_bracket() {
        assert_eq!(parse_bloch("0,0,1").unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(parse_bloch("-0.5, 0.5, 0").unwrap(), [-0.5, 0.5, 0.0]);
        assert!(parse_bloch("1,1,0").is_err());
        assert!(parse_bloch("1,0").is_err());
        assert_eq!(parse_bracket("1:20").unwrap(), (1.0, 20.0));
        assert!(parse_bracket("1").is_err());
    }

    #[test]
    fn number_tokens() {
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(0.1), "1.000000000000000e-1");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            CliError::Model(qbath::Error::DegenerateModel).exit_code(),
            1
        );
        assert_eq!(
            CliError::Model(qbath::Error::NumericFailure {
                time: 1.0,
                reason: "x".into()
            })
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::VerifyFailed {
                failed: 1,
                total: 10
            }
            .exit_code(),
            3
        );
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }
}
