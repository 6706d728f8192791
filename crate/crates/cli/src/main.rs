//! Command-line front end: exact distributions, simulations, bounds and sweeps.

mod plot;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use spin_erasure::{
    bounds_report, default_max_cycles, delta_free_spin, exponential_average, jarzynski_a_prime, jarzynski_lhs,
    limit_distribution, r_diagnostic, simulate_batch, simulate_batch_sharded, spinlabor_bound_integral,
    spinlabor_bound_jensen_asymmetric, spinlabor_bound_universal, violation_curve, write_bounds_csv,
    write_violation_csv, Config, Report, Reservoir, ViolationBaseline, DEFAULT_TAIL_TOL,
};

const EXIT_PARAMETER: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "spin-erasure", version, about = "Erasure costs against a spin reservoir")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact limit distribution of the spinlabor
    Dist {
        #[command(flatten)]
        point: PointArgs,
        /// Bound reported alongside the mean
        #[arg(long, value_enum, default_value_t = BoundKind::Jensen)]
        bound: BoundKind,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo histogram and summary
    Simulate {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        /// Split the shots into this many independent jobs
        #[arg(long)]
        shards: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Every bound and diagnostic for one parameter point
    Bounds {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// R values for the four reference parameter sets
    Table1,
    /// Probability of undershooting a baseline by epsilon
    Violation {
        #[command(flatten)]
        point: PointArgs,
        /// symmetric, landauer, asymmetric, or a number
        #[arg(long, default_value = "symmetric")]
        baseline: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon_step: f64,
        #[arg(long, default_value_t = 3.0)]
        epsilon_max: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exponential average of the spinlabor and the free spin change
    Jarzynski {
        #[command(flatten)]
        point: PointArgs,
        /// Ancilla count; defaults to max cycles
        #[arg(long)]
        n_bar: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bounds report over a C range crossed with an alpha range
    Sweep {
        /// Inclusive `start:end`
        #[arg(long = "C-range")]
        c_range: String,
        /// Inclusive `start:end:step`
        #[arg(long = "alpha-range")]
        alpha_range: String,
        #[arg(long = "p-up", default_value_t = 0.5)]
        p_up: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long = "C")]
    c: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long = "p-up", default_value_t = 0.5)]
    p_up: f64,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    #[arg(long)]
    max_cycles: Option<usize>,
}

impl PointArgs {
    fn build(&self) -> spin_erasure::Result<(Config, Reservoir)> {
        let reservoir = Reservoir::from_alpha(self.alpha)?;
        let cycles = self
            .max_cycles
            .unwrap_or_else(|| default_max_cycles(self.c, reservoir.gamma(), self.tail_tol.max(f64::MIN_POSITIVE)));
        Ok((Config::new(self.c, self.p_up, cycles, self.tail_tol)?, reservoir))
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the output file
    #[arg(long)]
    gnuplot_script: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    Integral,
    Jensen,
    Universal,
}

#[derive(Debug)]
struct ParameterError(String);

impl std::fmt::Display for ParameterError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParameterError {}

fn parameter_error(msg: impl Into<String>) -> anyhow::Error {
    ParameterError(msg.into()).into()
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(value: &serde_json::Value, path: Option<&Path>) -> anyhow::Result<()> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `<out>.summary.json` next to a CSV output file.
fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}

fn check_plot_args(out: &OutputArgs) -> anyhow::Result<()> {
    if out.gnuplot_script.is_some() && (out.out.is_none() || out.format != Format::Csv) {
        return Err(parameter_error("--gnuplot-script needs --out with --format csv"));
    }
    Ok(())
}

fn cmd_dist(point: &PointArgs, bound: BoundKind, out: &OutputArgs) -> anyhow::Result<()> {
    check_plot_args(out)?;
    let (config, reservoir) = point.build()?;
    let dist = limit_distribution(&config, &reservoir)?;
    let gamma = reservoir.gamma();
    let bound_value = match bound {
        BoundKind::Integral => spinlabor_bound_integral(config.c(), config.p_up(), gamma),
        BoundKind::Jensen => spinlabor_bound_jensen_asymmetric(config.c(), config.p_up(), gamma),
        BoundKind::Universal => spinlabor_bound_universal(gamma),
    };
    let bound_name = bound.to_possible_value().expect("no skipped variants").get_name().to_owned();
    let summary = json!({
        "mean": dist.mean(),
        "variance": dist.variance(),
        "bound": bound_value,
        "bound_kind": bound_name,
    });
    match out.format {
        Format::Json => {
            let mut value = dist.to_json();
            value.as_object_mut().expect("distribution JSON is an object").extend(
                summary.as_object().expect("summary is an object").iter().map(|(k, v)| (k.clone(), v.clone())),
            );
            write_json(&value, out.out.as_deref())
        }
        Format::Csv => {
            let mut w = open_output(out.out.as_deref())?;
            dist.write_csv(&mut w)?;
            w.flush()?;
            if let Some(path) = &out.out {
                write_json(&summary, Some(&sidecar_path(path)))?;
            }
            if let (Some(script), Some(data)) = (&out.gnuplot_script, &out.out) {
                plot::write_distribution_script(script, data, dist.mean(), bound_value)?;
            }
            Ok(())
        }
    }
}

fn cmd_simulate(point: &PointArgs, shots: u64, seed: u64, shards: Option<usize>, out: &OutputArgs) -> anyhow::Result<()> {
    check_plot_args(out)?;
    let (config, reservoir) = point.build()?;
    let batch = match shards {
        Some(s) => simulate_batch_sharded(seed, shots, s, &config, &reservoir)?,
        None => simulate_batch(seed, shots, &config, &reservoir)?,
    };
    let summary = serde_json::to_value(batch.summary(&config, &reservoir))?;
    match out.format {
        Format::Json => {
            let mut value = summary;
            value["counts"] = json!(batch.counts());
            write_json(&value, out.out.as_deref())
        }
        Format::Csv => {
            let mut w = open_output(out.out.as_deref())?;
            batch.write_csv(&mut w)?;
            w.flush()?;
            if let Some(path) = &out.out {
                write_json(&summary, Some(&sidecar_path(path)))?;
            }
            if let (Some(script), Some(data)) = (&out.gnuplot_script, &out.out) {
                plot::write_histogram_script(script, data, shots)?;
            }
            Ok(())
        }
    }
}

fn write_reports(reports: &[Report], out: &OutputArgs) -> anyhow::Result<()> {
    match out.format {
        Format::Json => {
            let value = if reports.len() == 1 { serde_json::to_value(reports[0])? } else { serde_json::to_value(reports)? };
            write_json(&value, out.out.as_deref())
        }
        Format::Csv => {
            let mut w = open_output(out.out.as_deref())?;
            write_bounds_csv(reports, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_bounds(point: &PointArgs, out: &OutputArgs) -> anyhow::Result<()> {
    if out.gnuplot_script.is_some() {
        return Err(parameter_error("bounds writes a single row; use sweep for plots"));
    }
    point.build()?;
    write_reports(&[bounds_report(point.c, point.alpha, point.p_up)?], out)
}

fn cmd_table1() -> anyhow::Result<()> {
    let mut w = open_output(None)?;
    writeln!(w, "C,alpha,R")?;
    for (c, alpha) in [(0, 0.2), (1, 0.2), (0, 0.4), (1, 0.4)] {
        let r: f64 = r_diagnostic(c, alpha, 0.5)?;
        writeln!(w, "{c},{alpha},{r:.2}")?;
    }
    w.flush()?;
    Ok(())
}

fn parse_baseline(s: &str) -> anyhow::Result<ViolationBaseline<f64>> {
    Ok(match s {
        "symmetric" => ViolationBaseline::Symmetric,
        "landauer" => ViolationBaseline::Landauer,
        "asymmetric" => ViolationBaseline::Asymmetric,
        other => match other.parse::<f64>() {
            Ok(v) if v.is_finite() => ViolationBaseline::Value(v),
            _ => return Err(parameter_error(format!("unknown baseline {other:?}"))),
        },
    })
}

fn cmd_violation(point: &PointArgs, baseline: &str, step: f64, max: f64, out: &OutputArgs) -> anyhow::Result<()> {
    check_plot_args(out)?;
    let baseline = parse_baseline(baseline)?;
    if !(step > 0.0 && max >= 0.0) {
        return Err(parameter_error("epsilon step must be positive and epsilon max non-negative"));
    }
    let (config, reservoir) = point.build()?;
    let gamma = reservoir.gamma();
    let dist = limit_distribution(&config, &reservoir)?;
    let base = baseline.resolve(config.c(), config.p_up(), gamma);
    let curve = violation_curve(&dist, gamma, base, step, max)?;
    match out.format {
        Format::Json => {
            let points: Vec<_> = curve
                .iter()
                .map(|v| json!({"epsilon": v.epsilon, "pr_violation": v.probability, "exp_bound": v.bound}))
                .collect();
            write_json(&json!({"baseline": base, "points": points}), out.out.as_deref())
        }
        Format::Csv => {
            let mut w = open_output(out.out.as_deref())?;
            write_violation_csv(&curve, &mut w)?;
            w.flush()?;
            if let (Some(script), Some(data)) = (&out.gnuplot_script, &out.out) {
                plot::write_violation_script(script, data)?;
            }
            Ok(())
        }
    }
}

fn cmd_jarzynski(point: &PointArgs, n_bar: Option<usize>, out: &OutputArgs) -> anyhow::Result<()> {
    if out.gnuplot_script.is_some() {
        return Err(parameter_error("jarzynski writes a single row; no plot script"));
    }
    let (config, reservoir) = point.build()?;
    let gamma = reservoir.gamma();
    let dist = limit_distribution(&config, &reservoir)?;
    let n_bar = n_bar.unwrap_or(config.max_cycles());
    let lhs = jarzynski_lhs(&dist, gamma);
    let reference = jarzynski_a_prime(config.c(), config.p_up(), gamma);
    let exp_avg = exponential_average(&dist, gamma);
    let free = delta_free_spin(config.p_up(), gamma, n_bar).ok().map(|f| f.delta_f);
    match out.format {
        Format::Json => write_json(
            &json!({
                "C": config.c(),
                "alpha": reservoir.alpha(),
                "p_up": config.p_up(),
                "lhs": lhs,
                "reference": reference,
                "exponential_average": exp_avg,
                "delta_free_spin": free,
                "n_bar": n_bar,
            }),
            out.out.as_deref(),
        ),
        Format::Csv => {
            let mut w = open_output(out.out.as_deref())?;
            writeln!(w, "C,alpha,p_up,lhs,reference,exponential_average,delta_free_spin,n_bar")?;
            let free = free.map_or(String::new(), |f| f.to_string());
            writeln!(
                w,
                "{},{},{},{lhs},{reference},{exp_avg},{free},{n_bar}",
                config.c(),
                reservoir.alpha(),
                config.p_up()
            )?;
            w.flush()?;
            Ok(())
        }
    }
}

fn parse_c_range(s: &str) -> anyhow::Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    let parse = |p: &str| p.trim().parse::<usize>().map_err(|_| parameter_error(format!("bad C range {s:?}")));
    let (lo, hi) = match parts.as_slice() {
        [one] => (parse(one)?, parse(one)?),
        [lo, hi] => (parse(lo)?, parse(hi)?),
        _ => return Err(parameter_error(format!("C range must be start:end, got {s:?}"))),
    };
    if lo > hi {
        return Err(parameter_error(format!("empty C range {s:?}")));
    }
    Ok((lo..=hi).collect())
}

fn parse_alpha_range(s: &str) -> anyhow::Result<Vec<f64>> {
    let bad = || parameter_error(format!("alpha range must be start:end:step, got {s:?}"));
    let nums = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?;
    match nums.as_slice() {
        [a] => Ok(vec![*a]),
        [lo, hi, step] if *step > 0.0 && lo <= hi => {
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12).collect())
        }
        _ => Err(bad()),
    }
}

fn cmd_sweep(c_range: &str, alpha_range: &str, p_up: f64, out: &OutputArgs) -> anyhow::Result<()> {
    check_plot_args(out)?;
    let cs = parse_c_range(c_range)?;
    let alphas = parse_alpha_range(alpha_range)?;
    let grid: Vec<(usize, f64)> = cs.iter().flat_map(|&c| alphas.iter().map(move |&a| (c, a))).collect();
    let reports = grid
        .par_iter()
        .map(|&(c, a)| bounds_report(c, a, p_up))
        .collect::<spin_erasure::Result<Vec<_>>>()?;
    write_reports(&reports, out)?;
    if let (Some(script), Some(data)) = (&out.gnuplot_script, &out.out) {
        plot::write_sweep_script(script, data)?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Dist { point, bound, out } => cmd_dist(point, *bound, out),
        Command::Simulate { point, shots, seed, shards, out } => cmd_simulate(point, *shots, *seed, *shards, out),
        Command::Bounds { point, out } => cmd_bounds(point, out),
        Command::Table1 => cmd_table1(),
        Command::Violation { point, baseline, epsilon_step, epsilon_max, out } => {
            cmd_violation(point, baseline, *epsilon_step, *epsilon_max, out)
        }
        Command::Jarzynski { point, n_bar, out } => cmd_jarzynski(point, *n_bar, out),
        Command::Sweep { c_range, alpha_range, p_up, out } => cmd_sweep(c_range, alpha_range, *p_up, out),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<spin_erasure::Error>() {
        return match e {
            spin_erasure::Error::NonConvergence { .. } => EXIT_CONVERGENCE,
            _ => EXIT_PARAMETER,
        };
    }
    if err.is::<ParameterError>() {
        return EXIT_PARAMETER;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
