//! Command-line front end.

use std::path::PathBuf;

use asymsens::{MechanismKind, DEFAULT_BETA};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Result;
use crate::experiment::{run_experiment, Dataset, ExperimentSpec, Task};
use crate::ingest;
use crate::report::{write_output, Format};
use crate::simulate::{simulate_asymmetry, write_rows_csv, SimulationConfig};
use crate::stats;

#[derive(Debug, Parser)]
#[command(name = "dp-bench", version, about = "Private estimation error benchmarks for ASM and ISM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Population variance of a single numeric column.
    Variance(TaskArgs),
    /// Summed binary cross-entropy from columns y, p (logit).
    Bce(TaskArgs),
    /// Summed softmax cross-entropy from columns y, p0..p{C-1}.
    Ce(TaskArgs),
    /// Mean squared error from columns y, p.
    Mse(TaskArgs),
    /// Mean absolute error from columns y, p.
    Mae(TaskArgs),
    /// Error ratio of ISM to ASM on random bounds against their asymmetry.
    SimulateAsymmetry(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

/// `A,B` or `unbounded`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeArg(pub Option<(f64, f64)>);

fn parse_range(s: &str) -> std::result::Result<RangeArg, String> {
    if s.eq_ignore_ascii_case("unbounded") {
        return Ok(RangeArg(None));
    }
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B or unbounded, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad lower end {a:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad upper end {b:?}"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("range needs finite A < B, got {s:?}"));
    }
    Ok(RangeArg(Some((a, b))))
}

fn parse_mechanism(s: &str) -> std::result::Result<MechanismKind, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "asm" => Ok(MechanismKind::Asm),
        "ism" => Ok(MechanismKind::Ism),
        other => Err(format!("unknown mechanism {other:?} (expected asm or ism)")),
    }
}

#[derive(Debug, Args)]
pub struct TaskArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1,2")]
    pub epsilons: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1000)]
    pub sample_size: usize,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    /// Data range (variance) or model output range (other tasks).
    #[arg(long, value_parser = parse_range, default_value = "unbounded", allow_hyphen_values = true)]
    pub range: RangeArg,
    /// Defaults to asm,ism with a range and asm without one.
    #[arg(long, value_delimiter = ',', value_parser = parse_mechanism)]
    pub mechanisms: Vec<MechanismKind>,
    /// Bounds past this distance are relaxed to their trivial values.
    #[arg(long, default_value_t = 100)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the extension of --out, else csv.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Run without noise. The output is NOT private.
    #[arg(long)]
    pub zero_noise: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 500)]
    pub rows: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub epsilons: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const ZERO_NOISE_WARNING: &str =
    "WARNING: --zero-noise disables all noise; these estimates are NOT differentially private";

fn run_task(task: Task, args: TaskArgs) -> Result<()> {
    let dataset = match task {
        Task::Variance => Dataset::Values(ingest::read_values(&args.input)?),
        Task::Ce => Dataset::Model(ingest::read_predictions(&args.input, true)?),
        _ => Dataset::Model(ingest::read_predictions(&args.input, false)?),
    };
    let mechanisms = if args.mechanisms.is_empty() {
        ExperimentSpec::default_mechanisms(args.range.0)
    } else {
        let mut m = args.mechanisms;
        m.dedup();
        m
    };
    let spec = ExperimentSpec {
        task,
        epsilons: args.epsilons,
        trials: args.trials,
        sample_size: args.sample_size,
        beta: args.beta,
        range: args.range.0,
        cutoff: args.cutoff,
        seed: args.seed,
        mechanisms,
        zero_noise: args.zero_noise,
    };
    if spec.zero_noise {
        eprintln!("{ZERO_NOISE_WARNING}");
    }
    let report = run_experiment(&spec, &dataset)?;
    let format = match args.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => args.out.as_deref().map(Format::from_path).unwrap_or_default(),
    };
    let mut bytes = Vec::new();
    report.write(&mut bytes, format)?;
    write_output(args.out.as_deref(), &bytes)
}

fn run_simulation(args: SimulateArgs) -> Result<()> {
    let config = SimulationConfig::new(args.rows, args.epsilons, args.seed);
    let rows = simulate_asymmetry(&config)?;
    let asym: Vec<f64> = rows.iter().map(|r| r.asymmetry).collect();
    let ratio: Vec<f64> = rows.iter().map(|r| r.error_ratio).collect();
    eprintln!("spearman(asymmetry, ism/asm error) = {:.4}", stats::spearman(&asym, &ratio));
    let mut bytes = Vec::new();
    write_rows_csv(&rows, &mut bytes)?;
    write_output(args.out.as_deref(), &bytes)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Variance(a) => run_task(Task::Variance, a),
        Command::Bce(a) => run_task(Task::Bce, a),
        Command::Ce(a) => run_task(Task::Ce, a),
        Command::Mse(a) => run_task(Task::Mse, a),
        Command::Mae(a) => run_task(Task::Mae, a),
        Command::SimulateAsymmetry(a) => run_simulation(a),
    }
}
