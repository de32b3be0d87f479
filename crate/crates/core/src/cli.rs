//! Command-line frontend. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code: 0 on success, 2 when a closure run hit
//! its iteration cap, 3 on invalid flags or any other error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::ann::{ModelFile, Network};
use crate::config::ExperimentConfig;
use crate::dut::{DutKind, DutSpec, StimulusVector};
use crate::engine::{
    collect_training_data, compare_experiment, run_failure_directed, run_ml_from, run_random_bughunt,
    run_random_to_closure, BinOrder, GoalEncoding, Method, MlStart, NetworkOverrides,
};
use crate::error::{Error, Result};
use crate::reporting::{
    format_table, read_report_json, report_curves, write_convergence_svg, write_report_json, write_run_log,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

const DEFAULT_POOL: usize = 256;

const DEFAULTS: &str = "\
Defaults:
  train transactions      min(4 x bins, 2000)
  iteration cap           5000
  goal                    1.0
  retrain interval        64
  per-bin model attempts  3
  bin order               lowest
  goal encoding           decomposed
  hidden layers           [max(8, ceil((bins + input bits) / 2))]
  learning rate           0.5
  epochs                  300
  init seed               derived from --seed
  candidate pool          256
  coverage model          comparator: a, b, a x b; alu: op, a, b, op x a";

#[derive(Debug, Parser)]
#[command(name = "dvml", version, about = "Coverage closure with random and network-generated stimuli", after_help = DEFAULTS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one closure regression until the coverage goal or the cap
    Close(CloseArgs),
    /// Random versus network closure over widths and seeds
    Compare(CompareArgs),
    /// Failure-directed stimulus against a same-budget random baseline
    Bughunt(BughuntArgs),
    /// Regenerate the table or chart from a stored report
    Report(ReportArgs),
}

/// Settings shared by every run command. Flags override `--config`.
#[derive(Debug, Args)]
struct EngineFlags {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Iteration cap on the test phase
    #[arg(long)]
    cap: Option<usize>,
    /// Coverage fraction that counts as closure
    #[arg(long)]
    goal: Option<f64>,
    /// Random transactions in the training phase
    #[arg(long)]
    train_transactions: Option<usize>,
    /// Test iterations between retrainings
    #[arg(long)]
    retrain_interval: Option<usize>,
    /// Model attempts per target bin before random fallback
    #[arg(long)]
    attempts: Option<usize>,
    /// Target bin selection: lowest or random
    #[arg(long, value_parser = parse_bin_order)]
    bin_order: Option<BinOrder>,
    /// Goal encoding: direct or decomposed
    #[arg(long, value_parser = parse_goal_encoding)]
    goal_encoding: Option<GoalEncoding>,
    /// Hidden layer sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Weight initialisation seed
    #[arg(long)]
    init_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct CloseArgs {
    /// comparator or alu
    #[arg(long)]
    dut: Option<DutKind>,
    #[arg(long)]
    width: Option<u32>,
    /// random or ann
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV run log
    #[arg(long)]
    log: Option<PathBuf>,
    /// Write the trained network here
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// Use this network instead of training one
    #[arg(long)]
    load_model: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    dut: Option<DutKind>,
    /// Comma-separated widths
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<u32>>,
    /// Seeds per width
    #[arg(long)]
    seeds: Option<usize>,
    /// Base seed of the per-run seeds
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convergence chart path
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Debug, Args)]
struct BughuntArgs {
    #[arg(long)]
    dut: Option<DutKind>,
    #[arg(long)]
    width: Option<u32>,
    /// Test iterations for each method
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random candidates scored per iteration
    #[arg(long)]
    pool: Option<usize>,
    /// CSV log of the failure-directed run
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// JSON report written by `compare`
    #[arg(long = "in")]
    input: PathBuf,
    /// Print the comparison table
    #[arg(long)]
    table: bool,
    /// Convergence chart path
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn parse_bin_order(s: &str) -> std::result::Result<BinOrder, String> {
    match s {
        "lowest" => Ok(BinOrder::Lowest),
        "random" => Ok(BinOrder::Random),
        _ => Err(format!("expected `lowest` or `random`, got `{s}`")),
    }
}

fn parse_goal_encoding(s: &str) -> std::result::Result<GoalEncoding, String> {
    match s {
        "direct" => Ok(GoalEncoding::Direct),
        "decomposed" => Ok(GoalEncoding::Decomposed),
        _ => Err(format!("expected `direct` or `decomposed`, got `{s}`")),
    }
}

impl EngineFlags {
    fn layered(&self, flags: ExperimentConfig) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let network = NetworkOverrides {
            hidden_layers: self.hidden.clone(),
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            init_seed: self.init_seed,
        };
        let top = ExperimentConfig {
            cap: self.cap,
            goal: self.goal,
            train_transactions: self.train_transactions,
            retrain_interval: self.retrain_interval,
            per_bin_model_attempts: self.attempts,
            bin_order: self.bin_order,
            goal_encoding: self.goal_encoding,
            network: (network != NetworkOverrides::default()).then_some(network),
            ..flags
        };
        Ok(base.overlay(top))
    }
}

fn format_stimulus(spec: &DutSpec, s: &StimulusVector) -> String {
    spec.inputs
        .iter()
        .zip(&s.0)
        .map(|(p, v)| format!("{}={}", p.name, v))
        .collect::<Vec<_>>()
        .join(" ")
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn cmd_close(args: CloseArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.engine.layered(ExperimentConfig {
        dut: args.dut,
        width: args.width,
        method: args.method,
        seed: args.seed,
        log: args.log,
        save_model: args.save_model,
        load_model: args.load_model,
        ..Default::default()
    })?;
    let method = cfg.method()?;
    cfg.seed()?;
    let tb = cfg.testbench()?;
    let engine = cfg.engine()?;
    if method == Method::Random && (cfg.save_model.is_some() || cfg.load_model.is_some()) {
        return Err(Error::Config("--save-model and --load-model need --method ann".into()));
    }

    let result = match method {
        Method::Random => run_random_to_closure(&tb, &engine)?,
        Method::Ann => {
            if engine.train_transactions_for(tb.bins()) == 0 {
                return Err(Error::Config(
                    "the training phase needs at least one transaction".into(),
                ));
            }
            let network: Option<Network> = match &cfg.load_model {
                Some(path) => Some(ModelFile::load(path)?),
                None => None,
            };
            let data = collect_training_data(&tb, &engine)?;
            run_ml_from(&tb, &engine, MlStart { data, network })?
        }
    };

    if let Some(path) = &cfg.log {
        write_run_log(&result.records, path)?;
    }
    if let (Some(path), Some(net)) = (&cfg.save_model, &result.network) {
        ModelFile::save(net, path)?;
    }

    let covered = result.bin_hits.iter().filter(|&&h| h > 0).count();
    writeln!(
        out,
        "dut: {} width: {} method: {} seed: {}",
        cfg.dut()?,
        cfg.width()?,
        method.as_str(),
        engine.base_seed
    )
    .map_err(io_out)?;
    writeln!(out, "test iterations: {}", result.test_iterations).map_err(io_out)?;
    writeln!(out, "total iterations: {}", result.total_iterations).map_err(io_out)?;
    writeln!(
        out,
        "coverage: {:.6} ({covered}/{} bins)",
        result.final_coverage,
        result.bin_hits.len()
    )
    .map_err(io_out)?;
    if result.converged {
        writeln!(out, "status: CONVERGED").map_err(io_out)?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "status: NOT-CONVERGED (cap {})", engine.iteration_cap).map_err(io_out)?;
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_compare(args: CompareArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.engine.layered(ExperimentConfig {
        dut: args.dut,
        widths: args.widths,
        seeds: args.seeds,
        seed: args.seed,
        out: args.out,
        svg: args.svg,
        ..Default::default()
    })?;
    let path = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("missing required setting `out`".into()))?;
    let spec = cfg.experiment()?;
    let report = compare_experiment(&spec)?;
    write_report_json(&report, &path)?;
    if let Some(svg) = &cfg.svg {
        let (curves, labels) = report_curves(&report);
        write_convergence_svg(&curves, &labels, svg)?;
    }
    write!(out, "{}", format_table(&report)).map_err(io_out)?;
    Ok(EXIT_OK)
}

fn cmd_bughunt(args: BughuntArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.engine.layered(ExperimentConfig {
        dut: args.dut,
        width: args.width,
        iterations: args.iterations,
        seed: args.seed,
        pool: args.pool,
        log: args.log,
        ..Default::default()
    })?;
    let iterations = cfg
        .iterations
        .ok_or_else(|| Error::Config("missing required setting `iterations`".into()))?;
    if iterations == 0 {
        return Err(Error::Config("`iterations` must be positive".into()));
    }
    let pool = cfg.pool.unwrap_or(DEFAULT_POOL);
    if pool == 0 {
        return Err(Error::Config("`pool` must be positive".into()));
    }
    cfg.seed()?;
    let tb = cfg.testbench()?;
    let engine = cfg.engine()?;

    let directed = run_failure_directed(&tb, &engine, iterations, pool)?;
    let random = run_random_bughunt(&tb, &engine, iterations)?;
    if let Some(path) = &cfg.log {
        write_run_log(&directed.records, path)?;
    }

    let ratio = if random.failures_found == 0 {
        if directed.failures_found == 0 {
            "n/a".to_string()
        } else {
            "inf".to_string()
        }
    } else {
        format!("{:.3}", directed.failures_found as f64 / random.failures_found as f64)
    };
    writeln!(out, "failure-directed failures: {}", directed.failures_found).map_err(io_out)?;
    writeln!(out, "random failures: {}", random.failures_found).map_err(io_out)?;
    writeln!(out, "ratio: {ratio}").map_err(io_out)?;
    for s in &directed.failing_stimuli {
        writeln!(out, "FAIL {}", format_stimulus(tb.dut.spec(), s)).map_err(io_out)?;
    }
    Ok(EXIT_OK)
}

fn cmd_report(args: ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let report = read_report_json(&args.input)?;
    if let Some(svg) = &args.svg {
        let (curves, labels) = report_curves(&report);
        write_convergence_svg(&curves, &labels, svg)?;
    }
    if args.table || args.svg.is_none() {
        write!(out, "{}", format_table(&report)).map_err(io_out)?;
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Close(a) => cmd_close(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Bughunt(a) => cmd_bughunt(a, out),
        Command::Report(a) => cmd_report(a, out),
    }
}

/// Runs the program on `args` (including the program name). Results go to
/// `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("dvml").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_exits_zero_and_lists_defaults() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("iteration cap           5000"));
        let (code, out, _) = run_args(&["close", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("--method"));
    }

    #[test]
    fn usage_errors_exit_three() {
        assert_eq!(run_args(&[]).0, 3);
        assert_eq!(run_args(&["frobnicate"]).0, 3);
        let (code, _, err) = run_args(&[
            "close",
            "--dut",
            "comparator",
            "--width",
            "0",
            "--method",
            "random",
            "--seed",
            "1",
        ]);
        assert_eq!(code, 3);
        assert!(!err.is_empty());
        assert_eq!(
            run_args(&["close", "--dut", "comparator", "--width", "2", "--seed", "1"]).0,
            3
        );
        assert_eq!(
            run_args(&["close", "--dut", "widget", "--width", "2", "--method", "random", "--seed", "1"]).0,
            3
        );
        assert_eq!(
            run_args(&[
                "close",
                "--dut",
                "comparator",
                "--width",
                "2",
                "--method",
                "random",
                "--seed",
                "1",
                "--bin-order",
                "up"
            ])
            .0,
            3
        );
    }

    #[test]
    fn close_random_small() {
        let (code, out, _) = run_args(&[
            "close",
            "--dut",
            "comparator",
            "--width",
            "1",
            "--method",
            "random",
            "--seed",
            "4",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("status: CONVERGED"));
    }

    #[test]
    fn stimulus_formatting() {
        let dut = DutKind::Alu.build(4).unwrap();
        assert_eq!(
            format_stimulus(dut.spec(), &StimulusVector(vec![1, 3, 3])),
            "op=1 a=3 b=3"
        );
    }
}
