use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rf_harness::runner::{run_eval, run_train};
use rf_harness::{preset, shipped_configs, ExperimentConfig, HarnessError};
use rf_qcore::NoiseModel;

/// Replay-buffer engineering toolkit for quantum circuit optimization.
#[derive(Parser)]
#[command(name = "rf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one experiment config over all of its seeds.
    Train(TrainArgs),
    /// Evaluate a finished run directory with its saved checkpoint.
    Eval(EvalArgs),
    /// Run the noiseless-to-noisy buffer-transfer protocol.
    Transfer(TransferArgs),
    /// Aggregate several run directories into a side-by-side table.
    Compare(CompareArgs),
    /// Emit plot-ready CSV/JSON for run directories.
    Report(ReportArgs),
    /// List the shipped presets.
    Presets,
}

#[derive(Args)]
struct ConfigArgs {
    /// Preset name (see `rf presets`) or path to a TOML config file.
    #[arg(long)]
    config: String,
    /// Seed count `N` (runs seeds 1..=N) or explicit list `1,2,7`.
    #[arg(long)]
    seeds: Option<String>,
    /// Use the workstation-scale variant of the preset.
    #[arg(long)]
    desk_scale: bool,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replay strategy override: uniform, her, per, reaper, reaper_plus.
    #[arg(long)]
    strategy: Option<String>,
    /// Depolarizing strengths, e.g. `p1=0.001,p2=0.005`.
    #[arg(long)]
    noise: Option<String>,
    /// Episode-count override.
    #[arg(long)]
    episodes: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Warm-start every seed's buffer from this file (transfer semantics).
    #[arg(long)]
    buffer_in: Option<PathBuf>,
    /// Write the final buffer here (single-seed runs only).
    #[arg(long)]
    buffer_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Run directory containing config.snapshot and net.ckpt.
    #[arg(long)]
    run: PathBuf,
    /// Number of evaluation targets / episodes.
    #[arg(long, default_value_t = 1000)]
    targets: usize,
    /// Comma-separated fidelity tolerances (compiling runs).
    #[arg(long)]
    tolerances: Option<String>,
    #[arg(long, default_value_t = 12345)]
    seed: u64,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Source buffer file; trains a fresh source agent when absent.
    #[arg(long)]
    source: Option<PathBuf>,
    /// Report output path (defaults to `<output_dir>/transfer_report.json`).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Run directories to aggregate.
    dirs: Vec<PathBuf>,
    /// Also write the aggregate table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories to summarize.
    #[arg(long, required = true, num_args = 1..)]
    runs: Vec<PathBuf>,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, HarnessError> {
    if spec.contains(',') {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|e| HarnessError::config(format!("bad seed '{s}': {e}"))))
            .collect()
    } else {
        let n: u64 = spec.parse().map_err(|e| HarnessError::config(format!("bad seed count: {e}")))?;
        if n == 0 {
            return Err(HarnessError::config("seed count must be positive"));
        }
        Ok((1..=n).collect())
    }
}

fn parse_noise(spec: &str) -> Result<NoiseModel, HarnessError> {
    let mut p1 = None;
    let mut p2 = None;
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| HarnessError::config(format!("bad noise component '{part}'")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|e| HarnessError::config(format!("bad noise value '{value}': {e}")))?;
        match key.trim() {
            "p1" => p1 = Some(v),
            "p2" => p2 = Some(v),
            other => return Err(HarnessError::config(format!("unknown noise key '{other}'"))),
        }
    }
    Ok(NoiseModel { p1: p1.unwrap_or(0.0), p2: p2.unwrap_or(0.0) })
}

fn resolve_config(args: &ConfigArgs) -> Result<ExperimentConfig, HarnessError> {
    let base = if args.config.ends_with(".toml") || std::path::Path::new(&args.config).exists() {
        ExperimentConfig::load(std::path::Path::new(&args.config))?
    } else {
        preset(&args.config, args.desk_scale)?
    };
    // re-parse through TOML so RF_OVERRIDE_* variables apply uniformly
    let overrides = ExperimentConfig::env_overrides();
    let mut cfg = ExperimentConfig::from_toml_with_overrides(&base.to_toml(), &overrides)?;
    if let Some(seeds) = &args.seeds {
        cfg.seeds = parse_seeds(seeds)?;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.display().to_string();
    }
    if let Some(strategy) = &args.strategy {
        rf_replay::Strategy::parse(strategy)
            .ok_or_else(|| HarnessError::config(format!("unknown strategy '{strategy}'")))?;
        cfg.replay.strategy = strategy.clone();
    }
    if let Some(noise) = &args.noise {
        let n = parse_noise(noise)?;
        cfg.env.p1 = Some(n.p1);
        cfg.env.p2 = Some(n.p2);
    }
    if let Some(episodes) = args.episodes {
        cfg.episodes = episodes;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train(args) => {
            let cfg = resolve_config(&args.common)?;
            let runs = run_train(&cfg, args.buffer_in.as_deref(), args.buffer_out.as_deref())?;
            for r in &runs {
                let last = r.result.metrics.last();
                println!(
                    "seed {} -> {} ({} episodes, {} steps, {} successes{})",
                    r.seed,
                    r.run_dir.display(),
                    r.result.episodes_run,
                    r.result.total_steps,
                    r.result.successes,
                    last.map(|m| format!(", final metric {:.6}", m.task_metric)).unwrap_or_default(),
                );
            }
            Ok(())
        }
        Command::Eval(args) => {
            let tolerances: Vec<f64> = match &args.tolerances {
                None => Vec::new(),
                Some(t) => t
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| HarnessError::config(format!("bad tolerance '{s}': {e}")))
                    })
                    .collect::<Result<_, _>>()?,
            };
            let text = run_eval(&args.run, args.targets, &tolerances, args.seed)?;
            print!("{text}");
            Ok(())
        }
        Command::Transfer(args) => {
            let cfg = resolve_config(&args.common)?;
            let noise = args.common.noise.as_deref().map(parse_noise).transpose()?;
            let (report, path) = rf_harness::transfer_cmd::run_transfer_cmd(
                &cfg,
                args.source.as_deref(),
                noise,
                args.report.as_deref(),
            )?;
            println!(
                "transfer score {:.4} (matched {:.4}); steps: transfer {:.0} vs baseline {:.0}; report: {}",
                report.score,
                report.score_matched,
                report.transfer.median_steps_to_threshold,
                report.baseline.median_steps_to_threshold,
                path.display()
            );
            Ok(())
        }
        Command::Compare(args) => {
            if args.dirs.is_empty() {
                return Err(HarnessError::config("compare needs at least one run directory"));
            }
            let table = rf_harness::compare::compare(&args.dirs)?;
            print!("{table}");
            if let Some(out) = &args.out {
                std::fs::write(out, rf_harness::compare::compare_csv(&args.dirs)?)?;
            }
            Ok(())
        }
        Command::Report(args) => {
            let written = rf_harness::report::report(&args.runs, &args.out)?;
            for w in written {
                println!("wrote {}", w.display());
            }
            Ok(())
        }
        Command::Presets => {
            for p in shipped_configs() {
                println!("{p}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
