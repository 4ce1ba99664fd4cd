//! Thin command-line front end; every subcommand is a library call.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use spiking_bam::config::{Condition, ExperimentConfig, NoTopdownMode};
use spiking_bam::engine::EngineParams;
use spiking_bam::experiment;
use spiking_bam::oracle;
use spiking_bam::plasticity::InhibitoryStdp;

#[derive(Parser)]
#[command(
    name = "spiking-bam",
    about = "Spiking bidirectional associative memory: run the two-phase learning and discrimination experiment and analyze its outputs",
    version
)]
struct Cli {
    /// TOML configuration file; omitted fields fall back to the defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Use the built-in glyph set (the default when no pattern file is given)
    #[arg(long, global = true)]
    builtin: bool,

    /// Glyph file: 20 blocks of `label:` plus ten rows of `#`/`.`
    #[arg(long, global = true, conflicts_with = "builtin")]
    patterns: Option<PathBuf>,

    /// Seed count N (uses seeds 1..=N) or an explicit comma-separated list
    #[arg(long, global = true)]
    seeds: Option<String>,

    /// Which condition(s) to simulate
    #[arg(long, global = true, value_enum)]
    condition: Option<ConditionArg>,

    /// Output directory for artifacts and reports
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Reading of the no-top-down condition
    #[arg(long = "no-topdown-mode", global = true, value_enum)]
    no_topdown_mode: Option<NoTopdownModeArg>,

    /// How the plasticity rule treats inhibitory weights
    #[arg(long = "inhibitory-stdp", global = true, value_enum)]
    inhibitory_stdp: Option<InhibitoryStdpArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Topdown,
    NoTopdown,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoTopdownModeArg {
    #[value(name = "disable_caap")]
    DisableCaap,
    #[value(name = "remove_feedback")]
    RemoveFeedback,
}

#[derive(Clone, Copy, ValueEnum)]
enum InhibitoryStdpArg {
    Magnitude,
    Signed,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment (every seed under every condition), write all
    /// artifacts, and produce the correlation reports
    Run,
    /// Run a single seed under a single condition and write its artifacts
    Simulate {
        /// Seed to simulate (defaults to the first configured seed)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute the reports from a stored run directory
    Analyze {
        /// The directory a previous `run` wrote (defaults to the configured
        /// output directory)
        dir: Option<PathBuf>,
    },
    /// Validate the effective configuration and exit
    ValidateConfig,
    /// Verify the engine against the full-history reference simulator on
    /// the hand-built microcircuits
    Oracle,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    if spec.contains(',') {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| format!("bad seed '{s}'")))
            .collect()
    } else {
        let n: u64 = spec
            .trim()
            .parse()
            .map_err(|_| format!("bad seed count '{spec}'"))?;
        if n == 0 {
            return Err("seed count must be positive".into());
        }
        Ok((1..=n).collect())
    }
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    if cli.builtin {
        cfg.experiment.patterns = "builtin".into();
    }
    if let Some(path) = &cli.patterns {
        cfg.experiment.patterns = path.display().to_string();
    }
    if let Some(spec) = &cli.seeds {
        cfg.experiment.seeds = parse_seeds(spec)?;
    }
    if let Some(c) = cli.condition {
        cfg.experiment.conditions = match c {
            ConditionArg::Topdown => vec![Condition::TopDown],
            ConditionArg::NoTopdown => vec![Condition::NoTopDown],
            ConditionArg::Both => vec![Condition::TopDown, Condition::NoTopDown],
        };
    }
    if let Some(dir) = &cli.out {
        cfg.experiment.out_dir = dir.display().to_string();
    }
    if let Some(mode) = cli.no_topdown_mode {
        cfg.no_topdown_mode = match mode {
            NoTopdownModeArg::DisableCaap => NoTopdownMode::DisableCaap,
            NoTopdownModeArg::RemoveFeedback => NoTopdownMode::RemoveFeedback,
        };
    }
    if let Some(mode) = cli.inhibitory_stdp {
        cfg.inhibitory_stdp = match mode {
            InhibitoryStdpArg::Magnitude => InhibitoryStdp::Magnitude,
            InhibitoryStdpArg::Signed => InhibitoryStdp::Signed,
        };
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), String> {
    match &cli.command {
        Command::Run => {
            let cfg = effective_config(cli)?;
            cfg.validate().map_err(|e| e.to_string())?;
            let started = Instant::now();
            let outcome = experiment::run_experiment_to_dir(&cfg).map_err(|e| e.to_string())?;
            println!(
                "completed {} runs in {:.1}s (mean associative rate {:.1} Hz)",
                outcome.records.len(),
                started.elapsed().as_secs_f64(),
                experiment::mean_rate_hz(&outcome.records)
            );
            print!("{}", outcome.report.summary());
            println!("artifacts: {}", outcome.out_dir.display());
            Ok(())
        }
        Command::Simulate { seed } => {
            let cfg = effective_config(cli)?;
            cfg.validate().map_err(|e| e.to_string())?;
            let seed = seed.unwrap_or(cfg.experiment.seeds[0]);
            let condition = cfg.experiment.conditions[0];
            let started = Instant::now();
            let dir =
                experiment::simulate_to_dir(&cfg, seed, condition).map_err(|e| e.to_string())?;
            println!(
                "simulated seed {seed} ({}) in {:.1}s -> {}",
                condition.label(),
                started.elapsed().as_secs_f64(),
                dir.display()
            );
            Ok(())
        }
        Command::Analyze { dir } => {
            let cfg = effective_config(cli)?;
            let dir = dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(&cfg.experiment.out_dir));
            let report = experiment::analyze_dir(&dir).map_err(|e| e.to_string())?;
            print!("{}", report.summary());
            Ok(())
        }
        Command::ValidateConfig => {
            let cfg = effective_config(cli)?;
            cfg.validate().map_err(|e| e.to_string())?;
            println!("config ok (hash {})", &cfg.hash()[..12]);
            Ok(())
        }
        Command::Oracle => {
            let cfg = effective_config(cli)?;
            cfg.validate().map_err(|e| e.to_string())?;
            let reports = oracle::verify_all(EngineParams::from(&cfg));
            let mut failed = false;
            for r in &reports {
                match &r.mismatch {
                    None => println!(
                        "[PASS] {}: {} steps, {} potentials compared, {} events",
                        r.name, r.steps, r.potentials_compared, r.engine_events
                    ),
                    Some(reason) => {
                        failed = true;
                        println!("[FAIL] {}: {reason}", r.name);
                    }
                }
            }
            if failed {
                Err("engine and reference simulator disagree".into())
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
