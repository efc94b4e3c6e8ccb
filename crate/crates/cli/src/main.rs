//! `taskverse`: train, evaluate and validate network-defense agents.
//!
//! Exit codes: 0 success, 1 invalid input or failed validation, 2 runtime
//! failure.

use anyhow::Context;
use clap::{Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use taskverse_core::harness::{cmd_evaluate, cmd_train, cmd_validate, HarnessError, RunConfig};
use taskverse_core::pddl::registry_markdown;
use taskverse_core::rng::{rng_for, tag};
use taskverse_core::universe::sample_task;

#[derive(Parser)]
#[command(name = "taskverse", version, about = "Open-ended network-defense training harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a defender; writes JSON-lines metrics and checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Train only this seed instead of the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the step budget.
        #[arg(long)]
        steps: Option<u64>,
        /// Output directory; metrics go to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write event traces of evaluation episodes (needs --out).
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate a checkpoint on held-out tasks; prints a JSON report.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// A task JSON object or array of tasks.
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run config supplying environment and catalog settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for per-episode event traces.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a goal-metric catalog or a run config.
    Validate { path: PathBuf },
    /// Print tasks sampled at a curriculum level as JSON lines.
    SampleTasks {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the fluent reference as markdown.
    Fluents,
    /// Print the default run config as JSON.
    DefaultConfig,
}

enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.exit_code() == 1 {
            Failure::Invalid(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn train(
    config: &Path,
    seed: Option<u64>,
    steps: Option<u64>,
    out: Option<PathBuf>,
    trace: bool,
) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = steps {
        cfg.steps = s;
    }
    if out.is_some() {
        cfg.output.dir = out;
    }
    cfg.output.trace |= trace;
    let seeds = seed.map_or_else(|| cfg.seeds.clone(), |s| vec![s]);
    for s in seeds {
        let summary = match &cfg.output.dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))
                    .map_err(runtime)?;
                let path = dir.join(format!("metrics_seed{s}.jsonl"));
                let file = File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))
                    .map_err(runtime)?;
                cmd_train(&cfg, s, &mut BufWriter::new(file))?
            }
            None => cmd_train(&cfg, s, &mut io::stdout().lock())?,
        };
        eprintln!(
            "seed {s}: {} iterations, {} steps, final level {}",
            summary.iterations, summary.steps, summary.level
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train {
            config,
            seed,
            steps,
            out,
            trace,
        } => train(&config, seed, steps, out, trace),
        Command::Evaluate {
            checkpoint,
            task,
            episodes,
            seed,
            config,
            trace,
        } => {
            let cfg = config.as_deref().map(RunConfig::load).transpose()?;
            let report = cmd_evaluate(&checkpoint, &task, episodes, seed, cfg.as_ref(), trace.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(runtime)?);
            Ok(())
        }
        Command::Validate { path } => {
            let report = cmd_validate(&path)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(runtime)?);
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Invalid(anyhow::anyhow!(
                    "{} failed validation",
                    path.display()
                )))
            }
        }
        Command::SampleTasks { config, level, n, seed } => {
            let cfg = RunConfig::load(&config)?;
            if level > cfg.universe.max_level {
                return Err(Failure::Invalid(anyhow::anyhow!(
                    "level {level} exceeds the maximum level {}",
                    cfg.universe.max_level
                )));
            }
            let catalog = cfg.load_catalog()?;
            let lc = cfg.universe.level(level);
            let mut rng = rng_for(seed, &[tag::TASK]);
            let mut out = io::stdout().lock();
            for _ in 0..n {
                let t = sample_task(&lc, &catalog, &mut rng);
                writeln!(out, "{}", serde_json::to_string(&t).map_err(runtime)?)?;
            }
            Ok(())
        }
        Command::Fluents => {
            print!("{}", registry_markdown());
            Ok(())
        }
        Command::DefaultConfig => {
            println!(
                "{}",
                serde_json::to_string_pretty(&RunConfig::default()).map_err(runtime)?
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
