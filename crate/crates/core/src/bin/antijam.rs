//! Batch driver for the anti-jamming power allocation experiments.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use antijam_core::harness::{run_experiment, run_ne_analysis, write_outputs, ExperimentConfig, Scheme};
use antijam_core::Error;

#[derive(Debug, Parser)]
#[command(name = "antijam", version, about = "Two-cell NOMA anti-jamming power allocation experiments")]
struct Cli {
    /// key = value config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// QLU, DQLU, HBDQLU, QLS or NE-ANALYSIS.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    slots: Option<String>,
    /// Comma list of seeds or inclusive ranges, e.g. `1-10` or `1,4,9`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    grid_levels: Option<String>,
    /// `learning` or `best-response`.
    #[arg(long)]
    jammer_mode: Option<String>,
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e)
        } else {
            Failure::Runtime(e)
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(Failure::Config)?,
        None => ExperimentConfig::default(),
    };
    let overrides = [
        ("scheme", &cli.scheme),
        ("slots", &cli.slots),
        ("seeds", &cli.seeds),
        ("out_dir", &cli.out_dir),
        ("grid_levels", &cli.grid_levels),
        ("jammer_mode", &cli.jammer_mode),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v).map_err(|e| Failure::Config(Error::Config(format!("--{}: {e}", key.replace('_', "-")))))?;
        }
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    if cfg.scheme == Scheme::NeAnalysis {
        let (report, path) = run_ne_analysis(&cfg)?;
        let mood1 = report.seeds.iter().filter(|s| s.mood == 1).count();
        println!("analyzed {} realizations ({} in mood 1), report at {}", report.seeds.len(), mood1, path.display());
        let checked: Vec<_> = report.learned.iter().filter(|c| c.skipped.is_none()).collect();
        if !checked.is_empty() {
            let near = checked.iter().filter(|c| c.within_one_step).count();
            println!("learned runs within one grid step of an equilibrium: {near}/{}", checked.len());
        }
        return Ok(());
    }
    let out = run_experiment(&cfg)?;
    let csv = write_outputs(&out, &cfg.out_dir)?;
    let s = &out.summary;
    println!(
        "{}: {} seeds x {} slots, final-{} reward {:.4} ± {:.4}, objective {:.4} ± {:.4}, sum rate {:.4}",
        s.scheme,
        out.runs.len(),
        s.slots,
        s.window,
        s.final_reward.0,
        s.final_reward.1,
        s.final_objective.0,
        s.final_objective.1,
        s.final_sum_rate.0
    );
    println!("slot log at {}", csv.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
