use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsp::commands;
use qsp::{CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qsp", version, about = "Two-stage stochastic unit commitment with qGAN-QAOA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the uncertainty, bin it and write the test set.
    GenData(Common),
    /// Train the scenario generator on the binned data.
    TrainQgan(Common),
    /// Optimize every (lambda, seed) pair and write run records.
    Run(Common),
    /// RP, EEV and per-commitment expected costs.
    Baselines(Common),
    /// Gate-count and depth sweeps.
    Resources(Common),
    /// Summarize a records file.
    Report {
        #[command(flatten)]
        common: Common,
        /// Records file; defaults to the one in the output directory.
        records: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated imbalance costs.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Random initializations per imbalance cost.
    #[arg(long)]
    seeds: Option<u64>,
    /// Evaluate expectations exactly.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    /// Estimate expectations from this many shots.
    #[arg(long)]
    shots: Option<u64>,
    /// Full protocol: 18 imbalance costs, 40 seeds, sampled estimators.
    #[arg(long)]
    paper: bool,
}

impl Common {
    fn config(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if self.paper {
            cfg = cfg.paper_scale();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(l) = &self.lambdas {
            cfg.sweep.lambdas = l.clone();
        }
        if let Some(s) = self.seeds {
            cfg.qaoa.seeds = s;
        }
        let shots = if self.exact { Some(0) } else { self.shots };
        if let Some(n) = shots {
            cfg.qaoa.shots = n;
            cfg.qgan.shots = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenData(c) => {
            let files = commands::gen_data(&c.config()?)?;
            println!("wrote {} files", files.len());
        }
        Command::TrainQgan(c) => {
            let g = commands::train_qgan(&c.config()?)?;
            println!("best epoch {}: train 1-JS {:.5}, test 1-JS {:.5}", g.best_epoch, g.train_score, g.test_score);
        }
        Command::Run(c) => {
            let records = commands::run(&c.config()?)?;
            for r in &records {
                println!("lambda {:>6} seed {:>3}: {} cost {:.1} (RP {:.1})", r.lambda, r.seed, r.map, r.expected_cost, r.rp);
            }
        }
        Command::Baselines(c) => {
            for r in commands::baselines(&c.config()?)? {
                println!(
                    "lambda {:>6}: RP {:.1} at {}, EEV {:.1} at {}",
                    r.lambda, r.rp_value, r.rp_solution, r.eev_value, r.ev_solution
                );
            }
        }
        Command::Resources(c) => {
            let path = commands::resources(&c.config()?)?;
            println!("wrote {}", path.display());
        }
        Command::Report { common, records } => {
            let cfg = common.config()?;
            let path = records.unwrap_or_else(|| commands::records_path(&cfg));
            println!("{:>8} {:>5} {:>12} {:>12} {:>12} {:>12} {:>12}", "lambda", "runs", "mean", "min", "max", "RP", "EEV");
            for r in commands::report(&path)? {
                println!(
                    "{:>8} {:>5} {:>12.1} {:>12.1} {:>12.1} {:>12.1} {:>12.1}",
                    r.lambda, r.runs, r.mean, r.min, r.max, r.rp, r.eev
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
