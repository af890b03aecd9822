use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use jumpsynth::config::{load_config, Overrides};
use jumpsynth::run::run;
use jumpsynth::Strategy;

#[derive(Parser)]
#[command(
    name = "jumpsynth",
    version,
    about = "Wasserstein-optimal switching for jump linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a synthesis strategy on a config and write CSV/JSON artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        /// Total number of steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Prediction horizon T in steps.
        #[arg(long)]
        horizon: Option<usize>,
        /// Sampling interval used for areas.
        #[arg(long)]
        dk: Option<f64>,
        /// Relative stability margin.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            strategy,
            steps,
            horizon,
            dk,
            gamma,
            out_dir,
        } => {
            let result = load_config(&config).and_then(|mut cfg| {
                cfg.apply_overrides(&Overrides {
                    strategy,
                    total_steps: steps,
                    horizon,
                    dk,
                    gamma,
                })?;
                info!(
                    "loaded {} ({} modes, n = {})",
                    config.display(),
                    cfg.system.mode_count(),
                    cfg.system.dim()
                );
                run(&cfg, &out_dir)
            });
            match result {
                Ok((out, files)) => {
                    let s = &out.summary;
                    println!(
                        "{}: area {:.6} (best constant mode {} area {:.6}, ratio {:.4}), ms-stable: {}",
                        s.strategy,
                        out.report.area(),
                        s.best_constant_mode,
                        s.best_constant_area.0,
                        s.area_ratio.0,
                        out.verdict.stable
                    );
                    println!(
                        "wrote {} and {}",
                        files.trajectory_csv.display(),
                        files.summary_json.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error [{}]: {e}", e.module());
                    ExitCode::FAILURE
                }
            }
        }
    }
}
