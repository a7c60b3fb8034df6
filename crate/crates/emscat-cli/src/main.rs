//! Command-line entry point. Exit codes: 0 success, 1 config/validation
//! error, 2 numerical failure.

mod config;
mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

/// Thread-count override; integer >= 1.
const THREADS_ENV: &str = "EMSCAT_THREADS";

#[derive(Parser)]
#[command(name = "emscat", about = "Small-body electromagnetic scattering runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write its report
    Run {
        #[arg(long)]
        config: PathBuf,
        /// output directory (default: alongside the config)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// override the seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// worker threads (also via EMSCAT_THREADS)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config without running it
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match config::load(&config) {
            Ok(_) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run { config, out, format, seed, threads } => {
            let mut cfg = match config::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(s) = seed {
                cfg.numerics.seed = s;
            }
            let threads = threads.or_else(|| {
                std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok())
            });
            if let Some(n) = threads {
                if n < 1 {
                    eprintln!("error: thread count must be >= 1");
                    return ExitCode::from(1);
                }
                // ignore failure if a global pool already exists
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            let out_dir = out.unwrap_or_else(|| {
                config.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
            });
            if let Err(e) = std::fs::create_dir_all(&out_dir) {
                eprintln!("error: cannot create {}: {e}", out_dir.display());
                return ExitCode::from(2);
            }
            let start = Instant::now();
            let report = match scenarios::run(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = report.write_json(&out_dir.join("report.json")) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if format == Format::Csv {
                if let Err(e) = report.write_csv(&out_dir) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            // timing is deliberately kept out of report.json so reruns
            // with the same config and seed are byte-identical
            let meta = serde_json::json!({
                "elapsed_seconds": start.elapsed().as_secs_f64(),
                "unix_timestamp": SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            });
            if let Err(e) = std::fs::write(
                out_dir.join("meta.json"),
                serde_json::to_string_pretty(&meta).unwrap() + "\n",
            ) {
                eprintln!("error: cannot write meta.json: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
    }
}
