use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use binrec::cli::{configure_threads, load_config, run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Synthesize,
    Recover,
    Sweep,
    Compare,
    OracleCheck,
}

/// Recover binary signals and images from blurred, noisy data.
#[derive(Debug, Parser)]
#[command(name = "binrec", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Path to a `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = configure_threads().and_then(|_| {
        let mut cfg = load_config(&args.config)?;
        cfg.command = match args.command {
            Cmd::Synthesize => Command::Synthesize,
            Cmd::Recover => Command::Recover,
            Cmd::Sweep => Command::Sweep,
            Cmd::Compare => Command::Compare,
            Cmd::OracleCheck => Command::OracleCheck,
        };
        if let Some(out) = args.out {
            cfg.out_dir = out;
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        run(&cfg)
    });
    match result {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("binrec: one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("binrec: {e}");
            ExitCode::from(2)
        }
    }
}
