use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qotto_cli::{run, Options};

/// Quantum and classical Otto cycles in one-dimensional potentials.
#[derive(Parser, Debug)]
#[command(name = "qotto", version)]
struct Args {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV tables and the metadata sidecar.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Exit with status 3 instead of warning when an audit check fails.
    #[arg(long)]
    strict_audit: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let args = Args::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build_global() {
        log::error!("thread pool: {e}");
        return ExitCode::from(2);
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            log::error!("{}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let opts = Options {
        strict_audit: args.strict_audit,
    };
    match run(&text, &args.out, opts) {
        Ok(outcome) => {
            for f in &outcome.files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
