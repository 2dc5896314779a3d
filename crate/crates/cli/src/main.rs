use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ergostab_cli::{parse_config, run_experiment, ConfigSources, Kind, RunError};

/// Run one ergostab experiment and write its CSV/JSON artifacts.
#[derive(Parser, Debug)]
#[command(name = "ergostab", version)]
struct Cli {
    kind: Kind,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a parameter, e.g. `--set optimizer.eta=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// `desk` (default) or `paper-protocol`.
    #[arg(long)]
    preset: Option<String>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

fn run(cli: Cli) -> Result<(), RunError> {
    let mut overrides = cli.set.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("master_seed={s}"));
    }
    if let Some(o) = &cli.out {
        overrides.push(format!("out_dir={}", serde_json::Value::String(o.display().to_string())));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("workers={w}"));
    }
    let config = parse_config(
        cli.kind,
        &ConfigSources {
            preset: cli.preset.as_deref(),
            file: cli.config.as_deref(),
            overrides: &overrides,
        },
    )?;
    if cli.dry_run {
        print!("{}", config.to_json());
        return Ok(());
    }
    let summary = run_experiment(&config)?;
    println!(
        "{} finished in {:.2}s; {} files in {}",
        config.kind,
        summary.duration_secs,
        summary.outputs.len() + 1,
        config.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
