//! `finsler-hmx`: batch verification harness for the h-Matsumoto change.
//!
//! Exit codes: 0 — every gating check passed; 1 — at least one check failed;
//! 2 — configuration or domain error.

mod config;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use hmx_core::error::HmxError;

#[derive(Parser)]
#[command(
    name = "finsler-hmx",
    about = "Finsler tensor computations and identity verification for the h-Matsumoto change",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Base-space tensor frame and its structural identity suite
    Frame(CommonArgs),
    /// Transformed tensors: closed forms vs direct differentiation
    Transform(CommonArgs),
    /// Full transformed-tensor identity suite (scalars, contractions, probes)
    VerifyCore(CommonArgs),
    /// Identity chain on exact-condition algebraic fixtures
    VerifyChain(CommonArgs),
    /// Hypersurface frames, fundamentals, classification and barred relations
    Hypersurface(CommonArgs),
    /// Least-squares existence probe for the full h-vector condition
    SearchHvector(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Run configuration (TOML)
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<std::path::PathBuf>,
    /// Report format
    #[arg(long, value_parser = ["machine", "human"])]
    format: Option<String>,
    /// Replace every seed in the configuration
    #[arg(long)]
    seed_override: Option<u64>,
    /// List the known check ids and exit
    #[arg(long)]
    list_checks: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Frame(a) => ("frame", a),
        Command::Transform(a) => ("transform", a),
        Command::VerifyCore(a) => ("verify-core", a),
        Command::VerifyChain(a) => ("verify-chain", a),
        Command::Hypersurface(a) => ("hypersurface", a),
        Command::SearchHvector(a) => ("search-hvector", a),
    };
    match execute(name, args) {
        Ok(pass) => {
            if pass {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("finsler-hmx: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(name: &str, args: &CommonArgs) -> Result<bool, HmxError> {
    if args.list_checks {
        print!("{}", run::list_checks());
        return Ok(true);
    }
    let config_path = args
        .config
        .as_ref()
        .ok_or_else(|| HmxError::config("--config <path> is required"))?;
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| HmxError::config(format!("cannot read {}: {e}", config_path.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(seed) = args.seed_override {
        cfg.override_seed(seed);
    }
    let report = run::run(name, &cfg)?;

    let format = args
        .format
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.format.clone()))
        .unwrap_or_else(|| "human".to_string());
    let rendered = match format.as_str() {
        "machine" => report.to_machine()?,
        "human" => report.to_human()?,
        other => return Err(HmxError::config(format!("unknown format '{other}'"))),
    };
    let path = args.output.clone().or_else(|| {
        cfg.output
            .as_ref()
            .and_then(|o| o.path.clone().map(Into::into))
    });
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::write(&p, rendered)
                .map_err(|e| HmxError::Report(format!("cannot write {}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdout()
                .write_all(rendered.as_bytes())
                .map_err(|e| HmxError::Report(e.to_string()))?;
        }
    }
    Ok(report.overall_pass())
}
