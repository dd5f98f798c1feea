// SPDX-License-Identifier: Apache-2.0

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use dipgp::Error;
use serde_json::json;
use sha2::{Digest, Sha256};

use commands::{Context, Report};
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "dipgp",
    version,
    about = "Dipolar Gross-Pitaevskii numerical lab"
)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run interactions that are only conditionally stable.
    #[arg(long, global = true)]
    allow_conditional: bool,
    /// Print the full default configuration and exit.
    #[arg(long, global = true)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Angular cancellation, small-|k|R constant scan, multiplier agreement.
    KernelCheck,
    /// Integrate one GP trajectory.
    GpRun,
    /// N-sweep of the scaled equation and rate fit.
    Converge,
    /// Exact versus Bogoliubov excitation dynamics on a torus mode basis.
    Fock,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::KernelCheck => "kernel-check",
            Command::GpRun => "gp-run",
            Command::Converge => "converge",
            Command::Fock => "fock",
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NumericalAccuracy { .. } => 2,
        Error::Divergence { .. } => 3,
        Error::Usage(_) | Error::Validation(_) | Error::Io(_) | Error::Format(_) => 1,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("dipgp: {e}");
    ExitCode::from(exit_code(e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if cli.print_defaults {
        print!("{}", RunConfig::defaults_toml());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        return fail(&Error::Validation(
            "a subcommand is required (kernel-check, gp-run, converge, fock)".into(),
        ));
    };
    match run(&cli, command) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}

fn run(cli: &Cli, command: Command) -> dipgp::Result<ExitCode> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", p.display())))?,
        None => RunConfig::defaults_toml(),
    };
    let (cfg, table) = RunConfig::parse(&text, &config::config_dir(cli.config.as_ref()))?;
    cfg.validate()?;
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Error::Validation("--threads must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out)?;

    let canonical = serde_json::to_string(&cfg).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    if let Some(t) = &table {
        hasher.update(t.as_bytes());
    }
    let hash = format!("{:x}", hasher.finalize());

    let ctx = Context {
        config: &cfg,
        table: table.as_deref(),
        out: &cli.out,
        allow_conditional: cli.allow_conditional,
    };
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let Report { summary, failure } = match command {
        Command::KernelCheck => commands::kernel_check(&ctx)?,
        Command::GpRun => commands::gp_run(&ctx)?,
        Command::Converge => commands::converge(&ctx)?,
        Command::Fock => commands::fock(&ctx)?,
    };
    let status = match &failure {
        None => json!("ok"),
        Some(e) => json!(e.to_string()),
    };
    let doc = json!({
        "command": command.name(),
        "status": status,
        "result": summary,
        "config": cfg,
        "provenance": {
            "config_sha256": hash,
            "version": env!("CARGO_PKG_VERSION"),
            "started_unix": started,
            "elapsed_seconds": clock.elapsed().as_secs_f64(),
            "threads": rayon::current_num_threads(),
        },
    });
    let path = cli.out.join("summary.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&doc).expect("summary serializes") + "\n",
    )?;
    println!(
        "{}: {} (summary in {})",
        command.name(),
        if failure.is_none() { "ok" } else { "failed" },
        path.display()
    );
    Ok(match failure {
        None => ExitCode::SUCCESS,
        Some(e) => fail(&e),
    })
}
