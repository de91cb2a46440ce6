use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use orlicz_gn_cli::commands::{self, Command};
use orlicz_gn_cli::config::CampaignConfig;
use orlicz_gn_cli::{report, CliError};

/// Verification campaigns for weighted Hardy and Gagliardo–Nirenberg
/// inequalities in Orlicz spaces.
///
/// Exit status: 0 when every assertion holds, 1 when one fails or the
/// numerics break down, 2 for a bad config.
#[derive(Debug, Parser)]
#[command(name = "orlicz-gn", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML campaign config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Sampling seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Assertion slack (overrides the config).
    #[arg(long)]
    tol: Option<f64>,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => CampaignConfig::load(p)?,
        None => CampaignConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!(
                "--tol must be non-negative (got {t})"
            )));
        }
        cfg.tol = Some(t);
    }
    let cfg = cfg.canonical()?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reports"));

    let outcome = commands::run(cli.command, &cfg)?;
    for p in report::write(&outcome, &cfg, &dir)? {
        println!("wrote {}", p.display());
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    println!(
        "{}: {}",
        cli.command.name(),
        if outcome.passed() { "pass" } else { "FAIL" }
    );
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
