use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mcpfilt_cli::config::{ExperimentConfig, Overrides};
use mcpfilt_cli::run::{group_mcp_wins, run_experiment, run_static};
use mcpfilt_cli::tables::{gamma_sweep, prox_table};
use mcpfilt_core::experiment::{static_diag, Scenario};
use mcpfilt_core::TiePolicy;

#[derive(Parser)]
#[command(
    name = "mcpfilt",
    version,
    about = "Sparse adaptive filtering experiments with the minimax concave penalty"
)]
struct Cli {
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write CSV, JSON and SVG outputs.
    Run(RunArgs),
    /// Print the scalar prox map on a grid of inputs as CSV.
    ProxTable(ProxArgs),
    /// Repeat an experiment over several penalty levels.
    GammaSweep(SweepArgs),
    /// Evaluate the static-instance diagnostics for one seed and print JSON.
    Diag(DiagArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct ProxArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    alpha: f64,
    /// Largest input on the grid (default 3 * max(alpha, beta)).
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 61)]
    points: usize,
    /// Resolve exact ties on the hard threshold by keeping the input.
    #[arg(long)]
    keep_ties: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Comma-separated penalty levels.
    #[arg(long, value_delimiter = ',', required = true)]
    gammas: Vec<f64>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Instance seed (default: the configured seed).
    #[arg(long)]
    instance_seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n_factor: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    alpha_ratio: Option<f64>,
    #[arg(long)]
    gamma_position: Option<f64>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Run(a) => run(a),
        Command::ProxTable(a) => {
            let tie = if a.keep_ties {
                TiePolicy::Keep
            } else {
                TiePolicy::Zero
            };
            let r_max = a.r_max.unwrap_or(3.0 * a.alpha.max(a.beta));
            prox_table(io::stdout().lock(), a.beta, a.alpha, r_max, a.points, tie)
        }
        Command::GammaSweep(a) => {
            let cfg = ExperimentConfig::from_overrides(&a.overrides)?.resolve()?;
            match a.out {
                Some(p) => gamma_sweep(
                    File::create(&p).with_context(|| format!("creating {}", p.display()))?,
                    &cfg,
                    &a.gammas,
                ),
                None => gamma_sweep(io::stdout().lock(), &cfg, &a.gammas),
            }
        }
        Command::Diag(a) => diag(a),
    }
}

fn run(a: RunArgs) -> Result<()> {
    let exp = ExperimentConfig::from_overrides(&a.overrides)?;
    let cfg = exp.resolve()?;
    if a.dry_run {
        println!("{}", toml::to_string_pretty(&cfg)?);
        return Ok(());
    }
    let dir = exp.output_dir();
    let outcome = run_experiment(&cfg, &dir)?;
    let mut stdout = io::stdout().lock();
    writeln!(
        stdout,
        "{} trials of {} -> {}",
        cfg.trials,
        cfg.scenario,
        dir.display()
    )?;
    for a in &outcome.summaries {
        if a.steady_state.is_empty() {
            writeln!(
                stdout,
                "  {:<12} |mean| {:.4}  std {:.4}",
                a.algorithm.name(),
                a.pooled_abs_pred_mean,
                a.pooled_pred_std
            )?;
        } else {
            let windows: Vec<String> = a
                .steady_state
                .iter()
                .map(|w| format!("{} {:.2} dB", w.window, w.nmse_db))
                .collect();
            writeln!(stdout, "  {:<12} {}", a.algorithm.name(), windows.join(", "))?;
        }
    }
    if let Some((w, n)) = group_mcp_wins(&outcome.summaries) {
        writeln!(stdout, "  GROUP_MCP better in {w}/{n} trials")?;
    }
    if !outcome.static_reports.is_empty() {
        let holds = outcome.static_reports.iter().filter(|r| r.bound_holds).count();
        writeln!(
            stdout,
            "  bound holds on {holds}/{} instances",
            outcome.static_reports.len()
        )?;
    }
    Ok(())
}

fn diag(a: DiagArgs) -> Result<()> {
    let exp = ExperimentConfig::from_overrides(&a.overrides)?;
    let mut cfg = ExperimentConfig {
        scenario: Some(Scenario::StaticDiag),
        ..exp
    }
    .resolve()?;
    let sd = &mut cfg.static_diag;
    macro_rules! set {
        ($($f:ident),*) => {$( if let Some(v) = a.$f { sd.$f = v; } )*};
    }
    set!(m, n_factor, s, noise_std, alpha_ratio, gamma_position);
    if a.instance_seed.is_none() && cfg.trials > 1 && a.overrides.trials.is_some() {
        let reports = run_static(&cfg)?;
        println!("{}", serde_json::to_string_pretty(&reports)?);
        return Ok(());
    }
    let report = static_diag(&cfg.static_diag, a.instance_seed.unwrap_or(cfg.seed))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
