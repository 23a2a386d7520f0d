use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cmdqn::envs::EnvConfig;
use cmdqn::runner::{execute, ExperimentKind, Report, RunConfig};

/// Reproduce the confirmation-bias experiments.
#[derive(Debug, Parser)]
#[command(name = "cmdqn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-armed bandit learning-rate grid (heatmap of mean reward).
    BanditGrid(Common),
    /// Train confirmatory, disconfirmatory and unbiased agents side by side.
    BiasCompare(Common),
    /// Sweep the bias constraint K for one bias type.
    KAblation(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; unspecified keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Comma-separated seed list, e.g. `0,1,2`.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for independent jobs (0 = all cores, 1 = serial).
    #[arg(long, value_name = "N")]
    parallel: Option<usize>,
    /// Master seed every random stream is derived from.
    #[arg(long, value_name = "N")]
    master_seed: Option<u64>,
    /// Write every environment step as JSON Lines under traces/.
    #[arg(long)]
    trace: bool,
    /// Apply the biased update as a descent step followed by a separate ascent step.
    #[arg(long)]
    two_phase_updates: bool,
    /// Full-size budgets: 1024 bandit trials per cell, LanderLite for agent runs.
    #[arg(long)]
    full_scale: bool,
}

fn build_config(kind: ExperimentKind, args: &Common) -> cmdqn::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = RunConfig::load(path, Some(kind))?;
            if cfg.experiment != kind {
                return Err(cmdqn::Error::Config(format!(
                    "{} names experiment {:?}, but the subcommand is {:?}",
                    path.display(),
                    cfg.experiment.label(),
                    kind.label()
                )));
            }
            cfg
        }
        None => RunConfig::defaults(kind, EnvConfig::lineworld()),
    };
    if args.full_scale {
        cfg.full_scale();
    }
    if let Some(seeds) = &args.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(n) = args.parallel {
        cfg.parallel = n;
    }
    if let Some(m) = args.master_seed {
        cfg.master_seed = m;
    }
    cfg.trace |= args.trace;
    cfg.agent.two_phase_updates |= args.two_phase_updates;
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(report: &Report) {
    match report {
        Report::BanditGrid(r) => {
            let h = &r.heatmap;
            println!(
                "{}x{} cells, {} trials per cell, {} seed(s)",
                h.alpha_c_axis.len(),
                h.alpha_d_axis.len(),
                h.trials_per_cell,
                h.seeds
            );
            println!(
                "mean reward per step, alpha_C > alpha_D: {:.5}",
                h.confirmatory_region_mean()
            );
            println!(
                "mean reward per step, alpha_C < alpha_D: {:.5}",
                h.disconfirmatory_region_mean()
            );
            println!(
                "Spearman(alpha_C + alpha_D, reward):     {:.4}",
                h.rate_sum_spearman()
            );
        }
        Report::BiasComparison(r) => {
            println!(
                "{:<16} {:>6} {:>12} {:>10} {:>10} {:>12}",
                "bias", "seeds", "final mean", "min", "max", "all-episode"
            );
            for s in &r.summary {
                println!(
                    "{:<16} {:>6} {:>12.4} {:>10.4} {:>10.4} {:>12.4}",
                    s.bias.label(),
                    s.seeds,
                    s.final_window_mean,
                    s.final_window_min,
                    s.final_window_max,
                    s.all_episode_mean
                );
            }
        }
        Report::KAblation(r) => {
            println!(
                "{:<10} {:>6} {:>12} {:>12}",
                "K", "seeds", "all-episode", "final mean"
            );
            for row in &r.rows {
                println!(
                    "{:<10} {:>6} {:>12.4} {:>12.4}",
                    row.label, row.seeds, row.all_episode_mean, row.final_window_mean
                );
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::BanditGrid(a) => (ExperimentKind::BanditGrid, a),
        Command::BiasCompare(a) => (ExperimentKind::BiasCompare, a),
        Command::KAblation(a) => (ExperimentKind::KAblation, a),
    };
    let result = build_config(kind, args).and_then(|cfg| {
        let (report, manifest) = execute(&cfg)?;
        print_report(&report);
        println!(
            "wrote {} files to {}",
            manifest.files.len() + 1,
            cfg.output_dir.display()
        );
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
