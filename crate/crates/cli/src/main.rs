use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lincon_es::experiment::{resolve_out_dir, run_diagnostics, Flags, OUT_DIR_ENV};
use lincon_es::{exit, parse_config, run_experiment, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "lincon-es", version, about = "(1,lambda)-ES on a linearly constrained linear function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment and write trace, report and plots
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides $LINCON_ES_OUT and the config
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plots: bool,
    },
    /// Validate a config without running anything
    Check { config: PathBuf },
    /// Print the condition diagnostics table
    Diagnose {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(exit::CONFIG)
    })?;
    parse_config(&text).map_err(|errors| {
        eprintln!("error: invalid config {}", path.display());
        for e in &errors.0 {
            eprintln!("  {e}");
        }
        ExitCode::from(exit::CONFIG)
    })
}

fn report_flags(flags: &Flags) {
    for line in flags.describe() {
        eprintln!("flag: {line}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { config } => match load(&config) {
            Ok(_) => {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, seed, out, no_plots } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let env = std::env::var(OUT_DIR_ENV).ok();
            let out_dir = resolve_out_dir(out.as_deref(), env.as_deref(), &cfg);
            let options = RunOptions { seed, out_dir: Some(out_dir), plots: !no_plots };
            match run_experiment(&cfg, &options) {
                Ok(outcome) => {
                    let r = &outcome.report.report;
                    println!(
                        "divergence rate {:.6} [{:.6}, {:.6}]; stationarity residual {:.3e} [{:.3e}, {:.3e}]",
                        r.divergence_rate.value,
                        r.divergence_rate.lower,
                        r.divergence_rate.upper,
                        r.stationarity_residual.value,
                        r.stationarity_residual.lower,
                        r.stationarity_residual.upper,
                    );
                    println!("wrote {}", outcome.directory.display());
                    if let Some(f) = &outcome.report.flags {
                        report_flags(f);
                    }
                    ExitCode::from(outcome.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::Diagnose { config, seed } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            let table = match run_diagnostics(&cfg) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code());
                }
            };
            println!(
                "{:>8} {:>12} {:>6} {:>14} {:>6} {:>12} {:>10}",
                "delta", "E|g|", "flag", "E exp(g)", "flag", "E[g(M*)]", "SE"
            );
            for row in &table.rows {
                println!(
                    "{:>8} {:>12.6} {:>6} {:>14.6e} {:>6} {:>12.6} {:>10.2e}",
                    row.delta,
                    row.abs_g.estimate,
                    if row.abs_g.divergent { "yes" } else { "no" },
                    row.exp_g.estimate,
                    if row.exp_g.divergent { "yes" } else { "no" },
                    row.selected_g.value,
                    row.selected_g.std_error,
                );
            }
            match (table.analytic_limit, table.limit_z) {
                (Some(l), Some(z)) => println!("analytic limit {l:.6}, z = {z:.2}"),
                _ => println!("no analytic limit for this law"),
            }
            let flags = Flags::from_table(&table);
            report_flags(&flags);
            ExitCode::from(if flags.any() { exit::CONDITION_FLAG } else { exit::SUCCESS })
        }
    }
}
