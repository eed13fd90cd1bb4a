use std::path::PathBuf;
use std::process::ExitCode;

use byzfuse::game::format_sig;
use byzfuse::ErrorMetric;
use byzfuse_cli::{
    run_compare, run_equilibrium, run_oracle_check, run_payoff, CliError, ExperimentConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "byzfuse",
    version,
    about = "Decision fusion against Byzantine nodes: payoff tables and equilibria"
)]
struct Cli {
    /// Worker threads for Monte Carlo estimation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the payoff matrix.
    Payoff(Common),
    /// Dominance, saddle points and the mixed equilibrium of the payoff matrix.
    Equilibrium(Common),
    /// Majority vote versus the optimum rule at equilibrium.
    Compare(Common),
    /// Check the fusion rule and the estimates against exhaustive enumeration.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per row.
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// per-component or per-sequence.
    #[arg(long)]
    metric: Option<ErrorMetric>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(metric) = self.metric {
            cfg.error_metric = metric;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Payoff(args) => {
            let cfg = args.config()?;
            let payoff = run_payoff(&cfg)?;
            print!("{}", payoff.matrix.to_csv());
            eprintln!("wrote payoff files to {}", cfg.output_dir.display());
        }
        Command::Equilibrium(args) => {
            let cfg = args.config()?;
            let an = run_equilibrium(&cfg)?;
            println!(
                "{} equilibrium, value {}",
                if an.equilibrium.is_pure() {
                    "pure"
                } else {
                    "mixed"
                },
                format_sig(an.equilibrium.value, 6)
            );
            eprintln!("wrote {}", cfg.output_dir.join("equilibrium.md").display());
        }
        Command::Compare(args) => {
            let cfg = args.config()?;
            let cmp = run_compare(&cfg)?;
            println!(
                "Maj {}  OPT {}",
                format_sig(cmp.majority, 4),
                format_sig(cmp.optimum, 4)
            );
            eprintln!("wrote {}", cfg.output_dir.join("compare.md").display());
        }
        Command::OracleCheck(args) => {
            let cfg = args.config()?;
            let check = run_oracle_check(&cfg)?;
            println!(
                "{} decisions checked, {} mismatches, {} Monte Carlo outliers",
                check.decisions_checked,
                check.decision_mismatches.len(),
                check.outliers.len()
            );
            for (pmal_fc, code) in check.decision_mismatches.iter().take(20) {
                println!("  mismatch: P_mal^FC = {pmal_fc}, report code {code}");
            }
            if !check.passed() {
                return Err(CliError::Runtime("oracle check failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
