//! Config-driven experiments on top of `byzfuse`: payoff estimation,
//! equilibrium analysis, scheme comparison and oracle checks, each writing
//! CSV/markdown files into an output directory.

pub mod config;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{
    analyze_equilibrium, obtain_payoff, run_compare, run_equilibrium, run_oracle_check, run_payoff,
    Comparison, EquilibriumAnalysis, OracleCheck, Payoff,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 1 for bad configuration or usage, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<byzfuse::Error> for CliError {
    fn from(e: byzfuse::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
