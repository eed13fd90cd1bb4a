//! Experiment configuration.
//!
//! A config file is flat TOML. Every key is optional; unknown keys are
//! rejected so that typos do not silently fall back to a default.
//!
//! | key            | default             | meaning                                        |
//! |----------------|---------------------|------------------------------------------------|
//! | `n`            | `20`                | number of nodes                                |
//! | `m`            | `4`                 | observation length                             |
//! | `eps`          | `0.1`               | local decision error probability               |
//! | `true_model`   | `"independent:0.3"` | placement prior the Byzantines are drawn from  |
//! | `fc_model`     | same as true_model  | placement prior the FC assumes                 |
//! | `grid_b`       | `[0.5, ..., 1.0]`   | Byzantine flip probabilities (rows)            |
//! | `grid_fc`      | `[0.5, ..., 1.0]`   | flip probabilities assumed by the FC (columns) |
//! | `trials`       | `50000`             | Monte Carlo trials per row                     |
//! | `seed`         | `1`                 | master seed                                    |
//! | `error_metric` | `"per-component"`   | or `"per-sequence"`                            |
//! | `noise_z`      | `3.0`               | noise margin, in standard errors               |
//! | `output_dir`   | `"out"`             | where result files go                          |
//! | `payoff_file`  | none                | payoff CSV to analyse instead of estimating    |
//!
//! Models are written `unconstrained`, `bounded`, `independent:<alpha>` or
//! `fixed:<count>`. A relative `payoff_file` is resolved against the config
//! file's directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use byzfuse::{ByzantineModel, ErrorMetric, Scenario, StrategyGrid};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: Option<usize>,
    m: Option<usize>,
    eps: Option<f64>,
    true_model: Option<String>,
    fc_model: Option<String>,
    grid_b: Option<Vec<f64>>,
    grid_fc: Option<Vec<f64>>,
    trials: Option<u64>,
    seed: Option<u64>,
    error_metric: Option<String>,
    noise_z: Option<f64>,
    output_dir: Option<PathBuf>,
    payoff_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub true_model: ByzantineModel,
    pub fc_model: ByzantineModel,
    pub grid_b: StrategyGrid,
    pub grid_fc: StrategyGrid,
    pub trials: u64,
    pub seed: u64,
    pub error_metric: ErrorMetric,
    pub noise_z: f64,
    pub output_dir: PathBuf,
    pub payoff_file: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let model = ByzantineModel::IndependentAlpha(0.3);
        Self {
            n: 20,
            m: 4,
            eps: 0.1,
            true_model: model,
            fc_model: model,
            grid_b: StrategyGrid::default(),
            grid_fc: StrategyGrid::default(),
            trials: 50_000,
            seed: 1,
            error_metric: ErrorMetric::PerComponent,
            noise_z: 3.0,
            output_dir: PathBuf::from("out"),
            payoff_file: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    /// Parses config text; `base` resolves a relative `payoff_file`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let mut cfg = Self::default();
        if let Some(n) = raw.n {
            cfg.n = n;
        }
        if let Some(m) = raw.m {
            cfg.m = m;
        }
        if let Some(eps) = raw.eps {
            cfg.eps = eps;
        }
        if let Some(s) = &raw.true_model {
            cfg.true_model = s.parse().map_err(bad)?;
        }
        cfg.fc_model = match &raw.fc_model {
            Some(s) => s.parse().map_err(bad)?,
            None => cfg.true_model,
        };
        if let Some(g) = raw.grid_b {
            cfg.grid_b = StrategyGrid::new(g).map_err(|e| bad(format!("grid_b: {e}")))?;
        }
        if let Some(g) = raw.grid_fc {
            cfg.grid_fc = StrategyGrid::new(g).map_err(|e| bad(format!("grid_fc: {e}")))?;
        }
        if let Some(t) = raw.trials {
            cfg.trials = t;
        }
        if let Some(s) = raw.seed {
            cfg.seed = s;
        }
        if let Some(s) = &raw.error_metric {
            cfg.error_metric = s.parse().map_err(bad)?;
        }
        if let Some(z) = raw.noise_z {
            cfg.noise_z = z;
        }
        if let Some(dir) = raw.output_dir {
            cfg.output_dir = dir;
        }
        cfg.payoff_file = raw.payoff_file.map(|p| match base {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        });
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario().validate().map_err(|e| bad(e.to_string()))?;
        if self.trials == 0 {
            return Err(bad("trials must be at least 1"));
        }
        if !(self.noise_z.is_finite() && self.noise_z >= 0.0) {
            return Err(bad(format!(
                "noise_z = {} must be a non-negative number",
                self.noise_z
            )));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            n: self.n,
            m: self.m,
            eps: self.eps,
            true_model: self.true_model,
            fc_model: self.fc_model,
        }
    }

    /// Every setting that influences results, one `key = value` per line.
    /// `output_dir` is left out so the same experiment hashes the same
    /// wherever it is written.
    pub fn canonical(&self) -> String {
        let grid = |g: &StrategyGrid| {
            g.values()
                .iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "m = {}", self.m);
        let _ = writeln!(out, "eps = {:?}", self.eps);
        let _ = writeln!(out, "true_model = \"{}\"", self.true_model);
        let _ = writeln!(out, "fc_model = \"{}\"", self.fc_model);
        let _ = writeln!(out, "grid_b = [{}]", grid(&self.grid_b));
        let _ = writeln!(out, "grid_fc = [{}]", grid(&self.grid_fc));
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "error_metric = \"{}\"", self.error_metric);
        let _ = writeln!(out, "noise_z = {:?}", self.noise_z);
        if let Some(p) = &self.payoff_file {
            let _ = writeln!(out, "payoff_file = {:?}", p.display().to_string());
        }
        out
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
