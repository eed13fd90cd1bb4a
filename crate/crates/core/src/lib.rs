//! Optimum decision fusion in the presence of Byzantine nodes.
//!
//! A fusion center (FC) receives `m` binary reports from each of `n` nodes.
//! Some nodes are Byzantine and flip their local decision with probability
//! `P_mal`. This crate provides:
//!
//! * [`model`]: domain types and the generative pipeline (states, Byzantine
//!   placements, reports);
//! * [`fusion`]: the MAP fusion rules for each placement model plus the
//!   majority baseline;
//! * [`dp`]: the subset-sum dynamic program behind the fixed-count and
//!   bounded-count rules;
//! * [`game`]: Monte Carlo estimation of the FC-vs-Byzantines payoff matrix and
//!   a zero-sum game solver;
//! * [`oracle`]: exhaustive reference computations for tiny instances.

pub mod dp;
pub mod error;
pub mod fusion;
pub mod game;
pub mod logspace;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use fusion::{fuse, fuse_majority, Fuser, FusionAssumption, MatchCounts};
pub use game::{
    estimate_payoff_matrix, solve_mixed, Equilibrium, EquilibriumKind, ErrorMetric, Matrix,
    PayoffEstimate, PayoffMatrix, Scenario, StrategyGrid,
};
pub use model::{
    crossover_delta, ByzantineModel, ChannelParams, NodePlacement, ReportMatrix, StateSequence,
};
