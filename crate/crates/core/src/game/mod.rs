//! The decision fusion game between the Byzantines (row player, maximizing
//! the FC's error probability) and the fusion center (column player,
//! minimizing it), played over quantized grids of flip probabilities.

mod estimate;
mod io;
mod lp;
mod solve;

pub use estimate::{estimate_payoff_matrix, row_seed, trial_rng, PayoffEstimate, Scenario};
pub use io::{format_sig, parse_payoff_csv};
pub use lp::{solve_by_support_enumeration, solve_lp, SUPPORT_ENUMERATION_LIMIT};
pub use solve::{
    best_response_values, classify_dominance, eliminate_dominated, find_dominant_row,
    find_pure_equilibria, find_pure_equilibria_within, find_weakly_dominant_row, solve_mixed,
    Dominance, Equilibrium, EquilibriumKind, Reduction,
};

use std::fmt;

use crate::error::{Error, Result};

/// Ascending set of flip probabilities available to one player.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGrid(Vec<f64>);

impl StrategyGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidGrid(format!(
                "values {values:?} must lie in [0, 1]"
            )));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "values {values:?} must be strictly ascending"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, value: f64) -> Option<usize> {
        self.0.iter().position(|v| (v - value).abs() < 1e-12)
    }
}

impl Default for StrategyGrid {
    /// `{0.5, 0.6, 0.7, 0.8, 0.9, 1.0}`.
    fn default() -> Self {
        Self(vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    }
}

/// Which error functional the payoff uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMetric {
    /// `(1/m) E[Hamming(decision, state)]`.
    #[default]
    PerComponent,
    /// `P(decision != state)`.
    PerSequence,
}

impl fmt::Display for ErrorMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMetric::PerComponent => "per-component",
            ErrorMetric::PerSequence => "per-sequence",
        })
    }
}

impl std::str::FromStr for ErrorMetric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "per-component" => Ok(ErrorMetric::PerComponent),
            "per-sequence" => Ok(ErrorMetric::PerSequence),
            other => Err(format!(
                "unknown metric `{other}` (expected per-component or per-sequence)"
            )),
        }
    }
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Keeps the listed rows and columns, in order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let data = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| self.get(r, c)))
            .collect();
        Self {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(idx) => Err(Error::NonFinite {
                row: idx / self.cols,
                col: idx % self.cols,
            }),
            None => Ok(()),
        }
    }

    /// `p^T A q`.
    pub fn bilinear(&self, p: &[f64], q: &[f64]) -> f64 {
        (0..self.rows)
            .map(|r| p[r] * (0..self.cols).map(|c| self.get(r, c) * q[c]).sum::<f64>())
            .sum()
    }
}

/// Estimated error probabilities: rows are Byzantine strategies, columns FC
/// strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    pub row_values: Vec<f64>,
    pub col_values: Vec<f64>,
    pub pe: Matrix,
    /// Standard error of each entry, when known.
    pub stderr: Option<Matrix>,
    pub trials: u64,
    pub seed: u64,
}

impl PayoffMatrix {
    /// Wraps a printed or hand-written matrix. If `trials` is nonzero, entry
    /// standard errors default to the binomial `sqrt(p(1-p)/trials)`.
    pub fn from_table(
        row_values: Vec<f64>,
        col_values: Vec<f64>,
        pe: Matrix,
        trials: u64,
    ) -> Result<Self> {
        if pe.rows() != row_values.len() || pe.cols() != col_values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} payoff for {}x{} grids",
                pe.rows(),
                pe.cols(),
                row_values.len(),
                col_values.len()
            )));
        }
        let stderr = (trials > 0).then(|| {
            let data = pe
                .data
                .iter()
                .map(|&p| (p * (1.0 - p) / trials as f64).max(0.0).sqrt())
                .collect();
            Matrix::new(pe.rows(), pe.cols(), data).expect("same shape")
        });
        Ok(Self {
            row_values,
            col_values,
            pe,
            stderr,
            trials,
            seed: 0,
        })
    }

    pub fn stderr_at(&self, r: usize, c: usize) -> f64 {
        self.stderr.as_ref().map_or(0.0, |s| s.get(r, c))
    }
}
