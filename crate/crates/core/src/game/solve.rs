//! Dominance, saddle points and mixed equilibria of a payoff matrix.
//!
//! Rows maximize, columns minimize. Functions taking a bare [`Matrix`]
//! compare entries exactly; the `_within`/`classify_` variants take a
//! [`PayoffMatrix`] and widen every comparison by `z` combined standard
//! errors, since estimated entries are noisy.

use super::lp::{solve_by_support_enumeration, solve_lp, SUPPORT_ENUMERATION_LIMIT};
use super::{Matrix, PayoffMatrix};
use crate::error::{Error, Result};

/// Row `r` with `a[r][c] > a[r'][c]` for every other row and every column.
pub fn find_dominant_row(a: &Matrix) -> Option<usize> {
    (0..a.rows()).find(|&r| {
        (0..a.rows())
            .filter(|&o| o != r)
            .all(|o| (0..a.cols()).all(|c| a.get(r, c) > a.get(o, c)))
    })
}

/// Lowest row that is a best response (`>=`) in every column.
pub fn find_weakly_dominant_row(a: &Matrix) -> Option<usize> {
    (0..a.rows())
        .find(|&r| (0..a.rows()).all(|o| (0..a.cols()).all(|c| a.get(r, c) >= a.get(o, c))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// Beats every other row in every column by more than the noise margin.
    Strict(usize),
    /// Best response in every column once noise is allowed for, but the
    /// separation is not established.
    WithinNoise(usize),
    None,
}

fn combined(pm: &PayoffMatrix, a: (usize, usize), b: (usize, usize)) -> f64 {
    let (sa, sb) = (pm.stderr_at(a.0, a.1), pm.stderr_at(b.0, b.1));
    (sa * sa + sb * sb).sqrt()
}

/// Noise-aware dominance test for the row player with a `z`-sigma margin.
pub fn classify_dominance(pm: &PayoffMatrix, z: f64) -> Dominance {
    let a = &pm.pe;
    let others = |r: usize| (0..a.rows()).filter(move |&o| o != r);
    for r in 0..a.rows() {
        let strict = others(r).all(|o| {
            (0..a.cols()).all(|c| a.get(r, c) - a.get(o, c) > z * combined(pm, (r, c), (o, c)))
        });
        if strict {
            return Dominance::Strict(r);
        }
    }
    let candidates: Vec<usize> = (0..a.rows())
        .filter(|&r| {
            others(r).all(|o| {
                (0..a.cols()).all(|c| a.get(r, c) >= a.get(o, c) - z * combined(pm, (r, c), (o, c)))
            })
        })
        .collect();
    match candidates.as_slice() {
        [r] => Dominance::WithinNoise(*r),
        _ => Dominance::None,
    }
}

/// All saddle points: the entry is a column maximum and a row minimum.
pub fn find_pure_equilibria(a: &Matrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let v = a.get(r, c);
            let col_max = (0..a.rows()).all(|o| v >= a.get(o, c));
            let row_min = (0..a.cols()).all(|o| v <= a.get(r, o));
            if col_max && row_min {
                out.push((r, c));
            }
        }
    }
    out
}

/// Saddle points up to a `z`-sigma margin on every unilateral deviation.
pub fn find_pure_equilibria_within(pm: &PayoffMatrix, z: f64) -> Vec<(usize, usize)> {
    let a = &pm.pe;
    let mut out = Vec::new();
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let v = a.get(r, c);
            let col_max =
                (0..a.rows()).all(|o| v >= a.get(o, c) - z * combined(pm, (r, c), (o, c)));
            let row_min =
                (0..a.cols()).all(|o| v <= a.get(r, o) + z * combined(pm, (r, c), (r, o)));
            if col_max && row_min {
                out.push((r, c));
            }
        }
    }
    out
}

/// A game reduced by iterated strict dominance, with maps back to the
/// original row and column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub matrix: Matrix,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Iteratively removes strictly dominated rows (maximizer) and columns
/// (minimizer) until nothing changes.
pub fn eliminate_dominated(a: &Matrix) -> Reduction {
    let mut rows: Vec<usize> = (0..a.rows()).collect();
    let mut cols: Vec<usize> = (0..a.cols()).collect();
    loop {
        let row_dominated = rows.iter().position(|&r| {
            rows.iter()
                .any(|&o| o != r && cols.iter().all(|&c| a.get(o, c) > a.get(r, c)))
        });
        if let Some(i) = row_dominated {
            rows.remove(i);
            continue;
        }
        let col_dominated = cols.iter().position(|&c| {
            cols.iter()
                .any(|&o| o != c && rows.iter().all(|&r| a.get(r, o) < a.get(r, c)))
        });
        if let Some(i) = col_dominated {
            cols.remove(i);
            continue;
        }
        break;
    }
    Reduction {
        matrix: a.submatrix(&rows, &cols),
        rows,
        cols,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumKind {
    Pure { row: usize, col: usize },
    Mixed { p: Vec<f64>, q: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    /// Expected payoff at the equilibrium.
    pub value: f64,
    pub dominant_row: Option<usize>,
}

impl Equilibrium {
    pub fn row_strategy(&self, rows: usize) -> Vec<f64> {
        match &self.kind {
            EquilibriumKind::Pure { row, .. } => one_hot(rows, *row),
            EquilibriumKind::Mixed { p, .. } => p.clone(),
        }
    }

    pub fn col_strategy(&self, cols: usize) -> Vec<f64> {
        match &self.kind {
            EquilibriumKind::Pure { col, .. } => one_hot(cols, *col),
            EquilibriumKind::Mixed { q, .. } => q.clone(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.kind, EquilibriumKind::Pure { .. })
    }
}

fn one_hot(len: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[at] = 1.0;
    v
}

/// `(max_r (A q)_r, min_c (p^T A)_c)`: the best payoff the row player can get
/// against `q` and the best the column player can hold `p` to.
pub fn best_response_values(a: &Matrix, p: &[f64], q: &[f64]) -> (f64, f64) {
    let row_best = (0..a.rows())
        .map(|r| (0..a.cols()).map(|c| a.get(r, c) * q[c]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let col_best = (0..a.cols())
        .map(|c| (0..a.rows()).map(|r| p[r] * a.get(r, c)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (row_best, col_best)
}

/// Solves the zero-sum game. A saddle point, when one exists, is returned as
/// a pure equilibrium with its exact entry as value; otherwise the LP
/// solution is returned, cross-checked by support enumeration on small games
/// when its duality gap exceeds `tol`.
pub fn solve_mixed(a: &Matrix, tol: f64) -> Result<Equilibrium> {
    a.check_finite()?;
    let dominant_row = find_dominant_row(a);
    if let Some(&(row, col)) = find_pure_equilibria(a).first() {
        return Ok(Equilibrium {
            kind: EquilibriumKind::Pure { row, col },
            value: a.get(row, col),
            dominant_row,
        });
    }
    let (mut p, mut q, _) = solve_lp(a)?;
    let (hi, lo) = best_response_values(a, &p, &q);
    if hi - lo > tol {
        if a.rows() > SUPPORT_ENUMERATION_LIMIT || a.cols() > SUPPORT_ENUMERATION_LIMIT {
            return Err(Error::Solver(format!(
                "duality gap {} exceeds {tol}",
                hi - lo
            )));
        }
        (p, q, _) = solve_by_support_enumeration(a, tol)?;
    }
    let value = a.bilinear(&p, &q);
    Ok(Equilibrium {
        kind: EquilibriumKind::Mixed { p, q },
        value,
        dominant_row,
    })
}
