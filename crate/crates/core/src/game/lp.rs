//! Mixed-strategy solvers for finite zero-sum games.
//!
//! The row player maximizes `p^T A q`, the column player minimizes it. The
//! primary route is the classic LP reduction: shift `A` so every entry is at
//! least one, then
//!
//! ```text
//! maximize 1^T y   subject to   A y <= 1,  y >= 0
//! ```
//!
//! gives `q = y / 1^T y` and value `1 / 1^T y` (minus the shift); the optimal
//! dual `x` read off the final tableau gives `p`. The tableau uses Bland's rule
//! so degenerate pivots cannot cycle.
//!
//! [`solve_by_support_enumeration`] is an independent check for small games.

use super::Matrix;
use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;

/// Largest dimension accepted by [`solve_by_support_enumeration`].
pub const SUPPORT_ENUMERATION_LIMIT: usize = 10;

/// Maximin row strategy, minimax column strategy and the game value.
pub fn solve_lp(a: &Matrix) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    a.check_finite()?;
    let (rows, cols) = (a.rows(), a.cols());
    if rows == 0 || cols == 0 {
        return Err(Error::Solver("empty payoff matrix".into()));
    }
    let min = (0..rows)
        .flat_map(|r| a.row(r).iter().copied())
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    // Columns: y_0..y_{cols-1}, slack_0..slack_{rows-1}, rhs.
    let width = cols + rows + 1;
    let mut tab = vec![0.0; (rows + 1) * width];
    for r in 0..rows {
        for c in 0..cols {
            tab[r * width + c] = a.get(r, c) + shift;
        }
        tab[r * width + cols + r] = 1.0;
        tab[r * width + width - 1] = 1.0;
    }
    let obj = rows * width;
    for c in 0..cols {
        tab[obj + c] = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let max_pivots = 50 * (rows + cols) * (rows + cols);
    for _ in 0..max_pivots {
        let Some(enter) = (0..cols + rows).find(|&j| tab[obj + j] < -PIVOT_EPS) else {
            let total = tab[obj + width - 1];
            if total <= 0.0 {
                return Err(Error::Solver("degenerate LP optimum".into()));
            }
            let value = 1.0 / total;
            let mut q = vec![0.0; cols];
            for (r, &var) in basis.iter().enumerate() {
                if var < cols {
                    q[var] = tab[r * width + width - 1] * value;
                }
            }
            let p: Vec<f64> = (0..rows)
                .map(|r| tab[obj + cols + r].max(0.0) * value)
                .collect();
            return Ok((normalize(p), normalize(q), value - shift));
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let coef = tab[r * width + enter];
            if coef > PIVOT_EPS {
                let ratio = tab[r * width + width - 1] / coef;
                let replace = match leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best - PIVOT_EPS
                            || ((ratio - best).abs() <= PIVOT_EPS && basis[r] < basis[lr])
                    }
                };
                if replace {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leave else {
            return Err(Error::Solver("unbounded LP".into()));
        };
        pivot(&mut tab, width, rows + 1, pivot_row, enter);
        basis[pivot_row] = enter;
    }
    Err(Error::Solver("simplex iteration limit reached".into()))
}

fn pivot(tab: &mut [f64], width: usize, height: usize, row: usize, col: usize) {
    let inv = 1.0 / tab[row * width + col];
    for j in 0..width {
        tab[row * width + j] *= inv;
    }
    for r in 0..height {
        if r == row {
            continue;
        }
        let factor = tab[r * width + col];
        if factor != 0.0 {
            for j in 0..width {
                tab[r * width + j] -= factor * tab[row * width + j];
            }
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

/// Solves `M x = b` by Gaussian elimination with partial pivoting.
fn solve_linear(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-13 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                row[col..]
                    .iter_mut()
                    .zip(&pivot_row[col..])
                    .for_each(|(x, p)| *x -= f * p);
                b[col + 1 + i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[pos] += 1;
        for i in pos + 1..k {
            cur[i] = cur[i - 1] + 1;
        }
    }
}

/// Equilibrium by enumerating equal-size supports and solving the
/// indifference equations on each. Returns the first profile that passes the
/// best-response check within `tol`.
pub fn solve_by_support_enumeration(a: &Matrix, tol: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    a.check_finite()?;
    let (rows, cols) = (a.rows(), a.cols());
    if rows == 0 || cols == 0 {
        return Err(Error::Solver("empty payoff matrix".into()));
    }
    if rows > SUPPORT_ENUMERATION_LIMIT || cols > SUPPORT_ENUMERATION_LIMIT {
        return Err(Error::Solver(format!(
            "support enumeration is limited to {SUPPORT_ENUMERATION_LIMIT}x{SUPPORT_ENUMERATION_LIMIT}"
        )));
    }
    for k in 1..=rows.min(cols) {
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                if let Some(found) = try_supports(a, &rs, &cs, tol) {
                    return Ok(found);
                }
            }
        }
    }
    Err(Error::Solver(
        "no equilibrium found by support enumeration".into(),
    ))
}

fn try_supports(
    a: &Matrix,
    rs: &[usize],
    cs: &[usize],
    tol: f64,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let k = rs.len();
    // Unknowns (q_J, v): A[I,J] q - v = 0, sum q = 1.
    let mut mq = vec![vec![0.0; k + 1]; k + 1];
    let mut bq = vec![0.0; k + 1];
    // Unknowns (p_I, v): p^T A[I,J] - v = 0, sum p = 1.
    let mut mp = vec![vec![0.0; k + 1]; k + 1];
    let mut bp = vec![0.0; k + 1];
    for (i, &r) in rs.iter().enumerate() {
        for (j, &c) in cs.iter().enumerate() {
            mq[i][j] = a.get(r, c);
            mp[j][i] = a.get(r, c);
        }
        mq[i][k] = -1.0;
        mp[i][k] = -1.0;
        mq[k][i] = 1.0;
        mp[k][i] = 1.0;
    }
    bq[k] = 1.0;
    bp[k] = 1.0;
    let xq = solve_linear(mq, bq)?;
    let xp = solve_linear(mp, bp)?;
    if xq[..k].iter().chain(&xp[..k]).any(|&x| x < -tol) {
        return None;
    }
    let mut p = vec![0.0; a.rows()];
    let mut q = vec![0.0; a.cols()];
    for (i, &r) in rs.iter().enumerate() {
        p[r] = xp[i].max(0.0);
    }
    for (j, &c) in cs.iter().enumerate() {
        q[c] = xq[j].max(0.0);
    }
    let (p, q) = (normalize(p), normalize(q));
    let (row_best, col_best) = super::best_response_values(a, &p, &q);
    if row_best - col_best <= tol {
        let value = a.bilinear(&p, &q);
        Some((p, q, value))
    } else {
        None
    }
}
