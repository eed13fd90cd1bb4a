//! CSV and markdown renderings of a payoff matrix.
//!
//! CSV layout: a header row `pmal_b\pmal_fc,<fc values...>`, then one row per
//! Byzantine strategy with its value in the first column. Numbers use six
//! significant digits in `%g` style with a `.` separator. Lines starting with
//! `#` are comments.

use super::{Matrix, PayoffMatrix};
use crate::error::{Error, Result};

/// Formats `x` like C's `%.{digits}g`: fixed notation for moderate
/// exponents, scientific otherwise, trailing zeros stripped.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    // Round first so that e.g. 9.999996 picks the right exponent.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl PayoffMatrix {
    pub fn to_csv(&self) -> String {
        csv_of(&self.row_values, &self.col_values, &self.pe)
    }

    pub fn stderr_csv(&self) -> Option<String> {
        self.stderr
            .as_ref()
            .map(|se| csv_of(&self.row_values, &self.col_values, se))
    }

    /// Markdown table with entries shown as `10^k x P_e`, `k` chosen so the
    /// largest entry has one integer digit. Cells in `bold` are emphasized.
    pub fn to_markdown(&self, bold: &[(usize, usize)]) -> String {
        let max = (0..self.pe.rows())
            .flat_map(|r| self.pe.row(r).iter().copied())
            .fold(0.0, f64::max);
        let k = if max > 0.0 {
            (-max.log10().floor()).max(0.0) as i32
        } else {
            0
        };
        let scale = 10f64.powi(k);
        let mut out = format!("Payoff (10^{k} x P_e)\n\n| P_mal^B / P_mal^FC |");
        for c in &self.col_values {
            out.push_str(&format!(" {} |", format_sig(*c, 6)));
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.col_values.len()));
        out.push('\n');
        for (r, rv) in self.row_values.iter().enumerate() {
            out.push_str(&format!("| {} |", format_sig(*rv, 6)));
            for c in 0..self.col_values.len() {
                let cell = format_sig(self.pe.get(r, c) * scale, 4);
                if bold.contains(&(r, c)) {
                    out.push_str(&format!(" **{cell}** |"));
                } else {
                    out.push_str(&format!(" {cell} |"));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn csv_of(rows: &[f64], cols: &[f64], m: &Matrix) -> String {
    let mut out = String::from("pmal_b\\pmal_fc");
    for c in cols {
        out.push(',');
        out.push_str(&format_sig(*c, 6));
    }
    out.push('\n');
    for (r, rv) in rows.iter().enumerate() {
        out.push_str(&format_sig(*rv, 6));
        for c in 0..cols.len() {
            out.push(',');
            out.push_str(&format_sig(m.get(r, c), 6));
        }
        out.push('\n');
    }
    out
}

/// Parses the CSV layout written by [`PayoffMatrix::to_csv`]. No standard
/// errors are attached.
pub fn parse_payoff_csv(text: &str) -> Result<PayoffMatrix> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::DimensionMismatch("empty payoff CSV".into()))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::DimensionMismatch(format!("not a number: `{s}`")))
    };
    let col_values = header
        .split(',')
        .skip(1)
        .map(parse)
        .collect::<Result<Vec<_>>>()?;
    let mut row_values = Vec::new();
    let mut rows = Vec::new();
    for line in lines {
        let mut fields = line.split(',');
        row_values.push(parse(fields.next().unwrap_or(""))?);
        let row = fields.map(parse).collect::<Result<Vec<_>>>()?;
        if row.len() != col_values.len() {
            return Err(Error::DimensionMismatch(format!(
                "row has {} entries, header has {}",
                row.len(),
                col_values.len()
            )));
        }
        rows.push(row);
    }
    PayoffMatrix::from_table(row_values, col_values, Matrix::from_rows(&rows)?, 0)
}
