//! The four experiment commands.

use std::fmt::Write as _;
use std::path::PathBuf;

use byzfuse::game::{
    classify_dominance, find_dominant_row, find_pure_equilibria, find_pure_equilibria_within,
    find_weakly_dominant_row, format_sig, parse_payoff_csv, Dominance,
};
use byzfuse::oracle::{
    exact_error_probability, exact_map_decision, ExactScenario, MAX_REPORT_BITS,
};
use byzfuse::{
    crossover_delta, estimate_payoff_matrix, fuse, solve_mixed, Equilibrium, EquilibriumKind,
    FusionAssumption, Matrix, PayoffEstimate, PayoffMatrix, ReportMatrix, StrategyGrid,
};

use crate::output::{csv_stamp, md_stamp, meta, write_atomic};
use crate::{CliError, ExperimentConfig};

/// Tolerance on the duality gap accepted from the game solver.
const SOLVER_TOL: f64 = 1e-9;
/// Strategy weights below this are reported as outside the support.
const SUPPORT_EPS: f64 = 1e-9;

/// The payoff matrix a command works on, and the full estimate when it was
/// simulated rather than read from `payoff_file`.
#[derive(Debug, Clone)]
pub struct Payoff {
    pub matrix: PayoffMatrix,
    pub estimate: Option<PayoffEstimate>,
}

impl Payoff {
    fn source(&self, cfg: &ExperimentConfig) -> String {
        match &cfg.payoff_file {
            Some(p) if self.estimate.is_none() => format!("file {}", p.display()),
            _ => "estimated".into(),
        }
    }
}

/// Reads `payoff_file` if set (standard errors then assume `trials`
/// binomial samples per entry), otherwise estimates the matrix.
pub fn obtain_payoff(cfg: &ExperimentConfig) -> Result<Payoff, CliError> {
    if let Some(path) = &cfg.payoff_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let parsed = parse_payoff_csv(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut matrix =
            PayoffMatrix::from_table(parsed.row_values, parsed.col_values, parsed.pe, cfg.trials)?;
        matrix.seed = cfg.seed;
        return Ok(Payoff {
            matrix,
            estimate: None,
        });
    }
    let est = estimate_payoff_matrix(
        &cfg.scenario(),
        &cfg.grid_b,
        &cfg.grid_fc,
        cfg.trials,
        cfg.seed,
    )?;
    Ok(Payoff {
        matrix: est.matrix(cfg.error_metric).clone(),
        estimate: Some(est),
    })
}

fn write_payoff_files(
    cfg: &ExperimentConfig,
    payoff: &Payoff,
    bold: &[(usize, usize)],
) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output_dir;
    let pm = &payoff.matrix;
    let mut files = vec![
        write_atomic(
            dir,
            "payoff.csv",
            &format!("{}{}", csv_stamp(cfg), pm.to_csv()),
        )?,
        write_atomic(
            dir,
            "payoff.md",
            &format!("{}{}", md_stamp(cfg), pm.to_markdown(bold)),
        )?,
    ];
    if let Some(se) = pm.stderr_csv() {
        files.push(write_atomic(
            dir,
            "payoff_stderr.csv",
            &format!("{}{se}", csv_stamp(cfg)),
        )?);
    }
    Ok(files)
}

/// Estimates (or loads) the payoff matrix and writes `payoff.csv`,
/// `payoff.md`, `payoff_stderr.csv` and `meta.txt`.
pub fn run_payoff(cfg: &ExperimentConfig) -> Result<Payoff, CliError> {
    let payoff = obtain_payoff(cfg)?;
    write_payoff_files(cfg, &payoff, &[])?;
    write_atomic(
        &cfg.output_dir,
        "meta.txt",
        &meta(cfg, "payoff", &payoff.source(cfg)),
    )?;
    Ok(payoff)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumAnalysis {
    pub strict_dominant: Option<usize>,
    pub weak_dominant: Option<usize>,
    /// Dominance allowing `noise_z` standard errors.
    pub noisy_dominance: Dominance,
    pub saddles: Vec<(usize, usize)>,
    /// Saddle points allowing `noise_z` standard errors.
    pub noisy_saddles: Vec<(usize, usize)>,
    pub equilibrium: Equilibrium,
    /// `(max_r (Aq)_r - min_c (p^T A)_c)` at the reported profile.
    pub duality_gap: f64,
}

pub fn analyze_equilibrium(
    pm: &PayoffMatrix,
    noise_z: f64,
) -> Result<EquilibriumAnalysis, CliError> {
    let a = &pm.pe;
    let equilibrium = solve_mixed(a, SOLVER_TOL)?;
    let (p, q) = (
        equilibrium.row_strategy(a.rows()),
        equilibrium.col_strategy(a.cols()),
    );
    let (hi, lo) = byzfuse::game::best_response_values(a, &p, &q);
    Ok(EquilibriumAnalysis {
        strict_dominant: find_dominant_row(a),
        weak_dominant: find_weakly_dominant_row(a),
        noisy_dominance: classify_dominance(pm, noise_z),
        saddles: find_pure_equilibria(a),
        noisy_saddles: find_pure_equilibria_within(pm, noise_z),
        equilibrium,
        duality_gap: hi - lo,
    })
}

fn g(x: f64) -> String {
    format_sig(x, 4)
}

fn cells(pm: &PayoffMatrix, list: &[(usize, usize)]) -> String {
    if list.is_empty() {
        return "none".into();
    }
    list.iter()
        .map(|&(r, c)| {
            format!(
                "({}, {}) with P_e = {}",
                g(pm.row_values[r]),
                g(pm.col_values[c]),
                g(pm.pe.get(r, c))
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn support_table(label: &str, values: &[f64], weights: &[f64]) -> String {
    let support: Vec<usize> = (0..values.len())
        .filter(|&i| weights[i] > SUPPORT_EPS)
        .collect();
    let mut out = format!("| {label} |");
    for &i in &support {
        out.push_str(&format!(" {} |", g(values[i])));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(support.len()));
    out.push_str("\n| probability |");
    for &i in &support {
        out.push_str(&format!(" {} |", format_sig(weights[i], 3)));
    }
    out.push('\n');
    out
}

fn render_equilibrium(
    cfg: &ExperimentConfig,
    pm: &PayoffMatrix,
    an: &EquilibriumAnalysis,
) -> String {
    let row = |r: Option<usize>| {
        r.map_or("none".to_string(), |r| {
            format!("P_mal^B = {}", g(pm.row_values[r]))
        })
    };
    let z = g(cfg.noise_z);
    let mut out = md_stamp(cfg);
    out.push_str("# Equilibrium analysis\n\n");
    let _ = writeln!(
        out,
        "n = {}, m = {}, eps = {}, Byzantines {}, FC assumes {}, {} error.\n",
        cfg.n,
        cfg.m,
        g(cfg.eps),
        cfg.true_model,
        cfg.fc_model,
        cfg.error_metric
    );
    out.push_str("## Byzantine dominant strategy\n\n");
    let _ = writeln!(out, "- strict: {}", row(an.strict_dominant));
    let _ = writeln!(out, "- weak: {}", row(an.weak_dominant));
    let noisy = match an.noisy_dominance {
        Dominance::Strict(r) => format!(
            "P_mal^B = {} (separated by more than {z} sigma)",
            g(pm.row_values[r])
        ),
        Dominance::WithinNoise(r) => {
            format!("P_mal^B = {} (within {z} sigma)", g(pm.row_values[r]))
        }
        Dominance::None => "none".into(),
    };
    let _ = writeln!(out, "- with a {z} sigma margin: {noisy}\n");
    out.push_str("## Pure equilibria\n\n");
    if an.saddles.is_empty() {
        out.push_str("- exact: no pure equilibrium\n");
    } else {
        let _ = writeln!(out, "- exact: {}", cells(pm, &an.saddles));
    }
    let _ = writeln!(
        out,
        "- with a {z} sigma margin: {}\n",
        cells(pm, &an.noisy_saddles)
    );
    out.push_str("## Equilibrium\n\n");
    match &an.equilibrium.kind {
        EquilibriumKind::Pure { row, col } => {
            let _ = writeln!(
                out,
                "Saddle point at P_mal^B = {}, P_mal^FC = {}.\n",
                g(pm.row_values[*row]),
                g(pm.col_values[*col])
            );
        }
        EquilibriumKind::Mixed { p, q } => {
            out.push_str(&support_table("P_mal^B", &pm.row_values, p));
            out.push('\n');
            out.push_str(&support_table("P_mal^FC", &pm.col_values, q));
            out.push('\n');
        }
    }
    let _ = writeln!(out, "Value: P_e = {}", format_sig(an.equilibrium.value, 6));
    let _ = writeln!(out, "Duality gap: {}", format_sig(an.duality_gap, 3));
    out
}

/// Solves the game on the payoff matrix and writes `equilibrium.md` (plus
/// the payoff files, with saddle points in bold, and `meta.txt`).
pub fn run_equilibrium(cfg: &ExperimentConfig) -> Result<EquilibriumAnalysis, CliError> {
    let payoff = obtain_payoff(cfg)?;
    let an = analyze_equilibrium(&payoff.matrix, cfg.noise_z)?;
    write_payoff_files(cfg, &payoff, &an.saddles)?;
    write_atomic(
        &cfg.output_dir,
        "equilibrium.md",
        &render_equilibrium(cfg, &payoff.matrix, &an),
    )?;
    write_atomic(
        &cfg.output_dir,
        "meta.txt",
        &meta(cfg, "equilibrium", &payoff.source(cfg)),
    )?;
    Ok(an)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Majority vote against its worst case, `P_mal^B = 1`.
    pub majority: f64,
    /// The optimum rule at the game equilibrium.
    pub optimum: f64,
    pub equilibrium: Equilibrium,
}

/// Majority error at `P_mal^B = 1`, reusing the estimate when that row was
/// simulated.
fn majority_at_full_flip(cfg: &ExperimentConfig, payoff: &Payoff) -> Result<f64, CliError> {
    if let (Some(est), Some(r)) = (&payoff.estimate, cfg.grid_b.position(1.0)) {
        return Ok(est.majority(cfg.error_metric)[r]);
    }
    let only = StrategyGrid::new(vec![1.0])?;
    let fc = StrategyGrid::new(vec![cfg.grid_fc.values()[0]])?;
    let est = estimate_payoff_matrix(&cfg.scenario(), &only, &fc, cfg.trials, cfg.seed)?;
    Ok(est.majority(cfg.error_metric)[0])
}

/// Writes `compare.md`: majority vote at its worst case next to the optimum
/// rule at the equilibrium (expected over mixed strategies).
pub fn run_compare(cfg: &ExperimentConfig) -> Result<Comparison, CliError> {
    let payoff = obtain_payoff(cfg)?;
    let equilibrium = solve_mixed(&payoff.matrix.pe, SOLVER_TOL)?;
    let majority = majority_at_full_flip(cfg, &payoff)?;
    let cmp = Comparison {
        majority,
        optimum: equilibrium.value,
        equilibrium,
    };
    let mut out = md_stamp(cfg);
    out.push_str("# Error probability at equilibrium\n\n| Scenario | Maj | OPT |\n|---|---|---|\n");
    let _ = writeln!(
        out,
        "| n = {}, m = {}, {} | {} | {} |",
        cfg.n,
        cfg.m,
        cfg.true_model,
        format_sig(cmp.majority, 3),
        format_sig(cmp.optimum, 3)
    );
    let _ = writeln!(
        out,
        "\nMaj is evaluated at P_mal^B = 1. OPT is the equilibrium value of the game ({} equilibrium), {} error.",
        if cmp.equilibrium.is_pure() { "pure" } else { "mixed" },
        cfg.error_metric
    );
    write_atomic(&cfg.output_dir, "compare.md", &out)?;
    write_atomic(
        &cfg.output_dir,
        "meta.txt",
        &meta(cfg, "compare", &payoff.source(cfg)),
    )?;
    Ok(cmp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    /// Report matrices compared, over all FC strategies.
    pub decisions_checked: u64,
    /// `(pmal_fc, report code)` where the fast rule and enumeration differ.
    pub decision_mismatches: Vec<(f64, u64)>,
    /// Exact error probabilities over the grids, when the instance is small
    /// enough to enumerate.
    pub exact: Option<Matrix>,
    /// Cells whose Monte Carlo estimate misses the exact value by more than
    /// `noise_z` standard errors.
    pub outliers: Vec<(usize, usize)>,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.decision_mismatches.is_empty() && self.outliers.is_empty()
    }
}

/// Cross-checks the fusion rule against exhaustive MAP decisions, and the
/// Monte Carlo payoff against exact error probabilities. Writes `oracle.md`.
pub fn run_oracle_check(cfg: &ExperimentConfig) -> Result<OracleCheck, CliError> {
    let (n, m) = (cfg.n, cfg.m);
    if n * m > MAX_REPORT_BITS {
        return Err(CliError::Config(format!(
            "oracle-check enumerates 2^(n*m) report matrices and needs n*m <= {MAX_REPORT_BITS}"
        )));
    }
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for &pmal_fc in cfg.grid_fc.values() {
        let assumption = FusionAssumption::new(cfg.fc_model, cfg.eps, pmal_fc)?;
        let delta = crossover_delta(cfg.eps, pmal_fc);
        for code in 0..1u64 << (n * m) {
            let r = ReportMatrix::from_code(code, n, m);
            if fuse(&r, &assumption)? != exact_map_decision(&r, cfg.fc_model, cfg.eps, delta)? {
                mismatches.push((pmal_fc, code));
            }
            checked += 1;
        }
    }

    let small = ExactScenario {
        n,
        m,
        eps: cfg.eps,
        pmal_b: 1.0,
        pmal_fc: 1.0,
        true_model: cfg.true_model,
        fc_model: cfg.fc_model,
    };
    let (mut exact, mut outliers) = (None, Vec::new());
    if small.validate().is_ok() {
        let (rows, cols) = (cfg.grid_b.len(), cfg.grid_fc.len());
        let mut table = Matrix::filled(rows, cols, 0.0);
        for (r, &pmal_b) in cfg.grid_b.values().iter().enumerate() {
            for (c, &pmal_fc) in cfg.grid_fc.values().iter().enumerate() {
                let sc = ExactScenario {
                    pmal_b,
                    pmal_fc,
                    ..small
                };
                table.set(r, c, exact_error_probability(&sc, cfg.error_metric)?);
            }
        }
        let est = estimate_payoff_matrix(
            &cfg.scenario(),
            &cfg.grid_b,
            &cfg.grid_fc,
            cfg.trials,
            cfg.seed,
        )?;
        let pm = est.matrix(cfg.error_metric);
        for r in 0..rows {
            for c in 0..cols {
                // Floor the standard error so cells that are zero in the
                // sample but tiny in truth do not trip the check.
                let se = pm.stderr_at(r, c).max(1.0 / cfg.trials as f64);
                if (pm.pe.get(r, c) - table.get(r, c)).abs() > cfg.noise_z * se {
                    outliers.push((r, c));
                }
            }
        }
        exact = Some(table);
    }

    let check = OracleCheck {
        decisions_checked: checked,
        decision_mismatches: mismatches,
        exact,
        outliers,
    };
    let mut out = md_stamp(cfg);
    out.push_str("# Oracle check\n\n");
    let _ = writeln!(
        out,
        "Decisions: {} report matrices, {} mismatches.\n",
        check.decisions_checked,
        check.decision_mismatches.len()
    );
    match &check.exact {
        Some(table) => {
            let pm = PayoffMatrix::from_table(
                cfg.grid_b.values().to_vec(),
                cfg.grid_fc.values().to_vec(),
                table.clone(),
                0,
            )?;
            out.push_str("Exact error probabilities:\n\n");
            out.push_str(&pm.to_csv());
            let _ = writeln!(
                out,
                "\nMonte Carlo cells outside {} sigma: {}",
                g(cfg.noise_z),
                check.outliers.len()
            );
        }
        None => out.push_str(
            "Exact error probabilities skipped: the instance is too large to enumerate.\n",
        ),
    }
    write_atomic(&cfg.output_dir, "oracle.md", &out)?;
    write_atomic(
        &cfg.output_dir,
        "meta.txt",
        &meta(cfg, "oracle-check", "estimated"),
    )?;
    Ok(check)
}
