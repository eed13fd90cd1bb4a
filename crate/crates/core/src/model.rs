//! Domain types and the generative pipeline: system states, Byzantine
//! placements, local decisions and the reports that reach the fusion center.
//!
//! All samplers take an explicit random stream and keep no hidden state, so a
//! trial is a pure function of its seed.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

/// Probability that the FC receives a wrong report from a Byzantine node.
#[inline]
pub fn crossover_delta(eps: f64, pmal: f64) -> f64 {
    eps * (1.0 - pmal) + (1.0 - eps) * pmal
}

/// Local decision error `eps` together with a flip probability `pmal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    eps: f64,
    pmal: f64,
}

impl ChannelParams {
    pub fn new(eps: f64, pmal: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        check_probability("pmal", pmal)?;
        Ok(Self { eps, pmal })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn pmal(&self) -> f64 {
        self.pmal
    }

    pub fn delta(&self) -> f64 {
        crossover_delta(self.eps, self.pmal)
    }
}

/// Prior over Byzantine placements assumed by the FC (or used to draw them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ByzantineModel {
    /// Every placement equally likely (i.i.d. Bernoulli(1/2) node states).
    UnconstrainedMaxEntropy,
    /// i.i.d. Bernoulli(alpha) node states.
    IndependentAlpha(f64),
    /// Uniform over placements with fewer than `n/2` Byzantines.
    BoundedBelowHalf,
    /// Uniform over placements with exactly this many Byzantines.
    FixedCount(usize),
}

impl ByzantineModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidModel {
                n,
                reason: "the network needs at least one node".into(),
            });
        }
        match *self {
            ByzantineModel::IndependentAlpha(alpha) if !(0.0..=1.0).contains(&alpha) => {
                Err(Error::InvalidModel {
                    n,
                    reason: format!("alpha = {alpha} is outside [0, 1]"),
                })
            }
            ByzantineModel::FixedCount(k) if k > n => Err(Error::InvalidModel {
                n,
                reason: format!("n_B = {k} exceeds the number of nodes"),
            }),
            _ => Ok(()),
        }
    }

    /// Largest admissible Byzantine count under [`ByzantineModel::BoundedBelowHalf`]:
    /// the strict bound `N_B < n/2`, i.e. `ceil(n/2) - 1`.
    pub fn max_byzantines(n: usize) -> usize {
        n.saturating_sub(1) / 2
    }

    /// The independent-node weight this model reduces to, if any.
    pub fn independent_alpha(&self) -> Option<f64> {
        match *self {
            ByzantineModel::UnconstrainedMaxEntropy => Some(0.5),
            ByzantineModel::IndependentAlpha(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for ByzantineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ByzantineModel::UnconstrainedMaxEntropy => write!(f, "unconstrained"),
            ByzantineModel::IndependentAlpha(a) => write!(f, "independent:{a}"),
            ByzantineModel::BoundedBelowHalf => write!(f, "bounded"),
            ByzantineModel::FixedCount(k) => write!(f, "fixed:{k}"),
        }
    }
}

impl FromStr for ByzantineModel {
    type Err = String;

    /// Parses the [`Display`](fmt::Display) form: `unconstrained`,
    /// `independent:<alpha>`, `bounded` or `fixed:<count>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        match (kind, arg) {
            ("unconstrained", None) => Ok(ByzantineModel::UnconstrainedMaxEntropy),
            ("bounded", None) => Ok(ByzantineModel::BoundedBelowHalf),
            ("independent", Some(a)) => a
                .parse()
                .map(ByzantineModel::IndependentAlpha)
                .map_err(|_| format!("bad alpha in `{s}`")),
            ("fixed", Some(k)) => k
                .parse()
                .map(ByzantineModel::FixedCount)
                .map_err(|_| format!("bad Byzantine count in `{s}`")),
            _ => Err(format!(
                "unknown model `{s}` (expected unconstrained, bounded, independent:<alpha> or fixed:<count>)"
            )),
        }
    }
}

/// The system state sequence `s^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSequence(Vec<bool>);

impl StateSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Decodes `code` with `s_1` as the most significant of `m` bits.
    pub fn from_code(code: u64, m: usize) -> Self {
        Self((0..m).map(|j| (code >> (m - 1 - j)) & 1 == 1).collect())
    }

    pub fn code(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }

    pub fn hamming(&self, other: &StateSequence) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

/// Which nodes are Byzantine (`true`) and which are honest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodePlacement(Vec<bool>);

impl NodePlacement {
    pub fn new(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    pub fn honest(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.0
    }

    pub fn is_byzantine(&self, node: usize) -> bool {
        self.0[node]
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// The `n x m` binary reports received by the fusion center, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReportMatrix {
    nodes: usize,
    len: usize,
    bits: Vec<bool>,
}

impl ReportMatrix {
    pub fn new(nodes: usize, len: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != nodes * len {
            return Err(Error::DimensionMismatch(format!(
                "{} report bits for a {nodes}x{len} matrix",
                bits.len()
            )));
        }
        Ok(Self { nodes, len, bits })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let len = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != len) {
            return Err(Error::DimensionMismatch("ragged report rows".into()));
        }
        Self::new(rows.len(), len, rows.concat())
    }

    /// Decodes a report matrix from the low `n*m` bits of `code`, row-major,
    /// with `r_11` as the most significant bit.
    pub fn from_code(code: u64, nodes: usize, len: usize) -> Self {
        let total = nodes * len;
        let bits = (0..total)
            .map(|t| (code >> (total - 1 - t)) & 1 == 1)
            .collect();
        Self { nodes, len, bits }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, node: usize, j: usize) -> bool {
        self.bits[node * self.len + j]
    }

    pub fn row(&self, node: usize) -> &[bool] {
        &self.bits[node * self.len..(node + 1) * self.len]
    }

    pub fn complement(&self) -> Self {
        Self {
            nodes: self.nodes,
            len: self.len,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Number of ones reported for component `j`.
    pub fn column_sum(&self, j: usize) -> usize {
        (0..self.nodes).filter(|&i| self.get(i, j)).count()
    }
}

/// Draws `m` i.i.d. fair state bits.
pub fn sample_states<R: Rng + ?Sized>(rng: &mut R, m: usize) -> StateSequence {
    StateSequence((0..m).map(|_| rng.gen::<bool>()).collect())
}

/// Draws a Byzantine placement for `n` nodes under `model`.
///
/// `FixedCount` picks a uniformly random index subset; `BoundedBelowHalf`
/// rejects fair i.i.d. placements until the count is below `n/2`.
pub fn sample_placement<R: Rng + ?Sized>(
    rng: &mut R,
    model: ByzantineModel,
    n: usize,
) -> NodePlacement {
    match model {
        ByzantineModel::UnconstrainedMaxEntropy => {
            NodePlacement((0..n).map(|_| rng.gen::<bool>()).collect())
        }
        ByzantineModel::IndependentAlpha(alpha) => {
            NodePlacement((0..n).map(|_| rng.gen_bool(alpha)).collect())
        }
        ByzantineModel::FixedCount(k) => {
            let mut flags = vec![false; n];
            for i in index::sample(rng, n, k.min(n)) {
                flags[i] = true;
            }
            NodePlacement(flags)
        }
        ByzantineModel::BoundedBelowHalf => {
            let max = ByzantineModel::max_byzantines(n);
            loop {
                let flags: Vec<bool> = (0..n).map(|_| rng.gen::<bool>()).collect();
                if flags.iter().filter(|&&b| b).count() <= max {
                    return NodePlacement(flags);
                }
            }
        }
    }
}

/// Local decisions flip each state bit with probability `eps`; Byzantine
/// nodes then flip their decision with probability `pmal_b`, independently.
pub fn sample_reports<R: Rng + ?Sized>(
    rng: &mut R,
    states: &StateSequence,
    placement: &NodePlacement,
    eps: f64,
    pmal_b: f64,
) -> ReportMatrix {
    let nodes = placement.len();
    let len = states.len();
    let mut bits = Vec::with_capacity(nodes * len);
    for &byzantine in placement.flags() {
        for &s in states.bits() {
            let local = s ^ rng.gen_bool(eps);
            let report = if byzantine {
                local ^ rng.gen_bool(pmal_b)
            } else {
                local
            };
            bits.push(report);
        }
    }
    ReportMatrix { nodes, len, bits }
}
