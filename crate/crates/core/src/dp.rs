//! Subset-sum dynamic program.
//!
//! For per-node Byzantine likelihoods `b(i)` and honest likelihoods `h(i)`,
//! `f_{n,k}` is the sum over all `k`-subsets `I` of `prod_{i in I} b(i) *
//! prod_{i not in I} h(i)`. Peeling off the first node of a suffix gives
//!
//! ```text
//! f_{r,k} = b(n-r+1) f_{r-1,k-1} + h(n-r+1) f_{r-1,k}
//! ```
//!
//! with closed-form leaves `f_{r,r} = prod b` and `f_{r,0} = prod h` over the
//! last `r` nodes. The table is filled bottom-up over suffix length `r`,
//! touching only the `(r, k)` cells the requested top-level entries depend on,
//! so a single `k` costs at most `k(n-k+1)` interior evaluations instead of
//! `C(n, k)` products.
//!
//! Everything is kept in the log domain; `-inf` encodes a zero likelihood.

use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, log_sum_exp};

/// Per-node log-likelihoods: `log_b[i]` if node `i` is Byzantine, `log_h[i]`
/// if it is honest.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWeights {
    log_b: Vec<f64>,
    log_h: Vec<f64>,
}

impl NodeWeights {
    pub fn new(log_b: Vec<f64>, log_h: Vec<f64>) -> Result<Self> {
        if log_b.len() != log_h.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} byzantine weights vs {} honest weights",
                log_b.len(),
                log_h.len()
            )));
        }
        if log_b
            .iter()
            .chain(&log_h)
            .any(|v| v.is_nan() || *v == f64::INFINITY)
        {
            return Err(Error::DimensionMismatch(
                "log weights must be finite or -inf".into(),
            ));
        }
        Ok(Self { log_b, log_h })
    }

    /// Builds weights from linear-domain likelihoods (zero maps to `-inf`).
    pub fn from_linear(b: &[f64], h: &[f64]) -> Result<Self> {
        Self::new(
            b.iter().map(|v| v.ln()).collect(),
            h.iter().map(|v| v.ln()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.log_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_b.is_empty()
    }

    pub fn log_b(&self) -> &[f64] {
        &self.log_b
    }

    pub fn log_h(&self) -> &[f64] {
        &self.log_h
    }

    /// Applies the same node permutation to both weight vectors.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            log_b: perm.iter().map(|&i| self.log_b[i]).collect(),
            log_h: perm.iter().map(|&i| self.log_h[i]).collect(),
        }
    }
}

/// Reusable rows for the bottom-up fill.
#[derive(Debug, Default, Clone)]
pub struct DpScratch {
    prev: Vec<f64>,
    cur: Vec<f64>,
}

/// Fills the table for top-level entries `k_lo..=k_hi`, calling `visit(r, k,
/// value, interior)` for every populated cell. Returns the number of interior
/// evaluations. On return `scratch.prev[k]` holds `log f_{n,k}`.
fn fill<F>(
    log_b: &[f64],
    log_h: &[f64],
    k_lo: usize,
    k_hi: usize,
    scratch: &mut DpScratch,
    mut visit: F,
) -> usize
where
    F: FnMut(usize, usize, f64, bool),
{
    let n = log_b.len();
    debug_assert!(k_lo <= k_hi && k_hi <= n);
    let DpScratch { prev, cur } = scratch;
    prev.clear();
    prev.resize(k_hi + 1, f64::NEG_INFINITY);
    cur.clear();
    cur.resize(k_hi + 1, f64::NEG_INFINITY);

    // f_{0,0} = 1 (empty product).
    prev[0] = 0.0;
    visit(0, 0, 0.0, false);
    let mut suffix_b = 0.0;
    let mut suffix_h = 0.0;
    let mut interior = 0usize;

    for r in 1..=n {
        let node = n - r;
        suffix_b += log_b[node];
        suffix_h += log_h[node];
        let lo = k_lo.saturating_sub(n - r);
        let hi = r.min(k_hi);
        for k in lo..=hi {
            let value = if k == 0 {
                suffix_h
            } else if k == r {
                suffix_b
            } else {
                interior += 1;
                log_add_exp(log_b[node] + prev[k - 1], log_h[node] + prev[k])
            };
            cur[k] = value;
            visit(r, k, value, k != 0 && k != r);
        }
        std::mem::swap(prev, cur);
    }
    interior
}

/// Linear-domain `f_{n,k}` for `k` in `k_lo..=k_hi`, same banded recursion
/// as [`log_subset_sums_into`]. Meant for weights pre-scaled to at most one,
/// where it is much cheaper than the log domain; the caller must watch for
/// underflow.
pub fn subset_sums_into<'a>(
    b: &[f64],
    h: &[f64],
    k_lo: usize,
    k_hi: usize,
    scratch: &'a mut DpScratch,
) -> &'a [f64] {
    let n = b.len();
    debug_assert!(k_lo <= k_hi && k_hi <= n && h.len() == n);
    let DpScratch { prev, cur } = scratch;
    prev.clear();
    prev.resize(k_hi + 1, 0.0);
    cur.clear();
    cur.resize(k_hi + 1, 0.0);
    prev[0] = 1.0;
    let mut suffix_b = 1.0;
    let mut suffix_h = 1.0;
    for r in 1..=n {
        let node = n - r;
        suffix_b *= b[node];
        suffix_h *= h[node];
        let lo = k_lo.saturating_sub(n - r);
        let hi = r.min(k_hi);
        for k in lo..=hi {
            cur[k] = if k == 0 {
                suffix_h
            } else if k == r {
                suffix_b
            } else {
                b[node] * prev[k - 1] + h[node] * prev[k]
            };
        }
        std::mem::swap(prev, cur);
    }
    &prev[..=k_hi]
}

/// `log f_{n,k}` for every `k` in `k_lo..=k_hi`, reusing `scratch`.
/// Indexing the returned slice by `k` is valid for that range only.
pub fn log_subset_sums_into<'a>(
    log_b: &[f64],
    log_h: &[f64],
    k_lo: usize,
    k_hi: usize,
    scratch: &'a mut DpScratch,
) -> &'a [f64] {
    fill(log_b, log_h, k_lo, k_hi, scratch, |_, _, _, _| {});
    &scratch.prev[..=k_hi]
}

/// Memo table of `log f_{r,k}` values, keyed by suffix length and count.
#[derive(Debug, Clone)]
pub struct SubsetSumTable {
    n: usize,
    k_hi: usize,
    memo: Vec<Option<f64>>,
    interior_evaluations: usize,
}

impl SubsetSumTable {
    /// Fills every cell that `log f_{n,k}` for `k_lo..=k_hi` depends on.
    pub fn build(w: &NodeWeights, k_lo: usize, k_hi: usize) -> Result<Self> {
        let n = w.len();
        if k_hi > n {
            return Err(Error::SubsetTooLarge { k: k_hi, n });
        }
        if k_lo > k_hi {
            return Err(Error::DimensionMismatch(format!(
                "empty range {k_lo}..={k_hi}"
            )));
        }
        let width = k_hi + 1;
        let mut memo = vec![None; (n + 1) * width];
        let mut scratch = DpScratch::default();
        let interior_evaluations = fill(
            &w.log_b,
            &w.log_h,
            k_lo,
            k_hi,
            &mut scratch,
            |r, k, v, _| {
                memo[r * width + k] = Some(v);
            },
        );
        Ok(Self {
            n,
            k_hi,
            memo,
            interior_evaluations,
        })
    }

    /// `log f_{r,k}` if the cell was populated.
    pub fn get(&self, r: usize, k: usize) -> Option<f64> {
        if r > self.n || k > self.k_hi {
            return None;
        }
        self.memo[r * (self.k_hi + 1) + k]
    }

    pub fn populated(&self) -> usize {
        self.memo.iter().filter(|c| c.is_some()).count()
    }

    /// Number of cells computed by the recursion rather than a closed form.
    pub fn interior_evaluations(&self) -> usize {
        self.interior_evaluations
    }
}

/// `log f_{n,k}` via the dynamic program.
pub fn subset_sum(w: &NodeWeights, k: usize) -> Result<f64> {
    let n = w.len();
    if k > n {
        return Err(Error::SubsetTooLarge { k, n });
    }
    let mut scratch = DpScratch::default();
    Ok(log_subset_sums_into(&w.log_b, &w.log_h, k, k, &mut scratch)[k])
}

/// `log f_{n,k}` for `k = 0..=k_max` from one shared table.
pub fn subset_sum_all(w: &NodeWeights, k_max: usize) -> Result<Vec<f64>> {
    let n = w.len();
    if k_max > n {
        return Err(Error::SubsetTooLarge { k: k_max, n });
    }
    let mut scratch = DpScratch::default();
    Ok(log_subset_sums_into(&w.log_b, &w.log_h, 0, k_max, &mut scratch).to_vec())
}

/// Upper bound on the number of terms [`naive_subset_sum`] will enumerate.
pub const NAIVE_TERM_LIMIT: u128 = 1_000_000;

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `log f_{n,k}` by literally summing over every `k`-subset. Reference only.
pub fn naive_subset_sum(w: &NodeWeights, k: usize) -> Result<f64> {
    let n = w.len();
    if k > n {
        return Err(Error::SubsetTooLarge { k, n });
    }
    let terms = binomial(n, k);
    if terms > NAIVE_TERM_LIMIT {
        return Err(Error::EnumerationLimit(format!(
            "C({n}, {k}) = {terms} subsets exceeds {NAIVE_TERM_LIMIT}"
        )));
    }
    let mut logs = Vec::with_capacity(terms as usize);
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let mut member = vec![false; n];
        for &i in &subset {
            member[i] = true;
        }
        let term: f64 = (0..n)
            .map(|i| if member[i] { w.log_b[i] } else { w.log_h[i] })
            .sum();
        logs.push(term);
        if !next_combination(&mut subset, n) {
            break;
        }
    }
    Ok(log_sum_exp(&logs))
}

/// Advances `c` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(pos) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[pos] += 1;
    for i in pos + 1..k {
        c[i] = c[i - 1] + 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn weights(b: &[f64], h: &[f64]) -> NodeWeights {
        NodeWeights::from_linear(b, h).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        let (ea, eb) = (a.exp(), b.exp());
        (ea - eb).abs() <= rel * ea.abs().max(eb.abs())
    }

    #[test]
    fn leaves_are_closed_form() {
        let b = [0.2, 0.5, 0.9, 0.4];
        let h = [0.7, 0.1, 0.3, 0.6];
        let w = weights(&b, &h);
        let all_h: f64 = h.iter().map(|v: &f64| v.ln()).sum();
        let all_b: f64 = b.iter().map(|v: &f64| v.ln()).sum();
        assert!((subset_sum(&w, 0).unwrap() - all_h).abs() < 1e-14);
        assert!((subset_sum(&w, 4).unwrap() - all_b).abs() < 1e-14);
        assert!((naive_subset_sum(&w, 0).unwrap() - all_h).abs() < 1e-14);
    }

    #[test]
    fn unit_weights_count_subsets() {
        let w = weights(&[1.0; 4], &[1.0; 4]);
        assert!((naive_subset_sum(&w, 2).unwrap() - 6f64.ln()).abs() < 1e-14);
        let w20 = weights(&[1.0; 20], &[1.0; 20]);
        let all = subset_sum_all(&w20, 20).unwrap();
        for (k, v) in all.iter().enumerate() {
            let c = binomial(20, k) as f64;
            assert!((v.exp() - c).abs() <= 1e-9 * c, "k = {k}");
        }
    }

    #[test]
    fn k_max_zero_is_honest_product() {
        let w = weights(&[0.3, 0.4], &[0.5, 0.25]);
        let v = subset_sum_all(&w, 0).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0] - (0.125f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn oversized_k_is_rejected() {
        let w = weights(&[0.5; 3], &[0.5; 3]);
        assert_eq!(subset_sum(&w, 4), Err(Error::SubsetTooLarge { k: 4, n: 3 }));
        assert!(subset_sum_all(&w, 4).is_err());
        assert!(naive_subset_sum(&w, 4).is_err());
    }

    #[test]
    fn naive_guard() {
        let w = weights(&[0.5; 30], &[0.5; 30]);
        assert!(matches!(
            naive_subset_sum(&w, 15),
            Err(Error::EnumerationLimit(_))
        ));
    }

    #[test]
    fn zero_likelihoods_propagate() {
        // Node 0 cannot be honest, so only subsets containing it contribute.
        let w = weights(&[0.5, 0.2, 0.3], &[0.0, 0.4, 0.6]);
        let expected = 0.5 * 0.2 * 0.6 + 0.5 * 0.4 * 0.3;
        assert!((subset_sum(&w, 1).unwrap().exp() - 0.5 * 0.4 * 0.6).abs() < 1e-15);
        assert!((subset_sum(&w, 2).unwrap().exp() - expected).abs() < 1e-15);
        assert_eq!(subset_sum(&w, 0).unwrap(), f64::NEG_INFINITY);
        let all_zero = weights(&[0.0; 3], &[0.0; 3]);
        assert_eq!(subset_sum(&all_zero, 1).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn table_exposes_memo() {
        let w = weights(&[0.2, 0.5, 0.9, 0.4, 0.3], &[0.7, 0.1, 0.3, 0.6, 0.5]);
        let t = SubsetSumTable::build(&w, 2, 2).unwrap();
        assert!((t.get(5, 2).unwrap() - subset_sum(&w, 2).unwrap()).abs() < 1e-15);
        // f_{1,1} = b(5), the last node.
        assert!((t.get(1, 1).unwrap() - 0.3f64.ln()).abs() < 1e-15);
        assert!(t.get(5, 0).is_none());
        assert!(t.interior_evaluations() <= 2 * (5 - 2 + 1));
    }

    #[test]
    fn complexity_witness_small() {
        for n in 0..=12 {
            let w = weights(&vec![0.3; n], &vec![0.6; n]);
            for k in 0..=n {
                let t = SubsetSumTable::build(&w, k, k).unwrap();
                assert!(t.interior_evaluations() <= k * (n - k + 1), "n={n} k={k}");
            }
        }
    }

    fn weight_vectors() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=10).prop_flat_map(|n| {
            (
                prop::collection::vec(1e-3f64..1.0, n),
                prop::collection::vec(1e-3f64..1.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_naive((b, h) in weight_vectors(), kf in 0.0f64..=1.0) {
            let w = weights(&b, &h);
            let k = (kf * w.len() as f64).round() as usize;
            let dp = subset_sum(&w, k).unwrap();
            let naive = naive_subset_sum(&w, k).unwrap();
            prop_assert!(close(dp, naive, 1e-12));
        }

        #[test]
        fn all_matches_single((b, h) in weight_vectors()) {
            let w = weights(&b, &h);
            let all = subset_sum_all(&w, w.len()).unwrap();
            for (k, v) in all.iter().enumerate() {
                prop_assert!(close(*v, subset_sum(&w, k).unwrap(), 1e-12));
            }
        }

        #[test]
        fn permutation_invariant((b, h) in weight_vectors(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let w = weights(&b, &h);
            let mut perm: Vec<usize> = (0..w.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let p = w.permuted(&perm);
            for k in 0..=w.len() {
                prop_assert!(close(subset_sum(&w, k).unwrap(), subset_sum(&p, k).unwrap(), 1e-12));
            }
        }

        #[test]
        fn linear_matches_log((b, h) in weight_vectors()) {
            let w = weights(&b, &h);
            let n = w.len();
            let mut s1 = DpScratch::default();
            let mut s2 = DpScratch::default();
            let lin = subset_sums_into(&b, &h, 0, n, &mut s1).to_vec();
            let log = log_subset_sums_into(&w.log_b, &w.log_h, 0, n, &mut s2);
            for k in 0..=n {
                prop_assert!((lin[k] - log[k].exp()).abs() <= 1e-12 * lin[k].max(log[k].exp()));
            }
        }
    }
}
