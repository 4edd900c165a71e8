//! Nonparametric significance tests: Wilcoxon signed-rank (paired) and
//! Mann-Whitney U (independent samples).
//!
//! Small samples get exact two-sided p-values by full enumeration; larger ones
//! fall back to a tie-corrected normal approximation with continuity
//! correction. Two-sided exact p doubles the smaller tail probability of
//! values at least as extreme as the observed statistic, capped at 1.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of nonzero pairs for which the signed-rank test enumerates
/// all `2^n` sign assignments.
pub const WILCOXON_EXACT_MAX_N: usize = 20;

/// Largest combined sample size for which the U test enumerates all
/// `C(n+m, n)` group assignments.
pub const MANN_WHITNEY_EXACT_MAX_NM: usize = 16;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Wilcoxon,
    MannWhitney,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PvalueMethod {
    Exact,
    NormalApprox,
}

/// How the signed-rank test treats zero differences. The classic treatment
/// discards them; Pratt ranks them alongside the rest and then drops their
/// ranks from both sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroHandling {
    #[default]
    Discard,
    Pratt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
    pub method: PvalueMethod,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl StatTestResult {
    fn new(
        test: TestKind,
        statistic: f64,
        p_value: f64,
        alpha: f64,
        method: PvalueMethod,
        n: usize,
        m: Option<usize>,
    ) -> Self {
        let p_value = p_value.min(1.0);
        Self {
            test,
            statistic,
            p_value,
            alpha,
            significant: p_value < alpha,
            method,
            n,
            m,
        }
    }
}

/// Midranks (average ranks for ties) of the given values, 1-based.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

fn two_sided(tail_low: f64, tail_high: f64) -> f64 {
    (2.0 * tail_low.min(tail_high)).min(1.0)
}

/// Wilcoxon signed-rank test on paired observations, with defaults
/// (`alpha = 0.05`, zero differences discarded).
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<StatTestResult> {
    wilcoxon_signed_rank_with(pairs, DEFAULT_ALPHA, ZeroHandling::Discard)
}

/// Wilcoxon signed-rank test.
///
/// Ranks `|x - y|` with midranks for ties; the reported statistic is
/// `W = min(W+, W-)`. Exact p enumerates all sign assignments while the
/// nonzero count stays within [`WILCOXON_EXACT_MAX_N`]; beyond that a normal
/// approximation uses the exact conditional variance `sum(r_i^2)/4` (which
/// absorbs tie corrections) and a 0.5 continuity correction.
pub fn wilcoxon_signed_rank_with(
    pairs: &[(f64, f64)],
    alpha: f64,
    zeros: ZeroHandling,
) -> Result<StatTestResult> {
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    let diffs: Vec<f64> = pairs.iter().map(|&(x, y)| x - y).collect();
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::AllZeroDifferences);
    }

    // Ranks of |d|; under Pratt, zeros participate in the ranking but their
    // ranks never enter a sum.
    let ranked: Vec<f64> = match zeros {
        ZeroHandling::Discard => nonzero.clone(),
        ZeroHandling::Pratt => diffs.clone(),
    };
    let abs: Vec<f64> = ranked.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);

    let mut w_plus = 0.0;
    let mut w_minus = 0.0;
    let mut signed_ranks = Vec::new();
    for (d, r) in ranked.iter().zip(ranks.iter()) {
        if *d > 0.0 {
            w_plus += r;
            signed_ranks.push(*r);
        } else if *d < 0.0 {
            w_minus += r;
            signed_ranks.push(*r);
        }
    }
    let statistic = w_plus.min(w_minus);
    let n = signed_ranks.len();

    if n <= WILCOXON_EXACT_MAX_N {
        let p = exact_signed_rank_p(&signed_ranks, w_plus);
        Ok(StatTestResult::new(
            TestKind::Wilcoxon,
            statistic,
            p,
            alpha,
            PvalueMethod::Exact,
            n,
            None,
        ))
    } else {
        let total: f64 = signed_ranks.iter().sum();
        let mean = total / 2.0;
        let var: f64 = signed_ranks.iter().map(|r| r * r).sum::<f64>() / 4.0;
        let p = normal_two_sided(w_plus, mean, var);
        Ok(StatTestResult::new(
            TestKind::Wilcoxon,
            statistic,
            p,
            alpha,
            PvalueMethod::NormalApprox,
            n,
            None,
        ))
    }
}

/// Exact two-sided p for W+ over all `2^n` sign assignments, by dynamic
/// programming over the doubled (hence integral) ranks.
fn exact_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    // counts[s] = number of assignments whose doubled W+ equals s
    let mut counts = vec![0.0_f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let observed = (2.0 * w_plus).round() as usize;
    let all: f64 = 2.0_f64.powi(ranks.len() as i32);
    let below: f64 = counts[..=observed].iter().sum();
    let above: f64 = counts[observed..].iter().sum();
    two_sided(below / all, above / all)
}

/// Mann-Whitney U test with default `alpha = 0.05`.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<StatTestResult> {
    mann_whitney_u_with(a, b, DEFAULT_ALPHA)
}

/// Mann-Whitney U test on two independent samples.
///
/// `U_a` counts pairs where `a` wins, halving ties; the reported statistic is
/// `min(U_a, U_b)`. Exact p enumerates all `C(n+m, n)` assignments of the
/// pooled observations while `n + m` stays within
/// [`MANN_WHITNEY_EXACT_MAX_NM`]; beyond that a tie-corrected normal
/// approximation with continuity correction is used.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], alpha: f64) -> Result<StatTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = a.len();
    let m = b.len();
    let u_a = u_statistic(a, b);
    let u_b = (n * m) as f64 - u_a;
    let statistic = u_a.min(u_b);

    if n + m <= MANN_WHITNEY_EXACT_MAX_NM {
        let p = exact_mann_whitney_p(a, b, u_a);
        Ok(StatTestResult::new(
            TestKind::MannWhitney,
            statistic,
            p,
            alpha,
            PvalueMethod::Exact,
            n,
            Some(m),
        ))
    } else {
        let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
        let big_n = (n + m) as f64;
        let tie_term: f64 = tie_counts(&pooled)
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum();
        let mean = (n * m) as f64 / 2.0;
        let var =
            (n * m) as f64 / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        let p = normal_two_sided(u_a, mean, var);
        Ok(StatTestResult::new(
            TestKind::MannWhitney,
            statistic,
            p,
            alpha,
            PvalueMethod::NormalApprox,
            n,
            Some(m),
        ))
    }
}

/// `U_a = #{(x, y) : x > y} + 1/2 #{x = y}` over all cross pairs.
fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Exact two-sided p for U over all assignments of the pooled observations
/// into a group of size `n`.
fn exact_mann_whitney_p(a: &[f64], b: &[f64], u_observed: f64) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let n = a.len();
    // Compare in doubled units so ties (.5 contributions) stay integral.
    let observed = (2.0 * u_observed).round() as i64;
    let mut below = 0u64;
    let mut above = 0u64;
    let mut total = 0u64;
    let mut combo: Vec<usize> = (0..n).collect();
    loop {
        let group_a: Vec<f64> = combo.iter().map(|&i| pooled[i]).collect();
        let mut group_b = Vec::with_capacity(pooled.len() - n);
        let mut it = combo.iter().peekable();
        for (i, &v) in pooled.iter().enumerate() {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                group_b.push(v);
            }
        }
        let u = (2.0 * u_statistic(&group_a, &group_b)).round() as i64;
        if u <= observed {
            below += 1;
        }
        if u >= observed {
            above += 1;
        }
        total += 1;
        if !next_combination(&mut combo, pooled.len()) {
            break;
        }
    }
    two_sided(below as f64 / total as f64, above as f64 / total as f64)
}

/// Advances `combo` to the next k-combination of `0..n` in lexicographic
/// order; returns false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Sizes of tie groups in the pooled sample.
fn tie_counts(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut counts = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        counts.push(j - i);
        i = j;
    }
    counts
}

/// Two-sided normal-approximation p with a 0.5 continuity correction pulling
/// the statistic toward its mean. Degenerate variance (all ties) gives p = 1.
fn normal_two_sided(observed: f64, mean: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return 1.0;
    }
    let centered = observed - mean;
    let corrected = if centered > 0.5 {
        centered - 0.5
    } else if centered < -0.5 {
        centered + 0.5
    } else {
        0.0
    };
    let z = corrected / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0)
}
