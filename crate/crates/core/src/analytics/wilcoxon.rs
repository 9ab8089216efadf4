//! Wilcoxon signed-rank test for paired differences.
//!
//! Ties in |d| get average ranks. Up to [`EXACT_MAX_N`] non-zero
//! differences the two-sided p-value is exact: the fraction of the 2^n
//! equally likely sign assignments whose statistic is at least as extreme
//! as the observed one. Above that a normal approximation with tie-adjusted
//! variance and a 0.5 continuity correction is used.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMethod {
    /// Drop zero differences before ranking.
    #[default]
    Wilcox,
    /// Rank zeros with the rest, then drop their ranks.
    Pratt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub w_plus: f64,
    pub w_minus: f64,
    /// min(W+, W-).
    pub statistic: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub p_value: f64,
    pub method: PValueMethod,
    /// All differences were zero; p is 1 by convention.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WilcoxonError {
    #[error("at least one difference is required")]
    Empty,
    #[error("differences must be finite")]
    NonFinite,
}

/// Average ranks (1-based) of `values`, ascending.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Signed ranks of the non-zero differences, as (rank, positive).
fn signed_ranks(differences: &[f64], zero_method: ZeroMethod) -> Vec<(f64, bool)> {
    match zero_method {
        ZeroMethod::Wilcox => {
            let nonzero: Vec<f64> = differences.iter().copied().filter(|d| *d != 0.0).collect();
            let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
            average_ranks(&abs).into_iter().zip(&nonzero).map(|(r, d)| (r, *d > 0.0)).collect()
        }
        ZeroMethod::Pratt => {
            let abs: Vec<f64> = differences.iter().map(|d| d.abs()).collect();
            average_ranks(&abs)
                .into_iter()
                .zip(differences)
                .filter(|(_, d)| **d != 0.0)
                .map(|(r, d)| (r, *d > 0.0))
                .collect()
        }
    }
}

/// Exact two-sided p from the null distribution of W+. Average ranks are
/// multiples of 1/2, so doubled ranks are integers and the distribution is
/// a subset-sum count over them.
fn exact_p(ranks: &[f64], statistic: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let observed = (statistic * 2.0).round() as usize;
    // sign assignments whose min(W+, W-) is at most the observed statistic
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s).min(total - *s) <= observed)
        .map(|(_, c)| *c)
        .sum();
    let all = 2f64.powi(doubled.len() as i32);
    (extreme as f64 / all).min(1.0)
}

fn normal_p(ranks: &[f64], statistic: f64) -> f64 {
    let mean = ranks.iter().sum::<f64>() / 2.0;
    // permutation variance of W+; equals n(n+1)(2n+1)/24 minus the tie term
    let variance = ranks.iter().map(|r| r * r).sum::<f64>() / 4.0;
    if variance <= 0.0 {
        return 1.0;
    }
    let z = (statistic - mean + 0.5) / variance.sqrt();
    if z >= 0.0 {
        return 1.0;
    }
    let normal = Normal::standard();
    (2.0 * normal.cdf(z)).min(1.0)
}

pub fn wilcoxon_signed_rank(differences: &[f64]) -> Result<WilcoxonResult, WilcoxonError> {
    wilcoxon_signed_rank_with(differences, ZeroMethod::Wilcox)
}

pub fn wilcoxon_signed_rank_with(
    differences: &[f64],
    zero_method: ZeroMethod,
) -> Result<WilcoxonResult, WilcoxonError> {
    if differences.is_empty() {
        return Err(WilcoxonError::Empty);
    }
    if differences.iter().any(|d| !d.is_finite()) {
        return Err(WilcoxonError::NonFinite);
    }
    let signed = signed_ranks(differences, zero_method);
    let n = signed.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            w_minus: 0.0,
            statistic: 0.0,
            n: 0,
            p_value: 1.0,
            method: PValueMethod::Degenerate,
            degenerate: true,
        });
    }
    let w_plus: f64 = signed.iter().filter(|(_, pos)| *pos).map(|(r, _)| r).sum();
    let w_minus: f64 = signed.iter().filter(|(_, pos)| !*pos).map(|(r, _)| r).sum();
    let statistic = w_plus.min(w_minus);
    let ranks: Vec<f64> = signed.iter().map(|(r, _)| *r).collect();
    let (p_value, method) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, statistic), PValueMethod::Exact)
    } else {
        (normal_p(&ranks, statistic), PValueMethod::Normal)
    };
    Ok(WilcoxonResult { w_plus, w_minus, statistic, n, p_value, method, degenerate: false })
}
