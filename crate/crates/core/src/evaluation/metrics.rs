//! Ranking metrics and the rank-sum significance test.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// `1/k` for the 1-based position `k` of `truth` in `list`, 0 when absent.
pub fn reciprocal_rank(list: &[String], truth: &str) -> f64 {
    list.iter()
        .position(|v| v == truth)
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Mean reciprocal rank over provided suggestions (`None` entries are withheld ones
/// and do not count). `None` when nothing was provided.
pub fn mrr(outcomes: &[Option<f64>]) -> Option<f64> {
    let provided: Vec<f64> = outcomes.iter().flatten().copied().collect();
    (!provided.is_empty()).then(|| provided.iter().sum::<f64>() / provided.len() as f64)
}

/// Share of targets that received a suggestion.
pub fn pcr(provided: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::Evaluation(
            "coverage is undefined for zero targets".into(),
        ));
    }
    if provided > total {
        return Err(Error::Evaluation(format!(
            "{provided} suggestions for {total} targets"
        )));
    }
    Ok(provided as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MannWhitney {
    /// Statistic of the first sample: pairs where it is larger, ties counting one half.
    pub u: f64,
    /// Two-sided, normal approximation with tie and continuity corrections.
    pub p_value: f64,
}

/// Average ranks (1-based) with ties sharing their mean rank, plus the tie term
/// `sum(t^3 - t)` over tie groups.
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Evaluation(
            "rank-sum test needs two non-empty samples".into(),
        ));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&all);
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let u2 = n1 * n2 - u1;

    let n = n1 + n2;
    let mu = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = (u1.max(u2) - mu - 0.5) / var.sqrt();
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * std.sf(z)).min(1.0)
    };
    Ok(MannWhitney { u: u1, p_value })
}
