//! k-modes clustering of categorical rows and elbow-based choice of k.
//!
//! Identical rows always land in the same cluster, so the work is done on
//! distinct row patterns weighted by their multiplicity.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct KModes {
    /// One mode vector per cluster.
    pub centroids: Vec<Vec<u32>>,
    /// Cluster id per input row.
    pub assignment: Vec<usize>,
    /// Total mismatch count after each iteration.
    pub objective_history: Vec<u64>,
}

impl KModes {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn objective(&self) -> u64 {
        self.objective_history.last().copied().unwrap_or(0)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Number of positions where two rows differ.
pub fn mismatches(a: &[u32], b: &[u32]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

struct Patterns {
    rows: Vec<Vec<u32>>,
    weights: Vec<u64>,
    of_row: Vec<usize>,
}

fn patterns(rows: &[Vec<u32>]) -> Patterns {
    let mut index: HashMap<&[u32], usize> = HashMap::new();
    let mut p = Patterns {
        rows: Vec::new(),
        weights: Vec::new(),
        of_row: Vec::with_capacity(rows.len()),
    };
    for r in rows {
        let id = *index.entry(r.as_slice()).or_insert_with(|| {
            p.rows.push(r.clone());
            p.weights.push(0);
            p.rows.len() - 1
        });
        p.weights[id] += 1;
        p.of_row.push(id);
    }
    p
}

pub fn distinct_rows(rows: &[Vec<u32>]) -> usize {
    patterns(rows).rows.len()
}

fn nearest(row: &[u32], centroids: &[Vec<u32>]) -> usize {
    let mut best = (u64::MAX, 0);
    for (j, c) in centroids.iter().enumerate() {
        let d = mismatches(row, c);
        if d < best.0 {
            best = (d, j);
        }
    }
    best.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KModesConfig {
    pub max_iters: usize,
    /// Independent initializations; the run with the lowest final objective wins.
    pub n_init: usize,
}

impl Default for KModesConfig {
    fn default() -> Self {
        KModesConfig {
            max_iters: 100,
            n_init: 10,
        }
    }
}

/// Distance-weighted seeding: each further centroid is a distinct pattern drawn with
/// probability proportional to its weighted mismatch count to the nearest chosen one.
fn seed_centroids(pats: &Patterns, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    let distinct = pats.rows.len();
    let mut chosen = vec![rng.gen_range(0..distinct)];
    let mut nearest: Vec<u64> = pats
        .rows
        .iter()
        .map(|r| mismatches(r, &pats.rows[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let weights: Vec<u64> = (0..distinct)
            .map(|p| pats.weights[p] * nearest[p])
            .collect();
        let total: u64 = weights.iter().sum();
        // Every distinct pattern not yet chosen is at distance >= 1, so total > 0.
        let mut pick = rng.gen_range(0..total);
        let next = weights
            .iter()
            .position(|&w| {
                if pick < w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .expect("pick < total");
        chosen.push(next);
        for (p, d) in nearest.iter_mut().enumerate() {
            *d = (*d).min(mismatches(&pats.rows[p], &pats.rows[next]));
        }
    }
    chosen.into_iter().map(|i| pats.rows[i].clone()).collect()
}

/// Assignment per pattern, centroids and the objective after each iteration.
type RunResult = (Vec<usize>, Vec<Vec<u32>>, Vec<u64>);

/// One Lloyd-style run from the given centroids.
fn run(pats: &Patterns, mut centroids: Vec<Vec<u32>>, max_iters: usize) -> RunResult {
    let k = centroids.len();
    let distinct = pats.rows.len();
    let mut assign: Vec<usize> = vec![usize::MAX; distinct];
    let mut history = Vec::new();
    for _ in 0..max_iters.max(1) {
        let mut next: Vec<usize> = pats.rows.iter().map(|r| nearest(r, &centroids)).collect();

        loop {
            let mut members = vec![0usize; k];
            for &a in &next {
                members[a] += 1;
            }
            let Some(empty) = members.iter().position(|&m| m == 0) else {
                break;
            };
            let donor = (0..distinct)
                .filter(|&p| members[next[p]] > 1)
                .max_by(|&a, &b| {
                    let da = mismatches(&pats.rows[a], &centroids[next[a]]);
                    let db = mismatches(&pats.rows[b], &centroids[next[b]]);
                    da.cmp(&db).then(b.cmp(&a))
                })
                .expect("k <= distinct rows leaves a cluster with two patterns");
            next[donor] = empty;
            centroids[empty] = pats.rows[donor].clone();
        }

        // Weighted per-field modes; ties go to the smallest code.
        for (j, centroid) in centroids.iter_mut().enumerate() {
            for (f, slot) in centroid.iter_mut().enumerate() {
                let mut counts: HashMap<u32, u64> = HashMap::new();
                for p in (0..distinct).filter(|&p| next[p] == j) {
                    *counts.entry(pats.rows[p][f]).or_default() += pats.weights[p];
                }
                *slot = counts
                    .into_iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|(v, _)| v)
                    .expect("cluster is non-empty");
            }
        }

        let objective: u64 = (0..distinct)
            .map(|p| pats.weights[p] * mismatches(&pats.rows[p], &centroids[next[p]]))
            .sum();
        history.push(objective);
        let stable = next == assign;
        assign = next;
        if stable {
            break;
        }
    }
    (assign, centroids, history)
}

/// Clusters rows into `k` groups by Hamming distance to per-cluster modes.
///
/// An empty cluster takes over the row pattern farthest from its current centroid.
pub fn kmodes(rows: &[Vec<u32>], k: usize, seed: u64, cfg: &KModesConfig) -> Result<KModes> {
    let pats = patterns(rows);
    let distinct = pats.rows.len();
    if k == 0 || k > distinct {
        return Err(Error::TooManyClusters { k, distinct });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<RunResult> = None;
    for _ in 0..cfg.n_init.max(1) {
        let start = seed_centroids(&pats, k, &mut rng);
        let result = run(&pats, start, cfg.max_iters);
        if best.as_ref().is_none_or(|b| result.2.last() < b.2.last()) {
            best = Some(result);
        }
    }
    let (assign, centroids, objective_history) = best.expect("at least one run");
    Ok(KModes {
        centroids,
        assignment: pats.of_row.iter().map(|&p| assign[p]).collect(),
        objective_history,
    })
}

/// Average within-cluster mismatch `J(k)` for `k = 1..=min(k_max, distinct rows)`.
pub fn elbow_curve(
    rows: &[Vec<u32>],
    k_max: usize,
    seed: u64,
    cfg: &KModesConfig,
) -> Result<Vec<f64>> {
    if rows.is_empty() {
        return Err(Error::Data("cannot cluster zero rows".into()));
    }
    let k_last = k_max.min(distinct_rows(rows)).max(1);
    (1..=k_last)
        .map(|k| {
            kmodes(rows, k, seed.wrapping_add(k as u64), cfg)
                .map(|m| m.objective() as f64 / rows.len() as f64)
        })
        .collect()
}

/// Knee of a decreasing curve: the `k` (1-based) farthest below the chord joining
/// the first and last points. Returns 1 when no point lies below the chord.
pub fn knee(curve: &[f64]) -> usize {
    let n = curve.len();
    if n <= 2 {
        return 1;
    }
    let (first, last) = (curve[0], curve[n - 1]);
    let scale = first.abs().max(last.abs()).max(1.0);
    let mut best = (1e-12 * scale, 1);
    for (i, &j) in curve.iter().enumerate() {
        let chord = first + (last - first) * i as f64 / (n - 1) as f64;
        // Vertical and perpendicular gaps differ by a constant factor for a fixed chord.
        let gap = chord - j;
        if gap > best.0 {
            best = (gap, i + 1);
        }
    }
    best.1
}

/// Elbow choice of k over `1..=min(k_max, distinct rows)`.
pub fn select_k(rows: &[Vec<u32>], k_max: usize, seed: u64, cfg: &KModesConfig) -> Result<usize> {
    Ok(knee(&elbow_curve(rows, k_max, seed, cfg)?))
}
