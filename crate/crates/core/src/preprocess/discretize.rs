//! Entropy-based supervised discretization with the MDL stopping rule
//! (Fayyad & Irani), plus the equal-frequency fallback and interval labels.

/// Bins used when the MDL rule accepts no split.
pub const FALLBACK_BINS: usize = 4;

/// Shannon entropy in bits of a count vector.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn distinct_classes(counts: &[usize]) -> usize {
    counts.iter().filter(|&&c| c > 0).count()
}

/// Cut points chosen by recursive information-gain splitting, each split accepted
/// only if it passes the MDL criterion. Returns an empty list if none is accepted.
pub fn mdlp_cuts(values: &[f64], classes: &[u32]) -> Vec<f64> {
    assert_eq!(
        values.len(),
        classes.len(),
        "columns must have equal length"
    );
    let mut pairs: Vec<(f64, u32)> = values
        .iter()
        .copied()
        .zip(classes.iter().copied())
        .filter(|(v, _)| v.is_finite())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n_classes = pairs.iter().map(|p| p.1 as usize + 1).max().unwrap_or(0);
    let mut cuts = Vec::new();
    split_range(&pairs, n_classes, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    cuts
}

fn split_range(pairs: &[(f64, u32)], n_classes: usize, cuts: &mut Vec<f64>) {
    let n = pairs.len();
    if n < 2 {
        return;
    }
    let mut total = vec![0usize; n_classes];
    for p in pairs {
        total[p.1 as usize] += 1;
    }
    let ent_s = entropy(&total);
    if ent_s == 0.0 {
        return;
    }

    let mut left = vec![0usize; n_classes];
    let mut best: Option<(f64, usize)> = None;
    for i in 1..n {
        left[pairs[i - 1].1 as usize] += 1;
        if pairs[i - 1].0 == pairs[i].0 {
            continue;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let e = (i as f64 * entropy(&left) + (n - i) as f64 * entropy(&right)) / n as f64;
        if best.is_none_or(|(b, _)| e < b) {
            best = Some((e, i));
        }
    }
    let Some((split_entropy, at)) = best else {
        return;
    };

    let mut left = vec![0usize; n_classes];
    for p in &pairs[..at] {
        left[p.1 as usize] += 1;
    }
    let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
    let gain = ent_s - split_entropy;
    let k = distinct_classes(&total) as f64;
    let k1 = distinct_classes(&left) as f64;
    let k2 = distinct_classes(&right) as f64;
    let delta =
        (3f64.powf(k) - 2.0).log2() - (k * ent_s - k1 * entropy(&left) - k2 * entropy(&right));
    let nf = n as f64;
    let threshold = (nf - 1.0).log2() / nf + delta / nf;
    if gain <= threshold {
        return;
    }
    cuts.push((pairs[at - 1].0 + pairs[at].0) / 2.0);
    split_range(&pairs[..at], n_classes, cuts);
    split_range(&pairs[at..], n_classes, cuts);
}

/// Quantile cuts placed on value changes so tied values share a bin.
pub fn equal_frequency_cuts(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut cuts: Vec<f64> = Vec::new();
    if n < 2 || bins < 2 {
        return cuts;
    }
    for q in 1..bins {
        let mut idx = (q * n / bins).clamp(1, n - 1);
        while idx < n && sorted[idx - 1] == sorted[idx] {
            idx += 1;
        }
        if idx >= n {
            continue;
        }
        let cut = (sorted[idx - 1] + sorted[idx]) / 2.0;
        if cuts.last().is_none_or(|&last| cut > last) {
            cuts.push(cut);
        }
    }
    cuts
}

/// MDL cuts, or equal-frequency cuts when the column varies but no split is accepted.
pub fn discretize_numeric(values: &[f64], classes: &[u32]) -> Vec<f64> {
    let cuts = mdlp_cuts(values, classes);
    if !cuts.is_empty() {
        return cuts;
    }
    equal_frequency_cuts(values, FALLBACK_BINS)
}

/// Index of the half-open interval containing `x`.
pub fn interval_index(cuts: &[f64], x: f64) -> usize {
    cuts.partition_point(|&c| c <= x)
}

/// Canonical labels: `(-inf,c0)`, `[c0,c1)`, ..., `[ck,inf)`; `(-inf,inf)` with no cuts.
pub fn interval_labels(cuts: &[f64]) -> Vec<String> {
    if cuts.is_empty() {
        return vec!["(-inf,inf)".to_string()];
    }
    let mut labels = Vec::with_capacity(cuts.len() + 1);
    labels.push(format!("(-inf,{})", cuts[0]));
    for w in cuts.windows(2) {
        labels.push(format!("[{},{})", w[0], w[1]));
    }
    labels.push(format!("[{},inf)", cuts[cuts.len() - 1]));
    labels
}
