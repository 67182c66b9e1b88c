//! Comparison suggesters: most frequent values, association rules, and
//! first-letter filtering.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{self, PreprocessConfig, PreprocessModel, UNKNOWN};
use crate::schema::Dataset;
use crate::table::DiscreteTable;

/// Per-field value frequencies from raw training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mfm {
    /// Values ranked by count descending, then lexicographically.
    ranked: BTreeMap<String, Vec<(String, usize)>>,
}

impl Mfm {
    pub fn train(dataset: &Dataset) -> Self {
        let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for inst in &dataset.instances {
            for (field, value) in &inst.values {
                if let Some(v) = value.as_deref().filter(|v| !v.is_empty() && *v != UNKNOWN) {
                    *counts
                        .entry(field.clone())
                        .or_default()
                        .entry(v.to_string())
                        .or_default() += 1;
                }
            }
        }
        let ranked = counts
            .into_iter()
            .map(|(field, c)| {
                let mut v: Vec<(String, usize)> = c.into_iter().collect();
                v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                (field, v)
            })
            .collect();
        Mfm { ranked }
    }

    pub fn counts(&self, target: &str) -> &[(String, usize)] {
        self.ranked.get(target).map_or(&[], Vec::as_slice)
    }

    pub fn suggest(&self, target: &str, n: usize) -> Vec<String> {
        self.counts(target)
            .iter()
            .take(n)
            .map(|(v, _)| v.clone())
            .collect()
    }
}

/// Most frequent values of `target` in the training data.
pub fn mfm_suggest(dataset: &Dataset, target: &str, n: usize) -> Vec<String> {
    Mfm::train(dataset).suggest(target, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    /// Sorted by field name.
    pub antecedent: Vec<(String, String)>,
    pub consequent: (String, String),
    pub support: usize,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmConfig {
    /// Absolute row count.
    pub min_support: usize,
    pub min_confidence: f64,
    pub max_antecedent: usize,
}

impl Default for ArmConfig {
    fn default() -> Self {
        ArmConfig {
            min_support: 5,
            min_confidence: 0.3,
            max_antecedent: 3,
        }
    }
}

type Item = (u32, u32);

/// Sorted row ids shared by two sorted lists.
fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Frequent itemsets (at most one item per variable) with their support counts.
/// [`UNKNOWN`] values never form items.
fn frequent_itemsets(
    table: &DiscreteTable,
    min_support: usize,
    max_size: usize,
) -> HashMap<Vec<Item>, usize> {
    let mut level: Vec<(Vec<Item>, Vec<u32>)> = Vec::new();
    for (v, var) in table.variables.iter().enumerate() {
        let unknown = var.code(UNKNOWN);
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); var.card()];
        for (r, &c) in table.columns[v].iter().enumerate() {
            rows[c as usize].push(r as u32);
        }
        for (c, ids) in rows.into_iter().enumerate() {
            if Some(c as u32) != unknown && ids.len() >= min_support.max(1) {
                level.push((vec![(v as u32, c as u32)], ids));
            }
        }
    }

    let mut all: HashMap<Vec<Item>, usize> = HashMap::new();
    let mut size = 1;
    while !level.is_empty() {
        for (set, ids) in &level {
            all.insert(set.clone(), ids.len());
        }
        if size == max_size {
            break;
        }
        let members: HashSet<&Vec<Item>> = level.iter().map(|(s, _)| s).collect();
        let mut next = Vec::new();
        for (i, (a, ta)) in level.iter().enumerate() {
            for (b, tb) in &level[i + 1..] {
                if a[..size - 1] != b[..size - 1] {
                    break;
                }
                let (x, y) = (a[size - 1], b[size - 1]);
                if x.0 == y.0 {
                    continue;
                }
                let mut cand = a.clone();
                cand.push(y);
                let closed = (0..size - 1).all(|skip| {
                    let sub: Vec<Item> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &it)| it)
                        .collect();
                    members.contains(&sub)
                });
                if !closed {
                    continue;
                }
                let ids = intersect(ta, tb);
                if ids.len() >= min_support {
                    next.push((cand, ids));
                }
            }
        }
        level = next;
        size += 1;
    }
    all
}

/// Mines rules `antecedent -> (field, value)` with Apriori over the discrete table.
/// Rules with an empty antecedent are included.
pub fn arm_train(table: &DiscreteTable, cfg: &ArmConfig) -> Vec<AssociationRule> {
    if table.n_rows() == 0 {
        return Vec::new();
    }
    let sets = frequent_itemsets(table, cfg.min_support, cfg.max_antecedent + 1);
    let n = table.n_rows();
    let name = |it: &Item| {
        let var = &table.variables[it.0 as usize];
        (var.name.clone(), var.states[it.1 as usize].clone())
    };
    let mut rules = Vec::new();
    for (set, &support) in &sets {
        for (k, consequent) in set.iter().enumerate() {
            let ante: Vec<Item> = set
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &it)| it)
                .collect();
            let ante_support = if ante.is_empty() { n } else { sets[&ante] };
            let confidence = support as f64 / ante_support as f64;
            if confidence >= cfg.min_confidence {
                let mut antecedent: Vec<(String, String)> = ante.iter().map(name).collect();
                antecedent.sort();
                rules.push(AssociationRule {
                    antecedent,
                    consequent: name(consequent),
                    support,
                    confidence,
                });
            }
        }
    }
    rules.sort_by(|a, b| (&a.consequent, &a.antecedent).cmp(&(&b.consequent, &b.antecedent)));
    rules
}

fn rank_consequents<'a>(
    matching: impl Iterator<Item = &'a AssociationRule>,
    n: usize,
) -> Vec<String> {
    let mut best: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in matching {
        let e = best
            .entry(r.consequent.1.as_str())
            .or_insert((r.confidence, r.support));
        if (r.confidence, r.support) > *e {
            *e = (r.confidence, r.support);
        }
    }
    let mut ranked: Vec<(&str, (f64, usize))> = best.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1 .0
            .total_cmp(&a.1 .0)
            .then(b.1 .1.cmp(&a.1 .1))
            .then_with(|| a.0.cmp(b.0))
    });
    ranked
        .into_iter()
        .take(n)
        .map(|(v, _)| v.to_string())
        .collect()
}

/// Consequent values of matching rules, best rule per value, ranked by
/// (confidence, support) descending then value.
pub fn arm_suggest(
    rules: &[AssociationRule],
    filled: &BTreeMap<String, String>,
    target: &str,
    n: usize,
) -> Vec<String> {
    rank_consequents(
        rules.iter().filter(|r| {
            r.consequent.0 == target && r.antecedent.iter().all(|(f, v)| filled.get(f) == Some(v))
        }),
        n,
    )
}

type Antecedent = Vec<(String, String)>;

/// Association rules together with the preprocessing that produced their items.
#[derive(Clone, Debug)]
pub struct Arm {
    pub preprocess: PreprocessModel,
    pub rules: Vec<AssociationRule>,
    max_antecedent: usize,
    /// Rule positions by consequent field and antecedent.
    index: HashMap<String, HashMap<Antecedent, Vec<usize>>>,
}

impl Arm {
    pub fn train(dataset: &Dataset, pre: &PreprocessConfig, cfg: &ArmConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&cfg.min_confidence) {
            return Err(Error::Config(format!(
                "min_confidence must be in [0,1], got {}",
                cfg.min_confidence
            )));
        }
        let (model, fitted) = preprocess::fit(dataset, pre)?;
        let rules = arm_train(&fitted.table, cfg);
        let mut index: HashMap<String, HashMap<Antecedent, Vec<usize>>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            index
                .entry(r.consequent.0.clone())
                .or_default()
                .entry(r.antecedent.clone())
                .or_default()
                .push(i);
        }
        Ok(Arm {
            preprocess: model,
            rules,
            max_antecedent: cfg.max_antecedent,
            index,
        })
    }

    /// Suggests from raw filled values.
    pub fn suggest(
        &self,
        filled: &BTreeMap<String, String>,
        target: &str,
        n: usize,
    ) -> Vec<String> {
        let Some(by_antecedent) = self.index.get(target) else {
            return Vec::new();
        };
        let pairs: Vec<(String, String)> = self
            .preprocess
            .apply(filled)
            .into_iter()
            .filter(|(f, v)| f != target && v != UNKNOWN)
            .collect();
        // Every subset of the filled pairs up to the antecedent limit, in sorted order.
        let mut matching = Vec::new();
        let mut stack: Vec<(usize, Antecedent)> = vec![(0, Vec::new())];
        while let Some((from, subset)) = stack.pop() {
            if let Some(ids) = by_antecedent.get(&subset) {
                matching.extend(ids.iter().map(|&i| &self.rules[i]));
            }
            if subset.len() < self.max_antecedent {
                for (j, pair) in pairs.iter().enumerate().skip(from) {
                    let mut next = subset.clone();
                    next.push(pair.clone());
                    stack.push((j + 1, next));
                }
            }
        }
        rank_consequents(matching.into_iter(), n)
    }
}

/// Candidates in alphabetical order (case-insensitive) whose first character
/// matches `letter` case-insensitively.
pub fn fls_suggest(candidates: &[String], letter: char) -> Vec<String> {
    let want: Vec<char> = letter.to_lowercase().collect();
    let mut out: Vec<String> = candidates
        .iter()
        .filter(|c| {
            c.chars()
                .next()
                .is_some_and(|first| first.to_lowercase().eq(want.iter().copied()))
        })
        .cloned()
        .collect();
    out.sort_by(|a, b| {
        a.to_lowercase()
            .cmp(&b.to_lowercase())
            .then_with(|| a.cmp(b))
    });
    out
}
