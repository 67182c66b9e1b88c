//! BIC scoring. The score decomposes into one term per (child, parent set) family.

use std::collections::HashMap;

use super::dag::Dag;
use crate::error::{Error, Result};
use crate::table::DiscreteTable;

/// Number of parent configurations, or `None` on overflow.
pub(crate) fn config_count(table: &DiscreteTable, parents: &[usize]) -> Option<u64> {
    parents.iter().try_fold(1u64, |acc, &p| {
        acc.checked_mul(table.variables[p].card() as u64)
    })
}

/// Mixed-radix index of each row's parent configuration (first parent most significant).
pub(crate) fn config_indices(table: &DiscreteTable, parents: &[usize]) -> Vec<u64> {
    let mut idx = vec![0u64; table.n_rows()];
    for &p in parents {
        let card = table.variables[p].card() as u64;
        for (slot, &v) in idx.iter_mut().zip(&table.columns[p]) {
            *slot = *slot * card + v as u64;
        }
    }
    idx
}

/// Log-likelihood of `child` given `parents` under maximum-likelihood parameters.
pub fn family_log_likelihood(table: &DiscreteTable, child: usize, parents: &[usize]) -> f64 {
    let r = table.variables[child].card() as u64;
    let cfg = config_indices(table, parents);
    let mut keys: Vec<u64> = cfg
        .iter()
        .zip(&table.columns[child])
        .map(|(&c, &v)| c * r + v as u64)
        .collect();
    keys.sort_unstable();

    let mut ll = 0.0;
    let mut i = 0;
    while i < keys.len() {
        let config = keys[i] / r;
        let start = i;
        let mut cells: Vec<usize> = Vec::new();
        while i < keys.len() && keys[i] / r == config {
            let key = keys[i];
            let run = keys[i..].iter().take_while(|&&k| k == key).count();
            cells.push(run);
            i += run;
        }
        let n_j = (i - start) as f64;
        for c in cells {
            let c = c as f64;
            ll += c * (c / n_j).ln();
        }
    }
    ll
}

/// Free parameters of the family: `q * (r - 1)`.
pub fn family_parameters(table: &DiscreteTable, child: usize, parents: &[usize]) -> f64 {
    let q: f64 = parents
        .iter()
        .map(|&p| table.variables[p].card() as f64)
        .product();
    q * (table.variables[child].card() as f64 - 1.0)
}

/// BIC contribution of one family.
pub fn family_score(table: &DiscreteTable, child: usize, parents: &[usize]) -> f64 {
    let n = table.n_rows() as f64;
    family_log_likelihood(table, child, parents)
        - n.ln() / 2.0 * family_parameters(table, child, parents)
}

/// Maps DAG node indices onto table columns by name.
pub(crate) fn column_map(dag: &Dag, table: &DiscreteTable) -> Result<Vec<usize>> {
    dag.nodes()
        .iter()
        .map(|name| {
            table
                .index_of(name)
                .ok_or_else(|| Error::Data(format!("data has no column for node `{name}`")))
        })
        .collect()
}

/// Total BIC of a DAG on the data; higher is better.
pub fn bic_score(dag: &Dag, table: &DiscreteTable) -> Result<f64> {
    if table.n_rows() == 0 {
        return Err(Error::Data("cannot score a DAG on empty data".into()));
    }
    let cols = column_map(dag, table)?;
    Ok((0..dag.len())
        .map(|v| {
            let ps: Vec<usize> = dag.parents_of(v).iter().map(|&p| cols[p]).collect();
            family_score(table, cols[v], &ps)
        })
        .sum())
}

/// Memoized family scores keyed by (child, sorted parents) in table column indices.
#[derive(Debug, Default)]
pub struct ScoreCache {
    scores: HashMap<(usize, Vec<usize>), f64>,
    pub evaluations: usize,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn family(&mut self, table: &DiscreteTable, child: usize, parents: &[usize]) -> f64 {
        let key = (child, parents.to_vec());
        if let Some(&s) = self.scores.get(&key) {
            return s;
        }
        self.evaluations += 1;
        let s = family_score(table, child, parents);
        self.scores.insert(key, s);
        s
    }

    /// Sum of cached family scores for a DAG whose nodes are the table columns in order.
    pub fn total(&mut self, table: &DiscreteTable, dag: &Dag) -> f64 {
        (0..dag.len())
            .map(|v| self.family(table, v, dag.parents_of(v)))
            .sum()
    }
}
