use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dag::Dag;
use super::score::{column_map, config_count, config_indices};
use crate::error::{Error, Result};
use crate::table::{DiscreteTable, Variable};

/// Rows must sum to one within this tolerance.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Conditional probability table. `rows[j]` is the distribution of `variable` under
/// parent configuration `j` (mixed radix over `parents`, first parent most significant,
/// each parent's states in universe order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub variable: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesNet {
    /// One per DAG node, in node order.
    pub variables: Vec<Variable>,
    pub dag: Dag,
    /// One per DAG node, in node order.
    pub cpts: Vec<Cpt>,
}

impl BayesNet {
    /// Assembles a network and checks that the CPTs agree with the DAG and are normalized.
    pub fn new(variables: Vec<Variable>, dag: Dag, cpts: Vec<Cpt>) -> Result<Self> {
        let net = BayesNet {
            variables,
            dag,
            cpts,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Data(m));
        if self.variables.len() != self.dag.len() || self.cpts.len() != self.dag.len() {
            return bad("variables, DAG nodes and CPTs must have equal counts".into());
        }
        if !self.dag.is_acyclic() {
            return bad("graph has a cycle".into());
        }
        for (i, (var, cpt)) in self.variables.iter().zip(&self.cpts).enumerate() {
            if var.name != self.dag.nodes()[i] || cpt.variable != var.name {
                return bad(format!("node {i} names disagree"));
            }
            if var.states.is_empty() {
                return bad(format!("`{}` has an empty universe", var.name));
            }
            let dag_parents: Vec<&str> = self
                .dag
                .parents_of(i)
                .iter()
                .map(|&p| self.dag.nodes()[p].as_str())
                .collect();
            if cpt.parents.iter().map(String::as_str).collect::<Vec<_>>() != dag_parents {
                return bad(format!("CPT parents of `{}` differ from the DAG", var.name));
            }
            let q: usize = self
                .dag
                .parents_of(i)
                .iter()
                .map(|&p| self.variables[p].card())
                .product();
            if cpt.rows.len() != q {
                return bad(format!(
                    "CPT of `{}` has {} rows, expected {q}",
                    var.name,
                    cpt.rows.len()
                ));
            }
            for row in &cpt.rows {
                if row.len() != var.card() {
                    return bad(format!("CPT row of `{}` has wrong width", var.name));
                }
                if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return bad(format!(
                        "CPT of `{}` has a probability outside [0,1]",
                        var.name
                    ));
                }
                if (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOLERANCE {
                    return bad(format!("CPT row of `{}` does not sum to 1", var.name));
                }
            }
        }
        Ok(())
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.dag.index(name)
    }

    pub fn node_names(&self) -> &[String] {
        self.dag.nodes()
    }

    /// Direct parents of a node.
    pub fn parents(&self, field: &str) -> Result<BTreeSet<String>> {
        let i = self.index(field).ok_or_else(|| Error::UnknownField {
            name: field.to_string(),
            hint: None,
        })?;
        Ok(self
            .dag
            .parents_of(i)
            .iter()
            .map(|&p| self.dag.nodes()[p].clone())
            .collect())
    }

    /// Probability of `state` for node `node` given values of all its parents.
    pub(crate) fn cpt_entry(
        &self,
        node: usize,
        parent_states: impl Iterator<Item = u32>,
        state: u32,
    ) -> f64 {
        let mut row = 0usize;
        for (&p, s) in self.dag.parents_of(node).iter().zip(parent_states) {
            row = row * self.variables[p].card() + s as usize;
        }
        self.cpts[node].rows[row][state as usize]
    }
}

/// Estimates CPTs with additive smoothing: `(count + alpha) / (total + alpha * |universe|)`.
/// With `alpha = 0`, rows without data are uniform.
pub fn fit_cpts(dag: &Dag, table: &DiscreteTable, alpha: f64) -> Result<BayesNet> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!(
            "smoothing alpha must be >= 0, got {alpha}"
        )));
    }
    let cols = column_map(dag, table)?;
    let variables: Vec<Variable> = cols.iter().map(|&c| table.variables[c].clone()).collect();
    let mut cpts = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let parents: Vec<usize> = dag.parents_of(v).iter().map(|&p| cols[p]).collect();
        let q = config_count(table, &parents)
            .filter(|&q| q <= usize::MAX as u64 / 2)
            .ok_or_else(|| Error::Data(format!("CPT of `{}` is too large", dag.nodes()[v])))?
            as usize;
        let r = variables[v].card();
        let mut counts = vec![0f64; q * r];
        let cfg = config_indices(table, &parents);
        for (&j, &x) in cfg.iter().zip(&table.columns[cols[v]]) {
            counts[j as usize * r + x as usize] += 1.0;
        }
        let rows = counts
            .chunks(r)
            .map(|c| {
                let total: f64 = c.iter().sum();
                let denom = total + alpha * r as f64;
                if denom > 0.0 {
                    c.iter().map(|&n| (n + alpha) / denom).collect()
                } else {
                    vec![1.0 / r as f64; r]
                }
            })
            .collect();
        cpts.push(Cpt {
            variable: dag.nodes()[v].clone(),
            parents: dag
                .parents_of(v)
                .iter()
                .map(|&p| dag.nodes()[p].clone())
                .collect(),
            rows,
        });
    }
    BayesNet::new(variables, dag.clone(), cpts)
}
