//! Exact posterior inference by variable elimination.
//!
//! Nodes that are not ancestors of the target or of an evidence node are
//! barren and dropped before elimination. The remaining hidden variables are
//! summed out in min-fill order, ties broken by name.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::net::BayesNet;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Posterior {
    /// Distribution over the target's universe, in universe order.
    pub probs: Vec<f64>,
    /// The evidence had probability zero; `probs` is the target's prior instead.
    pub zero_evidence: bool,
}

/// Table over a sorted set of variables; the last variable varies fastest.
#[derive(Clone, Debug)]
struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl Factor {
    fn scalar(v: f64) -> Self {
        Factor {
            vars: vec![],
            cards: vec![],
            values: vec![v],
        }
    }

    /// CPT of `node` with evidence variables fixed.
    fn from_cpt(net: &BayesNet, node: usize, evidence: &[Option<u32>]) -> Self {
        let parents = net.dag.parents_of(node);
        let mut family: Vec<usize> = parents.to_vec();
        family.push(node);
        let mut vars: Vec<usize> = family
            .iter()
            .copied()
            .filter(|&v| evidence[v].is_none())
            .collect();
        vars.sort_unstable();
        let cards: Vec<usize> = vars.iter().map(|&v| net.variables[v].card()).collect();
        let total: usize = cards.iter().product();
        let mut assign = vec![0u32; vars.len()];
        let mut values = Vec::with_capacity(total);
        let state_of = |v: usize, assign: &[u32]| -> u32 {
            evidence[v].unwrap_or_else(|| assign[vars.binary_search(&v).unwrap()])
        };
        for _ in 0..total {
            let p = net.cpt_entry(
                node,
                parents.iter().map(|&p| state_of(p, &assign)),
                state_of(node, &assign),
            );
            values.push(p);
            for j in (0..assign.len()).rev() {
                assign[j] += 1;
                if (assign[j] as usize) < cards[j] {
                    break;
                }
                assign[j] = 0;
            }
        }
        Factor {
            vars,
            cards,
            values,
        }
    }

    fn product(&self, other: &Factor) -> Factor {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|x| x == v)
                    .map(|i| self.cards[i])
                    .unwrap_or_else(|| other.cards[other.vars.iter().position(|x| x == v).unwrap()])
            })
            .collect();
        let stride_in = |f: &Factor| -> Vec<usize> {
            let s = strides(&f.cards);
            vars.iter()
                .map(|v| f.vars.iter().position(|x| x == v).map_or(0, |i| s[i]))
                .collect()
        };
        let (sa, sb) = (stride_in(self), stride_in(other));
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut assign = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..total {
            values.push(self.values[ia] * other.values[ib]);
            for j in (0..vars.len()).rev() {
                assign[j] += 1;
                ia += sa[j];
                ib += sb[j];
                if assign[j] < cards[j] {
                    break;
                }
                ia -= sa[j] * cards[j];
                ib -= sb[j] * cards[j];
                assign[j] = 0;
            }
        }
        Factor {
            vars,
            cards,
            values,
        }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let p = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("variable in scope");
        let outer: usize = self.cards[..p].iter().product();
        let inner: usize = self.cards[p + 1..].iter().product();
        let card = self.cards[p];
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for x in 0..card {
                let base = (o * card + x) * inner;
                let out = &mut values[o * inner..(o + 1) * inner];
                for (slot, v) in out.iter_mut().zip(&self.values[base..base + inner]) {
                    *slot += v;
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(p);
        cards.remove(p);
        Factor {
            vars,
            cards,
            values,
        }
    }
}

/// Picks the hidden variable whose elimination adds the fewest fill edges.
fn min_fill_next(net: &BayesNet, hidden: &BTreeSet<usize>, factors: &[Factor]) -> usize {
    let mut best: Option<(usize, &str, usize)> = None;
    for &h in hidden {
        let mut neigh: BTreeSet<usize> = BTreeSet::new();
        for f in factors.iter().filter(|f| f.vars.contains(&h)) {
            neigh.extend(f.vars.iter().copied().filter(|&v| v != h));
        }
        let neigh: Vec<usize> = neigh.into_iter().collect();
        let mut fill = 0;
        for (i, &a) in neigh.iter().enumerate() {
            for &b in &neigh[i + 1..] {
                if !factors
                    .iter()
                    .any(|f| f.vars.contains(&a) && f.vars.contains(&b))
                {
                    fill += 1;
                }
            }
        }
        let name = net.dag.nodes()[h].as_str();
        if best.is_none_or(|(bf, bn, _)| fill < bf || (fill == bf && name < bn)) {
            best = Some((fill, name, h));
        }
    }
    best.expect("hidden set is non-empty").2
}

fn eliminate(net: &BayesNet, evidence: &[Option<u32>], target: usize) -> Vec<f64> {
    let n = net.dag.len();
    // Ancestral closure of the query and evidence nodes.
    let mut relevant = vec![false; n];
    let mut stack: Vec<usize> = (0..n)
        .filter(|&v| v == target || evidence[v].is_some())
        .collect();
    while let Some(v) = stack.pop() {
        if relevant[v] {
            continue;
        }
        relevant[v] = true;
        stack.extend(
            net.dag
                .parents_of(v)
                .iter()
                .copied()
                .filter(|&p| !relevant[p]),
        );
    }

    let mut factors: Vec<Factor> = (0..n)
        .filter(|&v| relevant[v])
        .map(|v| Factor::from_cpt(net, v, evidence))
        .collect();
    let mut hidden: BTreeSet<usize> = (0..n)
        .filter(|&v| relevant[v] && v != target && evidence[v].is_none())
        .collect();

    while !hidden.is_empty() {
        let h = min_fill_next(net, &hidden, &factors);
        hidden.remove(&h);
        let (with, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&h));
        factors = rest;
        let merged = with
            .iter()
            .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
        factors.push(merged.sum_out(h));
    }

    let joint = factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
    debug_assert_eq!(joint.vars, vec![target]);
    joint.values
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let z: f64 = v.iter().sum();
    if !(z > 0.0 && z.is_finite()) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= z);
    Some(v)
}

impl BayesNet {
    /// Posterior over `target` given state codes for evidence nodes.
    pub fn posterior_by_index(&self, evidence: &[(usize, u32)], target: usize) -> Posterior {
        let mut ev = vec![None; self.dag.len()];
        for &(v, s) in evidence {
            if v != target {
                ev[v] = Some(s);
            }
        }
        if let Some(probs) = normalize(eliminate(self, &ev, target)) {
            return Posterior {
                probs,
                zero_evidence: false,
            };
        }
        let prior =
            normalize(eliminate(self, &vec![None; self.dag.len()], target)).unwrap_or_else(|| {
                vec![1.0 / self.variables[target].card() as f64; self.variables[target].card()]
            });
        Posterior {
            probs: prior,
            zero_evidence: true,
        }
    }

    /// Exact `P(target | evidence)`; unobserved nodes are marginalized out.
    pub fn infer_posterior(
        &self,
        evidence: &BTreeMap<String, String>,
        target: &str,
    ) -> Result<Posterior> {
        let t = self.index(target).ok_or_else(|| Error::UnknownField {
            name: target.to_string(),
            hint: None,
        })?;
        let mut ev = Vec::with_capacity(evidence.len());
        for (field, value) in evidence {
            if field == target {
                return Err(Error::InvalidRequest(format!(
                    "target `{target}` is also evidence"
                )));
            }
            let v = self.index(field).ok_or_else(|| Error::UnknownField {
                name: field.clone(),
                hint: None,
            })?;
            let s = self.variables[v].code(value).ok_or_else(|| {
                Error::InvalidRequest(format!("`{value}` is not a state of `{field}`"))
            })?;
            ev.push((v, s));
        }
        Ok(self.posterior_by_index(&ev, t))
    }
}
