#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use formfill::bayes::{BayesNet, Cpt, Dag};
use formfill::model::{build, BuildConfig, ModelBundle};
use formfill::schema::{load_dataset, load_schema, Dataset, FormSchema, LoadOptions};
use formfill::table::Variable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn company_schema() -> FormSchema {
    load_schema(&fixture("company_schema.json")).unwrap()
}

/// The six historical registrations.
pub fn company_train() -> Dataset {
    load_dataset(
        &company_schema(),
        &fixture("company_train.csv"),
        &LoadOptions::default(),
    )
    .unwrap()
    .0
}

/// The six registrations plus the later seventh.
pub fn company_all() -> Dataset {
    load_dataset(
        &company_schema(),
        &fixture("company_all.csv"),
        &LoadOptions::default(),
    )
    .unwrap()
    .0
}

pub fn company_config() -> BuildConfig {
    BuildConfig::load(&fixture("company_config.toml")).unwrap()
}

pub fn company_bundle() -> ModelBundle {
    build(&company_train(), &company_config()).unwrap().0
}

pub fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Random network: up to `max_nodes` nodes with 2..=`max_states` states, edges only
/// from lower to higher index, Dirichlet-ish CPT rows (some exact zeros).
pub fn random_net(rng: &mut ChaCha8Rng, max_nodes: usize, max_states: usize) -> BayesNet {
    let n = rng.gen_range(1..=max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let vars: Vec<Variable> = names
        .iter()
        .map(|nm| {
            let k = rng.gen_range(2..=max_states);
            Variable::new(nm.clone(), (0..k).map(|s| format!("s{s}")).collect())
        })
        .collect();
    let mut edges = Vec::new();
    for c in 1..n {
        for p in 0..c {
            if rng.gen_bool(0.4) && edges.iter().filter(|&&(_, cc)| cc == c).count() < 3 {
                edges.push((p, c));
            }
        }
    }
    let pairs: Vec<(&str, &str)> = edges
        .iter()
        .map(|&(p, c)| (names[p].as_str(), names[c].as_str()))
        .collect();
    let dag = Dag::from_edges(names.clone(), &pairs).unwrap();
    let cpts = (0..n)
        .map(|v| {
            let parents: Vec<usize> = dag.parents_of(v).to_vec();
            let q: usize = parents.iter().map(|&p| vars[p].card()).product();
            let rows = (0..q)
                .map(|_| {
                    let mut row: Vec<f64> = (0..vars[v].card())
                        .map(|_| {
                            if rng.gen_bool(0.1) {
                                0.0
                            } else {
                                rng.gen_range(0.01..1.0)
                            }
                        })
                        .collect();
                    if row.iter().all(|&x| x == 0.0) {
                        row[0] = 1.0;
                    }
                    let z: f64 = row.iter().sum();
                    row.iter_mut().for_each(|x| *x /= z);
                    row
                })
                .collect();
            Cpt {
                variable: names[v].clone(),
                parents: parents.iter().map(|&p| names[p].clone()).collect(),
                rows,
            }
        })
        .collect();
    BayesNet::new(vars, dag, cpts).unwrap()
}

/// Joint probability of one full assignment, straight from the CPTs.
pub fn joint(net: &BayesNet, assign: &[usize]) -> f64 {
    (0..net.variables.len())
        .map(|v| {
            let mut row = 0;
            for &p in net.dag.parents_of(v) {
                row = row * net.variables[p].card() + assign[p];
            }
            net.cpts[v].rows[row][assign[v]]
        })
        .product()
}

/// `P(target | evidence)` by summing the full joint over every assignment.
/// `None` when the evidence has probability zero.
pub fn enumerate_posterior(
    net: &BayesNet,
    evidence: &[(usize, usize)],
    target: usize,
) -> Option<Vec<f64>> {
    let cards: Vec<usize> = net.variables.iter().map(|v| v.card()).collect();
    let mut out = vec![0.0; cards[target]];
    let mut assign = vec![0usize; cards.len()];
    loop {
        if evidence.iter().all(|&(v, s)| assign[v] == s) {
            out[assign[target]] += joint(net, &assign);
        }
        let mut i = 0;
        loop {
            if i == cards.len() {
                let z: f64 = out.iter().sum();
                return (z > 0.0).then(|| out.iter().map(|x| x / z).collect());
            }
            assign[i] += 1;
            if assign[i] < cards[i] {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three-node textbook network A -> B, A -> C, B -> C over binary variables.
pub fn textbook_net() -> BayesNet {
    let v = |n: &str, s: &str| Variable::new(n, vec![s.to_string(), format!("not-{s}")]);
    let dag = Dag::from_edges(
        vec!["A".into(), "B".into(), "C".into()],
        &[("A", "B"), ("A", "C"), ("B", "C")],
    )
    .unwrap();
    BayesNet::new(
        vec![v("A", "a"), v("B", "b"), v("C", "c")],
        dag,
        vec![
            Cpt {
                variable: "A".into(),
                parents: vec![],
                rows: vec![vec![0.2, 0.8]],
            },
            Cpt {
                variable: "B".into(),
                parents: vec!["A".into()],
                rows: vec![vec![0.4, 0.6], vec![0.1, 0.9]],
            },
            Cpt {
                variable: "C".into(),
                parents: vec!["A".into(), "B".into()],
                rows: vec![
                    vec![0.9, 0.1],
                    vec![0.4, 0.6],
                    vec![0.4, 0.6],
                    vec![0.1, 0.9],
                ],
            },
        ],
    )
    .unwrap()
}

/// Each non-target node becomes evidence with probability `p`, in a random state.
pub fn random_evidence(
    r: &mut ChaCha8Rng,
    net: &BayesNet,
    target: usize,
    p: f64,
) -> Vec<(usize, usize)> {
    let mut ev = Vec::new();
    for v in 0..net.variables.len() {
        if v != target && r.gen_bool(p) {
            ev.push((v, r.gen_range(0..net.variables[v].card())));
        }
    }
    ev
}
