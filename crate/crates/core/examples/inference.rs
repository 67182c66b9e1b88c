//! Exact posterior queries on a three-node network.

use std::collections::BTreeMap;

use formfill::bayes::{BayesNet, Cpt, Dag};
use formfill::table::Variable;

fn main() -> formfill::Result<()> {
    let binary = |name: &str, state: &str| {
        Variable::new(name, vec![state.to_string(), format!("not-{state}")])
    };
    let dag = Dag::from_edges(
        vec!["A".into(), "B".into(), "C".into()],
        &[("A", "B"), ("A", "C"), ("B", "C")],
    )?;
    let net = BayesNet::new(
        vec![binary("A", "a"), binary("B", "b"), binary("C", "c")],
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
                // Rows follow the parent states in order: (a,b), (a,not-b), (not-a,b), (not-a,not-b).
                rows: vec![
                    vec![0.9, 0.1],
                    vec![0.4, 0.6],
                    vec![0.4, 0.6],
                    vec![0.1, 0.9],
                ],
            },
        ],
    )?;

    let queries: [(&str, &[(&str, &str)]); 4] = [
        ("C", &[]),
        ("C", &[("A", "a")]),
        ("A", &[("C", "c")]),
        ("B", &[("A", "not-a"), ("C", "c")]),
    ];
    for (target, evidence) in queries {
        let ev: BTreeMap<String, String> = evidence
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let p = net.infer_posterior(&ev, target)?;
        println!("P({target} | {ev:?}) = {:?}", p.probs);
    }
    Ok(())
}
