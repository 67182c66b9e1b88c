mod common;

use std::collections::BTreeMap;

use formfill::baselines::{
    arm_suggest, arm_train, fls_suggest, mfm_suggest, Arm, ArmConfig, AssociationRule, Mfm,
};
use formfill::preprocess::UNKNOWN;
use formfill::table::{DiscreteTable, Variable};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn most_frequent_on_company_history() {
    let train = common::company_train();
    // Four Leasing Service rows against two Financial Service rows.
    assert_eq!(
        mfm_suggest(&train, "primary activity", 2),
        vec!["Leasing Service", "Financial Service"]
    );
    let m = Mfm::train(&train);
    assert_eq!(
        m.counts("primary activity"),
        &[
            ("Leasing Service".to_string(), 4),
            ("Financial Service".to_string(), 2)
        ]
    );
    assert!(m.suggest("no such field", 3).is_empty());
}

#[test]
fn company_rule_support_and_confidence() {
    let cfg = ArmConfig {
        min_support: 2,
        min_confidence: 0.0,
        max_antecedent: 3,
    };
    let arm = Arm::train(
        &common::company_train(),
        &common::company_config().preprocess,
        &cfg,
    )
    .unwrap();
    let rule = arm
        .rules
        .iter()
        .find(|r| {
            r.antecedent == vec![("company type".to_string(), "Leasing".to_string())]
                && r.consequent
                    == (
                        "primary activity".to_string(),
                        "Leasing Service".to_string(),
                    )
        })
        .expect("rule mined");
    assert_eq!(rule.support, 2);
    assert!((rule.confidence - 2.0 / 3.0).abs() < 1e-12);

    let filled = common::map(&[
        ("company type", "Leasing"),
        ("income", "40"),
        ("entity", "Private"),
    ]);
    assert_eq!(
        arm.suggest(&filled, "primary activity", 1),
        vec!["Leasing Service"]
    );
    assert_eq!(
        arm_suggest(
            &arm.rules,
            &arm.preprocess.apply(&filled),
            "primary activity",
            1
        ),
        vec!["Leasing Service"]
    );
}

fn random_table(rng: &mut rand_chacha::ChaCha8Rng) -> DiscreteTable {
    let nv = rng.gen_range(2..5);
    let rows = rng.gen_range(5..40);
    let vars: Vec<Variable> = (0..nv)
        .map(|i| {
            let mut states: Vec<String> =
                (0..rng.gen_range(2..4)).map(|s| format!("v{s}")).collect();
            states.push(UNKNOWN.to_string());
            Variable::new(format!("F{i}"), states)
        })
        .collect();
    let columns = vars
        .iter()
        .map(|v| {
            (0..rows)
                .map(|_| rng.gen_range(0..v.card() as u32))
                .collect()
        })
        .collect();
    DiscreteTable::new(vars, columns).unwrap()
}

/// Every rule satisfying the thresholds, by enumerating all antecedents directly.
fn brute_force_rules(t: &DiscreteTable, cfg: &ArmConfig) -> Vec<AssociationRule> {
    let n = t.n_rows();
    let matches = |items: &[(usize, usize)], r: usize| {
        items.iter().all(|&(v, s)| t.columns[v][r] as usize == s)
    };
    let count = |items: &[(usize, usize)]| (0..n).filter(|&r| matches(items, r)).count();
    // All itemsets with at most one value per variable, UNKNOWN excluded.
    let mut sets: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for v in 0..t.n_vars() {
        let mut next = sets.clone();
        for s in &sets {
            if s.len() > cfg.max_antecedent {
                continue;
            }
            for st in 0..t.variables[v].card() {
                if t.variables[v].states[st] != UNKNOWN {
                    let mut e = s.clone();
                    e.push((v, st));
                    next.push(e);
                }
            }
        }
        sets = next;
    }
    let mut rules = Vec::new();
    for set in sets
        .iter()
        .filter(|s| !s.is_empty() && s.len() <= cfg.max_antecedent + 1)
    {
        let support = count(set);
        if support < cfg.min_support {
            continue;
        }
        for k in 0..set.len() {
            let ante: Vec<(usize, usize)> = set
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &x)| x)
                .collect();
            let confidence = support as f64 / count(&ante) as f64;
            if confidence >= cfg.min_confidence {
                let name = |&(v, s): &(usize, usize)| {
                    (
                        t.variables[v].name.clone(),
                        t.variables[v].states[s].clone(),
                    )
                };
                let mut antecedent: Vec<_> = ante.iter().map(name).collect();
                antecedent.sort();
                rules.push(AssociationRule {
                    antecedent,
                    consequent: name(&set[k]),
                    support,
                    confidence,
                });
            }
        }
    }
    rules.sort_by(|a, b| (&a.consequent, &a.antecedent).cmp(&(&b.consequent, &b.antecedent)));
    rules
}

#[test]
fn apriori_matches_brute_force() {
    let mut rng = common::rng(31);
    for _ in 0..60 {
        let t = random_table(&mut rng);
        let cfg = ArmConfig {
            min_support: rng.gen_range(1..4),
            min_confidence: rng.gen_range(0.0..0.8),
            max_antecedent: rng.gen_range(0..3),
        };
        let mined = arm_train(&t, &cfg);
        let oracle = brute_force_rules(&t, &cfg);
        assert_eq!(mined.len(), oracle.len());
        for (a, b) in mined.iter().zip(&oracle) {
            assert_eq!(
                (&a.antecedent, &a.consequent, a.support),
                (&b.antecedent, &b.consequent, b.support)
            );
            assert!((a.confidence - b.confidence).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn rules_ignore_row_order(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let t = random_table(&mut rng);
        let mut perm: Vec<usize> = (0..t.n_rows()).collect();
        perm.shuffle(&mut rng);
        let cfg = ArmConfig { min_support: 2, min_confidence: 0.3, max_antecedent: 2 };
        let a = arm_train(&t, &cfg);
        let b = arm_train(&t.select_rows(&perm), &cfg);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!((&x.antecedent, &x.consequent, x.support), (&y.antecedent, &y.consequent, y.support));
            prop_assert!((x.confidence - y.confidence).abs() < 1e-12);
        }
        let filled: BTreeMap<String, String> = [("F0".to_string(), "v0".to_string())].into();
        prop_assert_eq!(arm_suggest(&a, &filled, "F1", 3), arm_suggest(&b, &filled, "F1", 3));
    }
}

#[test]
fn first_letter_search() {
    let countries: Vec<String> = [
        "Luxembourg",
        "Laos",
        "Kenya",
        "Latvia",
        "Lebanon",
        "Lesotho",
        "Liberia",
        "Libya",
        "Liechtenstein",
        "Lithuania",
        "Malta",
        "lower case",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let got = fls_suggest(&countries, 'L');
    assert_eq!(
        got,
        vec![
            "Laos",
            "Latvia",
            "Lebanon",
            "Lesotho",
            "Liberia",
            "Libya",
            "Liechtenstein",
            "Lithuania",
            "lower case",
            "Luxembourg"
        ]
    );
    // Luxembourg sits behind eight other L countries plus one more entry.
    assert_eq!(got.iter().position(|c| c == "Luxembourg"), Some(9));
    assert_eq!(fls_suggest(&countries, 'k'), vec!["Kenya"]);
    assert!(fls_suggest(&countries, 'z').is_empty());
}
