//! Recovers a planted chain A -> B -> C from samples and shows each accepted
//! hill-climbing move with its BIC score.

use formfill::bayes::{fit_cpts, learn_structure_traced, StructureConfig};
use formfill::table::{DiscreteTable, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> formfill::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 5000;
    let mut cols = vec![Vec::new(); 3];
    for _ in 0..n {
        let a = rng.gen_range(0..2u32);
        let b = if rng.gen_bool(0.85) { a } else { 1 - a };
        let c = if rng.gen_bool(0.85) { b } else { 1 - b };
        for (col, v) in cols.iter_mut().zip([a, b, c]) {
            col.push(v);
        }
    }
    let vars = ["A", "B", "C"].map(|name| Variable::new(name, vec!["0".into(), "1".into()]));
    let table = DiscreteTable::new(vars.to_vec(), cols)?;

    let (dag, trace) = learn_structure_traced(&table, &StructureConfig::default())?;
    println!("start  BIC {:.2}", trace.start_score);
    let name = |i: usize| &table.variables[i].name;
    for (m, score) in trace.moves.iter().zip(&trace.scores) {
        println!(
            "{:?} {} -> {}  BIC {score:.2}",
            m.kind,
            name(m.parent),
            name(m.child)
        );
    }
    let skeleton: Vec<String> = dag
        .skeleton()
        .iter()
        .map(|&(a, b)| format!("{}-{}", name(a), name(b)))
        .collect();
    println!("skeleton: {}", skeleton.join(", "));

    let net = fit_cpts(&dag, &table, 1.0)?;
    for cpt in &net.cpts {
        println!(
            "P({} | {:?}) rows: {:.3?}",
            cpt.variable, cpt.parents, cpt.rows
        );
    }
    Ok(())
}
