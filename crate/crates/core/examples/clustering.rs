//! Elbow curve and k-modes clustering over the root fields of a synthetic form.

use formfill::model::{elbow_curve, independent_fields, kmodes, knee, KModesConfig};
use formfill::preprocess::{fit, PreprocessConfig};
use formfill::synthetic::planted;

fn main() -> formfill::Result<()> {
    let data = planted(3000, 7);
    let (_, fitted) = fit(&data, &PreprocessConfig::default())?;
    let t = &fitted.table;

    // Cluster on a fixed pair of upstream fields to keep the output readable.
    let fields = ["region", "currency"];
    let cols: Vec<usize> = fields
        .iter()
        .map(|f| t.index_of(f).expect("field retained"))
        .collect();
    let rows: Vec<Vec<u32>> = (0..t.n_rows())
        .map(|r| cols.iter().map(|&c| t.columns[c][r]).collect())
        .collect();

    let cfg = KModesConfig::default();
    let curve = elbow_curve(&rows, 12, 0, &cfg)?;
    for (k, j) in curve.iter().enumerate() {
        println!("k={:<2} mean mismatches {j:.4}", k + 1);
    }
    let k = knee(&curve);
    println!("knee at k={k}");

    let m = kmodes(&rows, k, 0, &cfg)?;
    for (c, size) in m.centroids.iter().zip(m.cluster_sizes()) {
        let labels: Vec<&str> = c
            .iter()
            .zip(&cols)
            .map(|(&s, &v)| t.variables[v].states[s as usize].as_str())
            .collect();
        println!("centroid {labels:?}: {size} rows");
    }
    println!("objective per iteration: {:?}", m.objective_history);

    // What the model builder would use by default: the roots of the learned network.
    let bundle = formfill::model::build(&data, &Default::default())?.0;
    println!(
        "root fields of the learned network: {:?}",
        independent_fields(&bundle.global)
    );
    Ok(())
}
