//! Saves a trained bundle, reloads it and checks the bytes are reproducible.

use formfill::model::{build, BuildConfig, ModelBundle};
use formfill::synthetic::{planted, write_csv};

fn main() -> formfill::Result<()> {
    let dir = std::env::temp_dir().join("formfill-artifact-example");
    std::fs::create_dir_all(&dir).map_err(|e| formfill::Error::io("directory", &dir, e))?;

    let data = planted(2000, 3);
    let csv = dir.join("history.csv");
    let file = std::fs::File::create(&csv).map_err(|e| formfill::Error::io("csv", &csv, e))?;
    write_csv(&data, file)?;

    let cfg = BuildConfig {
        seed: 9,
        ..BuildConfig::default()
    };
    let (bundle, report) = build(&data, &cfg)?;
    let path = dir.join("model.json");
    bundle.save(&path)?;
    let reloaded = ModelBundle::load(&path)?;
    let again = build(&data, &cfg)?.0;

    println!("wrote {} and {}", csv.display(), path.display());
    println!(
        "k = {}, {} global edges, {:.2}s",
        report.k, report.global_edges, report.seconds
    );
    println!("reload equal: {}", reloaded == bundle);
    println!(
        "retrain byte-identical: {}",
        again.to_json()? == bundle.to_json()?
    );
    Ok(())
}
