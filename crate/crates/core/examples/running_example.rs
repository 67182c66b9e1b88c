//! Trains on the six company registrations and suggests a primary activity for
//! a seventh, half-filled one.
//!
//! ```text
//! cargo run --example running_example
//! ```

use std::path::Path;

use formfill::model::{build, BuildConfig};
use formfill::schema::{load_dataset, load_schema, LoadOptions};
use formfill::suggest::{suggest, ListSize, SuggestionRequest};

fn main() -> formfill::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let schema = load_schema(&fixtures.join("company_schema.json"))?;
    let (history, _) = load_dataset(
        &schema,
        &fixtures.join("company_train.csv"),
        &LoadOptions::default(),
    )?;
    // Six rows are too few for structure search, so the config pins the dependency
    // structure and the income intervals.
    let cfg = BuildConfig::load(&fixtures.join("company_config.toml"))?;
    let (bundle, report) = build(&history, &cfg)?;

    for removed in &report.removed_fields {
        println!("dropped `{}` ({})", removed.name, removed.reason);
    }
    println!("independent fields: {:?}", bundle.independent_fields);
    for (i, c) in bundle.centroids.iter().enumerate() {
        println!("cluster {i}: {c:?} ({} rows)", report.cluster_sizes[i]);
    }

    let filled = [
        ("name", "Gibson"),
        ("income", "20"),
        ("entity", "Private"),
        ("company type", "Leasing"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    let request = SuggestionRequest {
        size: ListSize::Count(3),
        ..SuggestionRequest::new("primary activity", filled)
    };
    let s = suggest(&bundle, &request)?;
    println!(
        "\nmodel: {}, parent filled: {}, top mass {:.3} > theta: {}",
        s.model_used, s.check_dep, s.top_mass, s.check_prob
    );
    for item in &s.items {
        println!("  {:<24} {:.4}", item.value, item.probability);
    }
    Ok(())
}
