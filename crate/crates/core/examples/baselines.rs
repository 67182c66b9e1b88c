//! The three comparison suggesters on the company registrations.

use std::path::Path;

use formfill::baselines::{fls_suggest, Arm, ArmConfig, Mfm};
use formfill::model::BuildConfig;
use formfill::schema::{load_dataset, load_schema, LoadOptions};

fn main() -> formfill::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let schema = load_schema(&fixtures.join("company_schema.json"))?;
    let (history, _) = load_dataset(
        &schema,
        &fixtures.join("company_train.csv"),
        &LoadOptions::default(),
    )?;

    let mfm = Mfm::train(&history);
    println!("most frequent: {:?}", mfm.counts("primary activity"));

    let pre = BuildConfig::load(&fixtures.join("company_config.toml"))?.preprocess;
    let arm = Arm::train(
        &history,
        &pre,
        &ArmConfig {
            min_support: 2,
            ..ArmConfig::default()
        },
    )?;
    for r in arm
        .rules
        .iter()
        .filter(|r| r.consequent.0 == "primary activity")
    {
        println!(
            "{:?} => {} (support {}, confidence {:.3})",
            r.antecedent, r.consequent.1, r.support, r.confidence
        );
    }
    let filled = [("company type", "Leasing"), ("income", "40")]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    println!(
        "rules suggest: {:?}",
        arm.suggest(&filled, "primary activity", 2)
    );

    let countries: Vec<String> = [
        "Latvia",
        "Kenya",
        "Luxembourg",
        "Laos",
        "Lithuania",
        "Malta",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    println!("typed 'l': {:?}", fls_suggest(&countries, 'l'));
    Ok(())
}
