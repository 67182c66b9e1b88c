//! Seeded synthetic form data.
//!
//! [`planted`] draws submissions of a ten-field registration form from three
//! hidden customer groups with strong field-to-field dependencies, so a model
//! that learns them should beat frequency ranking by a wide margin.
//! [`uninformative`] draws independent uniform fields where nothing can be learned.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::schema::{
    Dataset, FieldKind, FieldSchema, FormSchema, InputInstance, DEFAULT_TIMESTAMP_COLUMN,
};

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix} {:02}", i + 1)).collect()
}

fn field(
    name: &str,
    kind: FieldKind,
    tab_index: usize,
    candidates: Option<Vec<String>>,
) -> FieldSchema {
    FieldSchema {
        name: name.to_string(),
        kind,
        candidates,
        mandatory: false,
        tab_index,
    }
}

pub const PLANTED_TARGETS: [&str; 4] = ["sector", "product", "license", "tier"];

pub fn planted_schema() -> FormSchema {
    use FieldKind::*;
    FormSchema::new(
        "synthetic registration",
        vec![
            field("region", Categorical, 0, Some(labels("Region", 6))),
            field("revenue", Numerical, 1, None),
            field("channel", Categorical, 2, Some(labels("Channel", 5))),
            field("currency", Categorical, 3, Some(labels("Currency", 3))),
            field("sector", Categorical, 4, Some(labels("Sector", 12))),
            field("contact", Textual, 5, None),
            field("product", Categorical, 6, Some(labels("Product", 15))),
            field("license", Categorical, 7, Some(labels("License", 10))),
            field("tier", Categorical, 8, Some(labels("Tier", 11))),
            field("notes", Textual, 9, None),
        ],
    )
    .expect("static schema is valid")
}

/// `mapped` with probability `p`, otherwise a uniform draw from `0..n`.
fn noisy(rng: &mut ChaCha8Rng, mapped: usize, n: usize, p: f64) -> usize {
    if rng.gen_bool(p) {
        mapped
    } else {
        rng.gen_range(0..n)
    }
}

/// `n` submissions from three latent groups. Every target field depends on fields
/// that precede it in tab order.
pub fn planted(n: usize, seed: u64) -> Dataset {
    let schema = planted_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means = [20.0, 50.0, 80.0];
    let cands: BTreeMap<String, Vec<String>> = schema
        .fields
        .iter()
        .filter_map(|f| f.candidates.clone().map(|c| (f.name.clone(), c)))
        .collect();
    let pick = |name: &str, i: usize| Some(cands[name][i].clone());

    let mut instances = Vec::with_capacity(n);
    for row in 0..n {
        let group = rng.gen_range(0..3);
        let home = 2 * group + rng.gen_range(0..2);
        let region = noisy(&mut rng, home, 6, 0.9);
        let revenue: f64 = Normal::new(means[group], 6.0).unwrap().sample(&mut rng);
        let high = usize::from(revenue > means[group]);
        let channel = rng.gen_range(0..5);
        let currency = noisy(&mut rng, region / 2, 3, 0.95);
        let sector = noisy(&mut rng, 2 * region + high, 12, 0.9);
        let product = noisy(&mut rng, (sector * 4 + group) % 15, 15, 0.85);
        let license = noisy(&mut rng, (region + product) % 10, 10, 0.85);
        let tier = noisy(&mut rng, product % 11, 11, 0.85);
        let notes = rng
            .gen_bool(0.05)
            .then(|| format!("note {}", rng.gen_range(0..1000)));

        let values: BTreeMap<String, Option<String>> = [
            ("region", pick("region", region)),
            ("revenue", Some(format!("{revenue:.2}"))),
            ("channel", pick("channel", channel)),
            ("currency", pick("currency", currency)),
            ("sector", pick("sector", sector)),
            ("contact", Some(format!("contact-{row:06}"))),
            ("product", pick("product", product)),
            ("license", pick("license", license)),
            ("tier", pick("tier", tier)),
            ("notes", notes),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        instances.push(InputInstance {
            values,
            submitted_at: 1_500_000_000 + row as i64 * 60,
        });
    }
    Dataset::new(schema, instances).expect("generated instances match the schema")
}

/// Independent uniform categorical fields, `candidates` values each.
pub fn uninformative(n: usize, fields: usize, candidates: usize, seed: u64) -> Dataset {
    let schema = FormSchema::new(
        "uninformative",
        (0..fields)
            .map(|i| {
                let name = format!("field {i}");
                field(
                    &name,
                    FieldKind::Categorical,
                    i,
                    Some(labels(&format!("F{i} value"), candidates)),
                )
            })
            .collect(),
    )
    .expect("generated schema is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..n)
        .map(|row| InputInstance {
            values: schema
                .fields
                .iter()
                .map(|f| {
                    (
                        f.name.clone(),
                        Some(f.candidates()[rng.gen_range(0..candidates)].clone()),
                    )
                })
                .collect(),
            submitted_at: row as i64,
        })
        .collect();
    Dataset::new(schema, instances).expect("generated instances match the schema")
}

/// Writes a dataset in the loader's CSV layout (tab order, then the timestamp).
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Data(format!("writing CSV: {e}"));
    let fields = dataset.schema.in_tab_order();
    let mut header: Vec<&str> = fields.iter().map(|f| f.name.as_str()).collect();
    header.push(DEFAULT_TIMESTAMP_COLUMN);
    w.write_record(&header).map_err(io)?;
    for inst in &dataset.instances {
        let mut rec: Vec<String> = fields
            .iter()
            .map(|f| inst.get(&f.name).unwrap_or("").to_string())
            .collect();
        rec.push(inst.submitted_at.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Data(format!("writing CSV: {e}")))
}
