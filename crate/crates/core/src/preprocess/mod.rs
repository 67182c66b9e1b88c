//! Cleaning and transformation of historical submissions into a fully discrete
//! training table, and the matching transformation of partially filled forms.
//!
//! Fitting runs these steps in order:
//!
//! 1. drop fields with at least `t_missing_field_pct` percent empty values;
//! 2. drop textual and file fields whose unique-value ratio exceeds `t_unique_ratio`;
//! 3. drop instances with more than `t_missing_instance_pct` percent empty values
//!    among the retained fields;
//! 4. impute: numerical fields with the mean, everything else with [`UNKNOWN`];
//! 5. discretize numerical fields into half-open intervals.

pub mod discretize;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Dataset, FieldKind, FieldSchema};
use crate::table::{DiscreteTable, Variable};

use self::discretize::{
    discretize_numeric, equal_frequency_cuts, interval_index, interval_labels, FALLBACK_BINS,
};

/// Imputation label for categorical and textual fields, and the code for unseen values.
pub const UNKNOWN: &str = "UNKNOWN";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Drop a field when this percentage of its values or more is missing.
    pub t_missing_field_pct: f64,
    /// Drop a textual/file field whose distinct/non-empty ratio is above this.
    pub t_unique_ratio: f64,
    /// Drop an instance with more than this percentage of retained fields missing.
    pub t_missing_instance_pct: f64,
    /// Cut points to use instead of supervised discretization, per numerical field.
    pub fixed_cuts: BTreeMap<String, Vec<f64>>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            t_missing_field_pct: 90.0,
            t_unique_ratio: 0.9,
            t_missing_instance_pct: 50.0,
            fixed_cuts: BTreeMap::new(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        let pct = |v: f64, name: &str| {
            if (0.0..=100.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be a percentage in [0,100], got {v}"
                )))
            }
        };
        pct(self.t_missing_field_pct, "t_missing_field_pct")?;
        pct(self.t_missing_instance_pct, "t_missing_instance_pct")?;
        if !(0.0..=1.0).contains(&self.t_unique_ratio) {
            return Err(Error::Config(format!(
                "t_unique_ratio must be in [0,1], got {}",
                self.t_unique_ratio
            )));
        }
        for (field, cuts) in &self.fixed_cuts {
            if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "fixed_cuts for `{field}` must be finite and strictly increasing"
                )));
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!(
            "T_v={}%, T_u={}, T_m={}%",
            self.t_missing_field_pct, self.t_unique_ratio, self.t_missing_instance_pct
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovedField {
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetainedField {
    pub name: String,
    pub kind: FieldKind,
    /// Interval cut points, numerical fields only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<f64>>,
    pub impute: String,
    /// Final discrete universe; always contains [`UNKNOWN`].
    pub universe: Vec<String>,
}

impl RetainedField {
    /// Maps one raw (non-empty) value to its discrete label.
    pub fn transform(&self, raw: &str) -> String {
        let raw = raw.trim();
        match &self.cuts {
            Some(cuts) => match raw.parse::<f64>() {
                Ok(x) if !x.is_nan() => interval_labels(cuts)[interval_index(cuts, x)].clone(),
                _ => UNKNOWN.to_string(),
            },
            None if self.universe.iter().any(|u| u == raw) => raw.to_string(),
            None => UNKNOWN.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessModel {
    /// In tab order.
    pub retained: Vec<RetainedField>,
    pub removed: Vec<RemovedField>,
}

/// Output of [`fit`] besides the model.
#[derive(Clone, Debug)]
pub struct Fitted {
    pub table: DiscreteTable,
    /// Indices (into the input dataset) of the instances that survived.
    pub kept_instances: Vec<usize>,
}

impl PreprocessModel {
    pub fn retained_names(&self) -> Vec<&str> {
        self.retained.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn field(&self, name: &str) -> Option<&RetainedField> {
        self.retained.iter().find(|f| f.name == name)
    }

    pub fn is_removed(&self, name: &str) -> bool {
        self.removed.iter().any(|f| f.name == name)
    }

    pub fn variables(&self) -> Vec<Variable> {
        self.retained
            .iter()
            .map(|f| Variable::new(f.name.clone(), f.universe.clone()))
            .collect()
    }

    /// Transforms a partially filled form. Removed and unknown fields are ignored,
    /// blank values are dropped (absent evidence), numbers become interval labels and
    /// values outside a field's universe become [`UNKNOWN`].
    pub fn apply(&self, partial: &BTreeMap<String, String>) -> BTreeMap<String, String> {
        partial
            .iter()
            .filter(|(_, v)| !v.trim().is_empty())
            .filter_map(|(k, v)| self.field(k).map(|f| (k.clone(), f.transform(v))))
            .collect()
    }
}

fn parse_cell(field: &FieldSchema, cell: Option<&str>) -> Option<String> {
    let v = cell?.trim();
    if v.is_empty() {
        return None;
    }
    if field.kind == FieldKind::Numerical && v.parse::<f64>().map_or(true, |x| !x.is_finite()) {
        return None;
    }
    Some(v.to_string())
}

fn mutual_information(a: &[u32], a_card: usize, b: &[u32], b_card: usize) -> f64 {
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let mut joint = vec![0usize; a_card * b_card];
    let mut pa = vec![0usize; a_card];
    let mut pb = vec![0usize; b_card];
    for (&x, &y) in a.iter().zip(b) {
        joint[x as usize * b_card + y as usize] += 1;
        pa[x as usize] += 1;
        pb[y as usize] += 1;
    }
    let mut mi = 0.0;
    for x in 0..a_card {
        for y in 0..b_card {
            let c = joint[x * b_card + y];
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy / ((pa[x] as f64 / n) * (pb[y] as f64 / n))).ln();
            }
        }
    }
    mi
}

/// Fits the pipeline on training data and returns the model with the discrete table.
pub fn fit(dataset: &Dataset, config: &PreprocessConfig) -> Result<(PreprocessModel, Fitted)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Data("cannot preprocess an empty dataset".into()));
    }
    let schema = &dataset.schema;
    let n = dataset.len();
    let fields = schema.in_tab_order();

    // cells[f][row], with unparseable numbers treated as missing
    let cells: Vec<Vec<Option<String>>> = fields
        .iter()
        .map(|f| {
            dataset
                .instances
                .iter()
                .map(|i| parse_cell(f, i.get(&f.name)))
                .collect()
        })
        .collect();

    let mut removed = Vec::new();
    let mut keep_field = vec![true; fields.len()];
    for (fi, f) in fields.iter().enumerate() {
        let missing = cells[fi].iter().filter(|c| c.is_none()).count();
        let pct = missing as f64 * 100.0 / n as f64;
        if pct >= config.t_missing_field_pct {
            keep_field[fi] = false;
            removed.push(RemovedField {
                name: f.name.clone(),
                reason: format!("missing≥{}%", config.t_missing_field_pct),
            });
        }
    }
    for (fi, f) in fields.iter().enumerate() {
        if !keep_field[fi] || !matches!(f.kind, FieldKind::Textual | FieldKind::File) {
            continue;
        }
        let present: Vec<&String> = cells[fi].iter().flatten().collect();
        let distinct: BTreeSet<&String> = present.iter().copied().collect();
        let ratio = distinct.len() as f64 / present.len() as f64;
        if ratio > config.t_unique_ratio {
            keep_field[fi] = false;
            removed.push(RemovedField {
                name: f.name.clone(),
                reason: format!("unique ratio {ratio:.3}>{}", config.t_unique_ratio),
            });
        }
    }
    let kept_fields: Vec<usize> = (0..fields.len()).filter(|&fi| keep_field[fi]).collect();
    if kept_fields.is_empty() {
        return Err(Error::NothingLeft {
            what: "field",
            thresholds: config.describe(),
        });
    }

    let kept_instances: Vec<usize> = (0..n)
        .filter(|&row| {
            let missing = kept_fields
                .iter()
                .filter(|&&fi| cells[fi][row].is_none())
                .count();
            missing as f64 * 100.0 / kept_fields.len() as f64 <= config.t_missing_instance_pct
        })
        .collect();
    if kept_instances.is_empty() {
        return Err(Error::NothingLeft {
            what: "instance",
            thresholds: config.describe(),
        });
    }

    // Non-numerical fields first: their imputed codes serve as class columns.
    let mut retained: Vec<Option<RetainedField>> = vec![None; fields.len()];
    let mut columns: Vec<Option<Vec<u32>>> = vec![None; fields.len()];
    for &fi in &kept_fields {
        let f = fields[fi];
        if f.kind == FieldKind::Numerical {
            continue;
        }
        let observed: BTreeSet<&str> = kept_instances
            .iter()
            .filter_map(|&r| cells[fi][r].as_deref())
            .collect();
        let mut universe: Vec<String> = Vec::new();
        if f.kind == FieldKind::Categorical {
            universe.extend(f.candidates().iter().cloned());
        }
        for v in observed {
            if !universe.iter().any(|u| u == v) && v != UNKNOWN {
                universe.push(v.to_string());
            }
        }
        universe.push(UNKNOWN.to_string());
        let var = Variable::new(f.name.clone(), universe.clone());
        let unknown = var.code(UNKNOWN).unwrap();
        columns[fi] = Some(
            kept_instances
                .iter()
                .map(|&r| {
                    cells[fi][r]
                        .as_deref()
                        .and_then(|v| var.code(v))
                        .unwrap_or(unknown)
                })
                .collect(),
        );
        retained[fi] = Some(RetainedField {
            name: f.name.clone(),
            kind: f.kind,
            cuts: None,
            impute: UNKNOWN.to_string(),
            universe,
        });
    }

    for &fi in &kept_fields {
        let f = fields[fi];
        if f.kind != FieldKind::Numerical {
            continue;
        }
        let present_rows: Vec<usize> = kept_instances
            .iter()
            .enumerate()
            .filter(|(_, &r)| cells[fi][r].is_some())
            .map(|(pos, _)| pos)
            .collect();
        let values: Vec<f64> = present_rows
            .iter()
            .map(|&pos| {
                cells[fi][kept_instances[pos]]
                    .as_ref()
                    .unwrap()
                    .parse()
                    .unwrap()
            })
            .collect();

        let cuts = if let Some(fixed) = config.fixed_cuts.get(&f.name) {
            fixed.clone()
        } else {
            // Class column: the categorical field sharing the most information with
            // a quartile view of this column; ties go to the earlier tab index.
            let quartiles = equal_frequency_cuts(&values, FALLBACK_BINS);
            let binned: Vec<u32> = values
                .iter()
                .map(|&x| interval_index(&quartiles, x) as u32)
                .collect();
            let mut best: Option<(f64, &Vec<u32>)> = None;
            for &ci in &kept_fields {
                if fields[ci].kind != FieldKind::Categorical {
                    continue;
                }
                let (Some(col), Some(rf)) = (&columns[ci], &retained[ci]) else {
                    continue;
                };
                let class: Vec<u32> = present_rows.iter().map(|&p| col[p]).collect();
                let mi =
                    mutual_information(&binned, quartiles.len() + 1, &class, rf.universe.len());
                if best.is_none_or(|(b, _)| mi > b) {
                    best = Some((mi, col));
                }
            }
            match best {
                Some((_, col)) => {
                    let class: Vec<u32> = present_rows.iter().map(|&p| col[p]).collect();
                    discretize_numeric(&values, &class)
                }
                None => equal_frequency_cuts(&values, FALLBACK_BINS),
            }
        };

        let labels = interval_labels(&cuts);
        let impute = if values.is_empty() {
            UNKNOWN.to_string()
        } else {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            labels[interval_index(&cuts, mean)].clone()
        };
        let mut universe = labels.clone();
        universe.push(UNKNOWN.to_string());
        let impute_code = universe.iter().position(|u| *u == impute).unwrap() as u32;
        columns[fi] = Some(
            kept_instances
                .iter()
                .map(|&r| match &cells[fi][r] {
                    Some(v) => interval_index(&cuts, v.parse().unwrap()) as u32,
                    None => impute_code,
                })
                .collect(),
        );
        retained[fi] = Some(RetainedField {
            name: f.name.clone(),
            kind: f.kind,
            cuts: Some(cuts),
            impute,
            universe,
        });
    }

    let mut out_fields = Vec::new();
    let mut out_cols = Vec::new();
    for fi in kept_fields {
        out_fields.push(retained[fi].take().unwrap());
        out_cols.push(columns[fi].take().unwrap());
    }
    let model = PreprocessModel {
        retained: out_fields,
        removed,
    };
    let table = DiscreteTable::new(model.variables(), out_cols)?;
    Ok((
        model,
        Fitted {
            table,
            kept_instances,
        },
    ))
}
