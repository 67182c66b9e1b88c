//! Form model and loading of historical submissions.
//!
//! A [`FormSchema`] describes the fields of one data entry form. Past
//! submissions of that form are loaded into a [`Dataset`], sorted by
//! submission time. A cell is `None` when the user left the field empty.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Value of one field in one submission; `None` is the empty value.
pub type Cell = Option<String>;

pub const DEFAULT_TIMESTAMP_COLUMN: &str = "submission_time";

pub const DEFAULT_EMPTY_MARKERS: &[&str] =
    &["", "n/a", "na", "null", "none", "missing", "not applicable"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Categorical,
    Numerical,
    Textual,
    File,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSchema {
    pub name: String,
    pub kind: FieldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    #[serde(default)]
    pub mandatory: bool,
    pub tab_index: usize,
}

impl FieldSchema {
    pub fn candidates(&self) -> &[String] {
        self.candidates.as_deref().unwrap_or(&[])
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == FieldKind::Categorical
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSchema {
    pub name: String,
    pub fields: Vec<FieldSchema>,
}

impl FormSchema {
    /// Builds a schema and checks every invariant.
    pub fn new(name: impl Into<String>, fields: Vec<FieldSchema>) -> Result<Self> {
        let schema = FormSchema {
            name: name.into(),
            fields,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fields.is_empty() {
            return Err(Error::Schema("empty schema".into()));
        }
        let mut names = BTreeSet::new();
        let mut tabs = vec![false; self.fields.len()];
        for (i, f) in self.fields.iter().enumerate() {
            let at = format!("fields[{i}] `{}`", f.name);
            if f.name.trim().is_empty() {
                return Err(Error::Schema(format!("fields[{i}]: empty field name")));
            }
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("{at}: duplicate field name")));
            }
            match (f.kind, &f.candidates) {
                (FieldKind::Categorical, None) => {
                    return Err(Error::Schema(format!(
                        "{at}: categorical field without candidates"
                    )))
                }
                (FieldKind::Categorical, Some(c)) if c.is_empty() => {
                    return Err(Error::Schema(format!(
                        "{at}: categorical field with empty candidate list"
                    )))
                }
                (FieldKind::Categorical, Some(c)) => {
                    let mut seen = BTreeSet::new();
                    for v in c {
                        if v.trim().is_empty() {
                            return Err(Error::Schema(format!("{at}: empty candidate value")));
                        }
                        if !seen.insert(v.as_str()) {
                            return Err(Error::Schema(format!("{at}: duplicate candidate `{v}`")));
                        }
                    }
                }
                (_, Some(_)) => {
                    return Err(Error::Schema(format!(
                        "{at}: candidates are only allowed on categorical fields"
                    )))
                }
                (_, None) => {}
            }
            match tabs.get_mut(f.tab_index) {
                Some(slot) if !*slot => *slot = true,
                _ => {
                    return Err(Error::Schema(format!(
                        "{at}: tab_index {} is not a permutation of 0..{}",
                        f.tab_index,
                        self.fields.len()
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn field(&self, name: &str) -> Option<&FieldSchema> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Fields in tab (default filling) order.
    pub fn in_tab_order(&self) -> Vec<&FieldSchema> {
        let mut out: Vec<_> = self.fields.iter().collect();
        out.sort_by_key(|f| f.tab_index);
        out
    }

    /// The categorical fields, in tab order.
    pub fn categorical(&self) -> Vec<&FieldSchema> {
        self.in_tab_order()
            .into_iter()
            .filter(|f| f.is_categorical())
            .collect()
    }

    /// Closest field name by edit distance, used for "did you mean" hints.
    pub fn nearest_name(&self, name: &str) -> Option<String> {
        self.fields
            .iter()
            .map(|f| (strsim::levenshtein(&f.name, name), &f.name))
            .min()
            .filter(|(d, _)| *d <= name.len().max(3))
            .map(|(_, n)| n.clone())
    }

    pub fn unknown_field(&self, name: &str) -> Error {
        Error::UnknownField {
            name: name.to_string(),
            hint: self.nearest_name(name),
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schema serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Reads a schema document. `.toml` files are parsed as TOML, everything else as JSON.
pub fn load_schema(path: &Path) -> Result<FormSchema> {
    let text = fs::read_to_string(path).map_err(|e| Error::io("schema", path, e))?;
    let schema: FormSchema = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| Error::Parse {
            what: "schema",
            message: e.to_string(),
        })?
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            what: "schema",
            message: e.to_string(),
        })?
    };
    schema.validate()?;
    Ok(schema)
}

/// One submitted form. The timestamp orders instances and is never a model feature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputInstance {
    pub values: BTreeMap<String, Cell>,
    pub submitted_at: i64,
}

impl InputInstance {
    pub fn get(&self, field: &str) -> Option<&str> {
        self.values.get(field).and_then(|v| v.as_deref())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub schema: FormSchema,
    pub instances: Vec<InputInstance>,
}

impl Dataset {
    /// Wraps instances, sorting them by submission time (stable).
    pub fn new(schema: FormSchema, mut instances: Vec<InputInstance>) -> Result<Self> {
        for inst in &instances {
            if let Some(k) = inst.values.keys().find(|k| schema.field(k).is_none()) {
                return Err(Error::Data(format!(
                    "instance field `{k}` is not in the schema"
                )));
            }
        }
        instances.sort_by_key(|i| i.submitted_at);
        Ok(Dataset { schema, instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub empty_markers: Vec<String>,
    pub timestamp_column: String,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            empty_markers: DEFAULT_EMPTY_MARKERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            timestamp_column: DEFAULT_TIMESTAMP_COLUMN.to_string(),
        }
    }
}

impl LoadOptions {
    pub fn is_empty_marker(&self, raw: &str) -> bool {
        let t = raw.trim();
        self.empty_markers
            .iter()
            .any(|m| m.trim().eq_ignore_ascii_case(t))
    }
}

/// What loading noticed without changing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub rows: usize,
    pub empty_cells: usize,
    /// Categorical values absent from the declared candidates, per field.
    pub out_of_vocabulary: BTreeMap<String, usize>,
}

/// Loads a delimited table (first row = header) of historical submissions.
pub fn load_dataset(
    schema: &FormSchema,
    path: &Path,
    options: &LoadOptions,
) -> Result<(Dataset, LoadReport)> {
    let bytes = fs::read(path).map_err(|e| Error::io("data", path, e))?;
    read_dataset(schema, &bytes[..], options)
}

pub fn read_dataset<R: std::io::Read>(
    schema: &FormSchema,
    reader: R,
    options: &LoadOptions,
) -> Result<(Dataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            what: "data",
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let ts_col = header
        .iter()
        .position(|h| *h == options.timestamp_column)
        .ok_or_else(|| {
            Error::Data(format!(
                "missing timestamp column `{}`",
                options.timestamp_column
            ))
        })?;
    for (i, h) in header.iter().enumerate() {
        if i != ts_col && schema.field(h).is_none() {
            return Err(Error::Data(format!(
                "header column {} `{h}` is not a schema field",
                i + 1
            )));
        }
    }

    let mut report = LoadReport::default();
    let mut instances = Vec::new();
    for (row_no, record) in rdr.records().enumerate() {
        let line = row_no + 2;
        let record = record.map_err(|e| Error::Parse {
            what: "data",
            message: format!("line {line}: {e}"),
        })?;
        if record.len() != header.len() {
            return Err(Error::Data(format!(
                "line {line}: expected {} columns, found {}",
                header.len(),
                record.len()
            )));
        }
        let ts_raw = record[ts_col].trim();
        let submitted_at: i64 = ts_raw
            .parse()
            .map_err(|_| Error::Data(format!("line {line}: bad timestamp `{ts_raw}`")))?;

        let mut values: BTreeMap<String, Cell> = schema
            .fields
            .iter()
            .map(|f| (f.name.clone(), None))
            .collect();
        for (i, raw) in record.iter().enumerate() {
            if i == ts_col {
                continue;
            }
            let name = &header[i];
            let cell = if options.is_empty_marker(raw) {
                report.empty_cells += 1;
                None
            } else {
                let v = raw.trim().to_string();
                let field = schema.field(name).expect("checked above");
                if field.is_categorical() && !field.candidates().contains(&v) {
                    *report.out_of_vocabulary.entry(name.clone()).or_default() += 1;
                }
                Some(v)
            };
            values.insert(name.clone(), cell);
        }
        instances.push(InputInstance {
            values,
            submitted_at,
        });
    }
    report.rows = instances.len();
    Ok((Dataset::new(schema.clone(), instances)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(name: &str, kind: FieldKind, tab: usize, cands: Option<&[&str]>) -> FieldSchema {
        FieldSchema {
            name: name.into(),
            kind,
            candidates: cands.map(|c| c.iter().map(|s| s.to_string()).collect()),
            mandatory: false,
            tab_index: tab,
        }
    }

    #[test]
    fn empty_schema_rejected() {
        let err = FormSchema::new("f", vec![]).unwrap_err();
        assert!(err.to_string().contains("empty schema"));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = FormSchema::new(
            "f",
            vec![
                field("income", FieldKind::Numerical, 0, None),
                field("income", FieldKind::Numerical, 1, None),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate field name"), "{err}");
        assert!(err.to_string().contains("income"));
    }

    #[test]
    fn categorical_needs_candidates() {
        let err = FormSchema::new("f", vec![field("c", FieldKind::Categorical, 0, Some(&[]))])
            .unwrap_err();
        assert!(err.to_string().contains("empty candidate list"));
        assert!(err.to_string().contains("fields[0]"));
    }

    #[test]
    fn tab_index_must_be_permutation() {
        let err = FormSchema::new(
            "f",
            vec![
                field("a", FieldKind::Textual, 0, None),
                field("b", FieldKind::Textual, 0, None),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("tab_index"));
    }

    #[test]
    fn nearest_name_hint() {
        let s = FormSchema::new(
            "f",
            vec![
                field("primary activity", FieldKind::Categorical, 0, Some(&["x"])),
                field("entity", FieldKind::Categorical, 1, Some(&["y"])),
            ],
        )
        .unwrap();
        assert_eq!(
            s.nearest_name("primary activty").as_deref(),
            Some("primary activity")
        );
        let e = s.unknown_field("entiy");
        assert!(e.to_string().contains("did you mean `entity`"));
    }

    #[test]
    fn empty_markers_are_case_insensitive_and_trimmed() {
        let o = LoadOptions::default();
        assert!(o.is_empty_marker(" N/A "));
        assert!(o.is_empty_marker("NULL"));
        assert!(o.is_empty_marker(""));
        assert!(!o.is_empty_marker("Nairobi"));
    }

    #[test]
    fn load_rejects_bad_tables() {
        let s = FormSchema::new("f", vec![field("a", FieldKind::Textual, 0, None)]).unwrap();
        let o = LoadOptions::default();
        let no_ts = read_dataset(&s, "a\nx\n".as_bytes(), &o).unwrap_err();
        assert!(no_ts.to_string().contains("missing timestamp column"));
        let unknown = read_dataset(&s, "a,b,submission_time\nx,y,1\n".as_bytes(), &o).unwrap_err();
        assert!(unknown.to_string().contains("`b`"));
        let arity = read_dataset(&s, "a,submission_time\nx,1,9\n".as_bytes(), &o).unwrap_err();
        assert!(arity.to_string().contains("line 2"), "{arity}");
    }

    #[test]
    fn header_only_gives_empty_dataset() {
        let s = FormSchema::new("f", vec![field("a", FieldKind::Textual, 0, None)]).unwrap();
        let (d, r) = read_dataset(
            &s,
            "a,submission_time\n".as_bytes(),
            &LoadOptions::default(),
        )
        .unwrap();
        assert!(d.is_empty());
        assert_eq!(r.rows, 0);
    }

    #[test]
    fn out_of_vocabulary_is_counted_and_kept() {
        let s = FormSchema::new(
            "f",
            vec![field("c", FieldKind::Categorical, 0, Some(&["x"]))],
        )
        .unwrap();
        let (d, r) = read_dataset(
            &s,
            "c,submission_time\nx,2\n z ,1\nnull,3\n".as_bytes(),
            &LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(r.out_of_vocabulary["c"], 1);
        assert_eq!(r.empty_cells, 1);
        assert_eq!(d.instances[0].get("c"), Some("z"));
        assert_eq!(d.instances[0].submitted_at, 1);
        assert_eq!(d.instances[2].get("c"), None);
    }
}
