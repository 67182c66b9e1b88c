//! JSON persistence of [`ModelBundle`].
//!
//! All maps are ordered, so serializing the same bundle always yields the same bytes.

use std::path::Path;

use super::ModelBundle;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

impl ModelBundle {
    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Artifact(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: ModelBundle =
            serde_json::from_str(text).map_err(|e| Error::Artifact(e.to_string()))?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io("model", path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io("model", path, e))?;
        Self::from_json(&text)
    }

    /// Checks internal consistency of a deserialized bundle.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Artifact(m));
        if self.format_version != FORMAT_VERSION {
            return bad(format!(
                "format version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        self.schema.validate()?;
        if self.schema.fingerprint() != self.schema_fingerprint {
            return bad("schema fingerprint does not match the embedded schema".into());
        }
        let names = self.preprocess.retained_names();
        if self
            .global
            .node_names()
            .iter()
            .map(String::as_str)
            .ne(names.iter().copied())
        {
            return bad("global network nodes differ from the retained fields".into());
        }
        self.global
            .validate()
            .or_else(|e| bad(format!("global network: {e}")))?;
        if self.centroids.len() != self.locals.len() {
            return bad(format!(
                "{} centroids but {} local models",
                self.centroids.len(),
                self.locals.len()
            ));
        }
        for (i, c) in self.centroids.iter().enumerate() {
            if c.len() != self.independent_fields.len()
                || !self.independent_fields.iter().all(|f| c.contains_key(f))
            {
                return bad(format!(
                    "centroid {i} does not cover exactly the independent fields"
                ));
            }
        }
        for (i, local) in self.locals.iter().enumerate() {
            if local.variables != self.global.variables {
                return bad(format!(
                    "local model {i} has different variables from the global one"
                ));
            }
            local
                .validate()
                .or_else(|e| bad(format!("local model {i}: {e}")))?;
        }
        Ok(())
    }
}
