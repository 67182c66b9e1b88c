//! Ranked value suggestions for one unfilled categorical field.
//!
//! The partial input is preprocessed like the training data, a model is chosen
//! by mismatch distance to the cluster centroids, the target's posterior is
//! ranked and an endorser decides whether the ranking is shown at all.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::bayes::BayesNet;
use crate::error::{Error, Result};
use crate::model::ModelBundle;
use crate::preprocess::UNKNOWN;

pub const DEFAULT_THETA: f64 = 0.7;
pub const DEFAULT_TOP_PERCENT: f64 = 5.0;

/// How many values to suggest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListSize {
    /// `max(ceil(percent% of the candidate count), min_count)`.
    TopPercent {
        percent: f64,
        min_count: usize,
    },
    Count(usize),
}

impl Default for ListSize {
    fn default() -> Self {
        ListSize::TopPercent {
            percent: DEFAULT_TOP_PERCENT,
            min_count: 1,
        }
    }
}

impl ListSize {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ListSize::TopPercent { percent, .. } if !(percent > 0.0 && percent <= 100.0) => Err(
                Error::InvalidRequest(format!("top_percent must be in (0,100], got {percent}")),
            ),
            ListSize::Count(0) => Err(Error::InvalidRequest(
                "suggestion count must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }

    /// List length for a field with `candidates` selectable values.
    pub fn resolve(&self, candidates: usize) -> usize {
        match *self {
            ListSize::TopPercent { percent, min_count } => {
                // The epsilon keeps exact products such as 5% of 60 from rounding up.
                let n = (percent * candidates as f64 / 100.0 - 1e-9).ceil().max(0.0) as usize;
                n.max(min_count)
            }
            ListSize::Count(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuggestionRequest {
    /// Raw values of the fields filled so far.
    pub filled: BTreeMap<String, String>,
    pub target: String,
    pub size: ListSize,
    /// Minimum top-list probability mass for the probability check.
    pub theta: f64,
}

impl SuggestionRequest {
    pub fn new(target: impl Into<String>, filled: BTreeMap<String, String>) -> Self {
        SuggestionRequest {
            filled,
            target: target.into(),
            size: ListSize::default(),
            theta: DEFAULT_THETA,
        }
    }
}

/// Ablation switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub local_models: bool,
    pub endorser: bool,
}

impl Default for Variant {
    fn default() -> Self {
        Variant {
            local_models: true,
            endorser: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelUsed {
    Global,
    /// Index into the bundle's local models.
    Local(usize),
}

impl fmt::Display for ModelUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelUsed::Global => f.write_str("global"),
            ModelUsed::Local(i) => write!(f, "local {i}"),
        }
    }
}

impl Serialize for ModelUsed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedValue {
    pub value: String,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Suggestion {
    pub endorsed: bool,
    /// Empty unless endorsed.
    pub items: Vec<RankedValue>,
    pub model_used: ModelUsed,
    /// A parent of the target in the chosen model is filled.
    pub check_dep: bool,
    /// `top_mass > theta`.
    pub check_prob: bool,
    /// Posterior mass of the top list, reported even when withheld.
    pub top_mass: f64,
    /// The filled values were impossible under the model; the ranking uses the prior.
    pub zero_evidence: bool,
}

/// Mismatch count between the filled independent fields and each centroid.
/// An unfilled independent field counts as a mismatch.
pub fn centroid_distances(
    bundle: &ModelBundle,
    pre_filled: &BTreeMap<String, String>,
) -> Vec<usize> {
    bundle
        .centroids
        .iter()
        .map(|c| {
            c.iter()
                .filter(|(field, value)| pre_filled.get(*field) != Some(*value))
                .count()
        })
        .collect()
}

/// The local model of the unique nearest centroid, otherwise the global model.
pub fn select_model(bundle: &ModelBundle, pre_filled: &BTreeMap<String, String>) -> ModelUsed {
    let d = centroid_distances(bundle, pre_filled);
    let Some(&min) = d.iter().min() else {
        return ModelUsed::Global;
    };
    let mut at_min = d.iter().enumerate().filter(|(_, &x)| x == min);
    match (at_min.next(), at_min.next()) {
        (Some((i, _)), None) => ModelUsed::Local(i),
        _ => ModelUsed::Global,
    }
}

impl ModelBundle {
    pub fn model(&self, which: ModelUsed) -> &BayesNet {
        match which {
            ModelUsed::Global => &self.global,
            ModelUsed::Local(i) => &self.locals[i],
        }
    }

    /// Checks that `target` can receive suggestions and returns its selectable values.
    pub fn suggestable_values(&self, target: &str) -> Result<&[String]> {
        let field = self
            .schema
            .field(target)
            .ok_or_else(|| self.schema.unknown_field(target))?;
        if self.preprocess.field(target).is_none() {
            return Err(Error::TargetNotModeled(target.to_string()));
        }
        if !field.is_categorical() {
            return Err(Error::NotCategorical(target.to_string()));
        }
        Ok(field.candidates())
    }
}

/// Suggestion with all components enabled.
pub fn suggest(bundle: &ModelBundle, request: &SuggestionRequest) -> Result<Suggestion> {
    suggest_variant(bundle, request, Variant::default())
}

pub fn suggest_variant(
    bundle: &ModelBundle,
    request: &SuggestionRequest,
    variant: Variant,
) -> Result<Suggestion> {
    let target = request.target.as_str();
    let candidates = bundle.suggestable_values(target)?;
    if !(0.0..=1.0).contains(&request.theta) {
        return Err(Error::InvalidRequest(format!(
            "theta must be in [0,1], got {}",
            request.theta
        )));
    }
    request.size.validate()?;
    for (name, value) in &request.filled {
        if bundle.schema.field(name).is_none() {
            return Err(bundle.schema.unknown_field(name));
        }
        if name == target && !value.trim().is_empty() {
            return Err(Error::InvalidRequest(format!(
                "target `{target}` is already filled"
            )));
        }
    }
    let mut pre = bundle.preprocess.apply(&request.filled);
    pre.remove(target);

    let model_used = if variant.local_models {
        select_model(bundle, &pre)
    } else {
        ModelUsed::Global
    };
    let net = bundle.model(model_used);
    let posterior = net.infer_posterior(&pre, target)?;

    let t = net.index(target).expect("target is modeled");
    let states = &net.variables[t].states;
    let allowed: BTreeSet<&str> = candidates.iter().map(String::as_str).collect();
    let mut ranked: Vec<RankedValue> = states
        .iter()
        .zip(&posterior.probs)
        .filter(|(v, _)| v.as_str() != UNKNOWN && allowed.contains(v.as_str()))
        .map(|(v, &p)| RankedValue {
            value: v.clone(),
            probability: p,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.value.cmp(&b.value))
    });
    ranked.truncate(request.size.resolve(candidates.len()));

    let top_mass: f64 = ranked.iter().map(|r| r.probability).sum();
    let check_dep = net.parents(target)?.iter().any(|p| pre.contains_key(p));
    let check_prob = top_mass > request.theta;
    let endorsed = !variant.endorser || check_dep || check_prob;
    if !endorsed {
        ranked.clear();
    }
    Ok(Suggestion {
        endorsed,
        items: ranked,
        model_used,
        check_dep,
        check_prob,
        top_mass,
        zero_evidence: posterior.zero_evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_size_resolution() {
        let p = ListSize::default();
        assert_eq!(p.resolve(100), 5);
        assert_eq!(p.resolve(60), 3);
        assert_eq!(p.resolve(61), 4);
        assert_eq!(p.resolve(3), 1);
        assert_eq!(ListSize::Count(3).resolve(100), 3);
        assert!(ListSize::Count(0).validate().is_err());
        assert!(ListSize::TopPercent {
            percent: 0.0,
            min_count: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn model_used_renders_as_text() {
        assert_eq!(
            serde_json::to_string(&ModelUsed::Global).unwrap(),
            "\"global\""
        );
        assert_eq!(ModelUsed::Local(2).to_string(), "local 2");
    }
}
