//! Offline evaluation: time-ordered split, simulated filling orders, and
//! per-algorithm ranking quality and coverage.

pub mod metrics;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fls_suggest, Arm, ArmConfig, Mfm};
use crate::error::{Error, Result};
use crate::model::{build, BuildConfig, ModelBundle};
use crate::schema::{Dataset, FormSchema, InputInstance};
use crate::suggest::{suggest_variant, ListSize, SuggestionRequest, Variant, DEFAULT_THETA};

pub use self::metrics::{mann_whitney_u, mrr, pcr, reciprocal_rank, MannWhitney};

/// Minimum number of declared candidates for a field to be a test target.
pub const DEFAULT_MIN_CANDIDATES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Fields are filled in tab order.
    Sequential,
    /// Each instance is filled in its own random order.
    Random,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Sequential => "sequential",
            Scenario::Random => "random",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sequential" => Ok(Scenario::Sequential),
            "random" => Ok(Scenario::Random),
            _ => Err(Error::Config(format!(
                "unknown scenario `{s}` (valid: sequential, random)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub filled: BTreeMap<String, String>,
    pub target: String,
    pub ground_truth: String,
    pub scenario: Scenario,
    /// Index into the test dataset.
    pub source_instance: usize,
}

/// The first `ceil(ratio * N)` instances in time order train, the rest test.
pub fn split_by_time(dataset: &Dataset, ratio: f64) -> Result<(Dataset, Dataset)> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Evaluation(format!(
            "need at least 2 instances to split, got {n}"
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!(
            "split ratio must be in (0,1), got {ratio}"
        )));
    }
    let cut = (ratio * n as f64 - 1e-9).ceil() as usize;
    if cut == 0 || cut >= n {
        return Err(Error::Evaluation(format!(
            "ratio {ratio} leaves an empty side for {n} instances"
        )));
    }
    let part = |range: std::ops::Range<usize>| Dataset {
        schema: dataset.schema.clone(),
        instances: dataset.instances[range].to_vec(),
    };
    Ok((part(0..cut), part(cut..n)))
}

/// Categorical fields with at least `min_candidates` declared candidates, in tab order.
pub fn eligible_targets(schema: &FormSchema, min_candidates: usize) -> Vec<String> {
    schema
        .in_tab_order()
        .into_iter()
        .filter(|f| f.is_categorical() && f.candidates().len() >= min_candidates)
        .map(|f| f.name.clone())
        .collect()
}

/// Cases for one instance filled in `order`: one per eligible target with a value,
/// whose filled fields are the non-empty ones before it.
pub fn cases_from_order(
    instance: &InputInstance,
    order: &[&str],
    eligible: &[String],
    scenario: Scenario,
    source_instance: usize,
) -> Vec<TestCase> {
    let mut cases = Vec::new();
    for (i, &field) in order.iter().enumerate() {
        let Some(truth) = instance.get(field) else {
            continue;
        };
        if !eligible.iter().any(|e| e == field) {
            continue;
        }
        let filled = order[..i]
            .iter()
            .filter_map(|&f| instance.get(f).map(|v| (f.to_string(), v.to_string())))
            .collect();
        cases.push(TestCase {
            filled,
            target: field.to_string(),
            ground_truth: truth.to_string(),
            scenario,
            source_instance,
        });
    }
    cases
}

/// Simulates form filling on every test instance. The random scenario draws one
/// permutation per instance from a single seeded stream.
pub fn generate_cases(
    test: &Dataset,
    scenario: Scenario,
    seed: u64,
    eligible: &[String],
) -> Vec<TestCase> {
    let tab: Vec<&str> = test
        .schema
        .in_tab_order()
        .iter()
        .map(|f| f.name.as_str())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for (i, inst) in test.instances.iter().enumerate() {
        let mut order = tab.clone();
        if scenario == Scenario::Random {
            order.shuffle(&mut rng);
        }
        cases.extend(cases_from_order(inst, &order, eligible, scenario, i));
    }
    cases
}

/// An algorithm under evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Bayesian-network suggester with the given components switched on.
    Bn(Variant),
    Mfm,
    Arm,
    Fls,
}

impl Algorithm {
    pub const NAMES: [&'static str; 7] = [
        "bn",
        "bn-global",
        "bn-always",
        "bn-global-always",
        "mfm",
        "arm",
        "fls",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bn(v) => match (v.local_models, v.endorser) {
                (true, true) => "bn",
                (false, true) => "bn-global",
                (true, false) => "bn-always",
                (false, false) => "bn-global-always",
            },
            Algorithm::Mfm => "mfm",
            Algorithm::Arm => "arm",
            Algorithm::Fls => "fls",
        }
    }

    /// Parses a comma-separated list.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bn = |local_models, endorser| {
            Algorithm::Bn(Variant {
                local_models,
                endorser,
            })
        };
        // The `laff*` spellings are accepted as aliases of the network variants.
        match s.to_ascii_lowercase().as_str() {
            "bn" | "laff" => Ok(bn(true, true)),
            "bn-global" | "laff-l" => Ok(bn(false, true)),
            "bn-always" | "laff-e" => Ok(bn(true, false)),
            "bn-global-always" | "laff-le" => Ok(bn(false, false)),
            "mfm" => Ok(Algorithm::Mfm),
            "arm" => Ok(Algorithm::Arm),
            "fls" => Ok(Algorithm::Fls),
            _ => Err(Error::Config(format!(
                "unknown algorithm `{s}` (valid: {})",
                Algorithm::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub split_ratio: f64,
    pub min_candidates: usize,
    /// Evaluate only these targets instead of every eligible field.
    pub targets: Option<Vec<String>>,
    pub build: BuildConfig,
    pub arm: ArmConfig,
    pub size: ListSize,
    pub theta: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            split_ratio: 0.8,
            min_candidates: DEFAULT_MIN_CANDIDATES,
            targets: None,
            build: BuildConfig::default(),
            arm: ArmConfig::default(),
            size: ListSize::default(),
            theta: DEFAULT_THETA,
        }
    }
}

impl BenchmarkConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io("config", path, e))?;
        let parse = |message: String| Error::Parse {
            what: "config",
            message,
        };
        let cfg: BenchmarkConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| parse(e.to_string()))?
        };
        cfg.build.validate()?;
        cfg.size.validate()?;
        Ok(cfg)
    }
}

/// A trained suggester that can answer test cases. `None` means "withheld".
pub trait Filler: Sync {
    fn suggest(&self, case: &TestCase) -> Result<Option<Vec<String>>>;
}

pub struct BnFiller<'a> {
    pub bundle: &'a ModelBundle,
    pub variant: Variant,
    pub size: ListSize,
    pub theta: f64,
}

impl Filler for BnFiller<'_> {
    fn suggest(&self, case: &TestCase) -> Result<Option<Vec<String>>> {
        let req = SuggestionRequest {
            filled: case.filled.clone(),
            target: case.target.clone(),
            size: self.size,
            theta: self.theta,
        };
        let s = suggest_variant(self.bundle, &req, self.variant)?;
        Ok(s.endorsed
            .then(|| s.items.into_iter().map(|i| i.value).collect()))
    }
}

pub struct MfmFiller<'a> {
    pub model: &'a Mfm,
    pub schema: &'a FormSchema,
    pub size: ListSize,
}

fn candidate_count(schema: &FormSchema, target: &str) -> usize {
    schema.field(target).map_or(0, |f| f.candidates().len())
}

impl Filler for MfmFiller<'_> {
    fn suggest(&self, case: &TestCase) -> Result<Option<Vec<String>>> {
        let n = self
            .size
            .resolve(candidate_count(self.schema, &case.target));
        Ok(Some(self.model.suggest(&case.target, n)).filter(|l| !l.is_empty()))
    }
}

pub struct ArmFiller<'a> {
    pub model: &'a Arm,
    pub schema: &'a FormSchema,
    pub size: ListSize,
}

impl Filler for ArmFiller<'_> {
    fn suggest(&self, case: &TestCase) -> Result<Option<Vec<String>>> {
        let n = self
            .size
            .resolve(candidate_count(self.schema, &case.target));
        Ok(Some(self.model.suggest(&case.filled, &case.target, n)).filter(|l| !l.is_empty()))
    }
}

/// First-letter filtering. The typed letter is taken from the ground truth, which
/// is how a user narrowing an alphabetical list would behave.
pub struct FlsFiller<'a> {
    pub schema: &'a FormSchema,
}

impl Filler for FlsFiller<'_> {
    fn suggest(&self, case: &TestCase) -> Result<Option<Vec<String>>> {
        let Some(letter) = case.ground_truth.chars().next() else {
            return Ok(None);
        };
        let candidates = self
            .schema
            .field(&case.target)
            .map_or(&[][..], |f| f.candidates());
        Ok(Some(fls_suggest(candidates, letter)).filter(|l| !l.is_empty()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mrr: Option<f64>,
    pub pcr: Option<f64>,
    /// Targets that received a suggestion.
    pub provided: usize,
    pub total: usize,
}

impl Summary {
    fn of(outcomes: &[Option<f64>]) -> Self {
        let provided = outcomes.iter().filter(|o| o.is_some()).count();
        Summary {
            mrr: mrr(outcomes),
            pcr: pcr(provided, outcomes.len()).ok(),
            provided,
            total: outcomes.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgorithmReport {
    pub algorithm: String,
    /// Set when training or suggesting failed; the metrics are then absent.
    pub error: Option<String>,
    pub overall: Option<Summary>,
    pub per_target: BTreeMap<String, Summary>,
    /// Per case, in case order: the reciprocal rank, or `None` when withheld.
    pub reciprocal_ranks: Vec<Option<f64>>,
    pub train_seconds: f64,
    pub suggest_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseTest {
    pub a: String,
    pub b: String,
    pub test: MannWhitney,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub config: BenchmarkConfig,
    pub train_instances: usize,
    pub test_instances: usize,
    pub targets: Vec<String>,
    pub cases: usize,
    pub algorithms: Vec<AlgorithmReport>,
    /// Rank-sum tests on the reciprocal ranks of provided suggestions.
    pub significance: Vec<PairwiseTest>,
}

/// Scores one trained filler on shared cases.
pub fn evaluate_filler(filler: &dyn Filler, cases: &[TestCase]) -> Result<Vec<Option<f64>>> {
    cases
        .par_iter()
        .map(|c| {
            Ok(filler
                .suggest(c)?
                .map(|list| reciprocal_rank(&list, &c.ground_truth)))
        })
        .collect()
}

fn summarize(
    name: &str,
    cases: &[TestCase],
    outcomes: Vec<Option<f64>>,
    train: f64,
    run: f64,
) -> AlgorithmReport {
    let mut by_target: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for (c, o) in cases.iter().zip(&outcomes) {
        by_target.entry(&c.target).or_default().push(*o);
    }
    AlgorithmReport {
        algorithm: name.to_string(),
        error: None,
        overall: Some(Summary::of(&outcomes)),
        per_target: by_target
            .into_iter()
            .map(|(t, o)| (t.to_string(), Summary::of(&o)))
            .collect(),
        reciprocal_ranks: outcomes,
        train_seconds: train,
        suggest_seconds: run,
    }
}

fn failed(name: &str, e: &Error) -> AlgorithmReport {
    AlgorithmReport {
        algorithm: name.to_string(),
        error: Some(e.to_string()),
        overall: None,
        per_target: BTreeMap::new(),
        reciprocal_ranks: Vec::new(),
        train_seconds: 0.0,
        suggest_seconds: 0.0,
    }
}

/// Splits by time, trains each algorithm on the older part and scores all of them
/// on the same simulated cases from the newer part.
pub fn run_benchmark(
    dataset: &Dataset,
    algorithms: &[Algorithm],
    scenario: Scenario,
    seed: u64,
    cfg: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    let (train, test) = split_by_time(dataset, cfg.split_ratio)?;
    let targets = match &cfg.targets {
        Some(t) => {
            for name in t {
                if dataset.schema.field(name).is_none() {
                    return Err(dataset.schema.unknown_field(name));
                }
            }
            t.clone()
        }
        None => eligible_targets(&dataset.schema, cfg.min_candidates),
    };
    let cases = generate_cases(&test, scenario, seed, &targets);
    let schema = &dataset.schema;

    // Every network variant shares one bundle; the switches act at suggestion time.
    let needs_bundle = algorithms.iter().any(|a| matches!(a, Algorithm::Bn(_)));
    let t0 = Instant::now();
    let bundle = needs_bundle.then(|| {
        let build_cfg = BuildConfig {
            seed,
            ..cfg.build.clone()
        };
        build(&train, &build_cfg).map(|(b, _)| b)
    });
    let bundle_secs = t0.elapsed().as_secs_f64();

    let mut reports = Vec::new();
    for &alg in algorithms {
        let name = alg.name();
        let t0 = Instant::now();
        let outcome: Result<(f64, Vec<Option<f64>>, f64)> = (|| {
            let (train_secs, outcomes) = match alg {
                Algorithm::Bn(variant) => {
                    let bundle = match bundle.as_ref().expect("bundle trained") {
                        Ok(b) => b,
                        Err(e) => return Err(Error::Evaluation(format!("training failed: {e}"))),
                    };
                    let f = BnFiller {
                        bundle,
                        variant,
                        size: cfg.size,
                        theta: cfg.theta,
                    };
                    (bundle_secs, evaluate_filler(&f, &cases)?)
                }
                Algorithm::Mfm => {
                    let model = Mfm::train(&train);
                    let secs = t0.elapsed().as_secs_f64();
                    let f = MfmFiller {
                        model: &model,
                        schema,
                        size: cfg.size,
                    };
                    (secs, evaluate_filler(&f, &cases)?)
                }
                Algorithm::Arm => {
                    let model = Arm::train(&train, &cfg.build.preprocess, &cfg.arm)?;
                    let secs = t0.elapsed().as_secs_f64();
                    let f = ArmFiller {
                        model: &model,
                        schema,
                        size: cfg.size,
                    };
                    (secs, evaluate_filler(&f, &cases)?)
                }
                Algorithm::Fls => (0.0, evaluate_filler(&FlsFiller { schema }, &cases)?),
            };
            Ok((train_secs, outcomes, t0.elapsed().as_secs_f64()))
        })();
        reports.push(match outcome {
            Ok((train_secs, outcomes, total)) => {
                summarize(name, &cases, outcomes, train_secs, total)
            }
            Err(e) => failed(name, &e),
        });
    }

    let mut significance = Vec::new();
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            let ra: Vec<f64> = a.reciprocal_ranks.iter().flatten().copied().collect();
            let rb: Vec<f64> = b.reciprocal_ranks.iter().flatten().copied().collect();
            if let Ok(test) = mann_whitney_u(&ra, &rb) {
                significance.push(PairwiseTest {
                    a: a.algorithm.clone(),
                    b: b.algorithm.clone(),
                    test,
                });
            }
        }
    }

    Ok(BenchmarkReport {
        scenario,
        seed,
        config: cfg.clone(),
        train_instances: train.len(),
        test_instances: test.len(),
        targets,
        cases: cases.len(),
        algorithms: reports,
        significance,
    })
}

impl BenchmarkReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::Evaluation(e.to_string()))
    }

    /// One row per algorithm and target, plus an `ALL` row per algorithm.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        let io = |e: csv::Error| Error::Evaluation(e.to_string());
        w.write_record([
            "algorithm",
            "target",
            "scenario",
            "mrr",
            "pcr",
            "provided",
            "total",
            "error",
        ])
        .map_err(io)?;
        let scenario = self.scenario.to_string();
        for a in &self.algorithms {
            let err = a.error.clone().unwrap_or_default();
            let rows = a
                .overall
                .iter()
                .map(|s| ("ALL", s))
                .chain(a.per_target.iter().map(|(t, s)| (t.as_str(), s)));
            let mut any = false;
            for (target, s) in rows {
                any = true;
                w.write_record([
                    a.algorithm.as_str(),
                    target,
                    &scenario,
                    &fmt(s.mrr),
                    &fmt(s.pcr),
                    &s.provided.to_string(),
                    &s.total.to_string(),
                    &err,
                ])
                .map_err(io)?;
            }
            if !any {
                w.write_record([a.algorithm.as_str(), "ALL", &scenario, "", "", "", "", &err])
                    .map_err(io)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Evaluation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}
