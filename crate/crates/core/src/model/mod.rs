//! Training of the global network, clustering on its independent fields, and
//! one local network per cluster.

mod artifact;
pub mod kmodes;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{fit_cpts, learn_structure, BayesNet, Dag, StructureConfig};
use crate::error::{Error, Result};
use crate::preprocess::{self, PreprocessConfig, PreprocessModel};
use crate::schema::{Dataset, FormSchema};
use crate::table::DiscreteTable;

pub use self::artifact::FORMAT_VERSION;
pub use self::kmodes::{elbow_curve, kmodes, knee, select_k, KModes, KModesConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    pub preprocess: PreprocessConfig,
    /// Search settings. Its `seed` is replaced by one derived from [`BuildConfig::seed`].
    pub structure: StructureConfig,
    /// Additive smoothing for CPTs.
    pub alpha: f64,
    /// Largest k tried by the elbow method.
    pub k_max: usize,
    /// Skip the elbow method and use this many clusters.
    pub fixed_k: Option<usize>,
    pub kmodes: KModesConfig,
    /// Clusters smaller than this reuse the global structure and only refit CPTs.
    pub min_cluster_rows: usize,
    /// Train local models at all.
    pub local_models: bool,
    /// Use these edges for the global network instead of learning them.
    pub global_edges: Option<Vec<(String, String)>>,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            preprocess: PreprocessConfig::default(),
            structure: StructureConfig::default(),
            alpha: 1.0,
            k_max: 100,
            fixed_k: None,
            kmodes: KModesConfig::default(),
            min_cluster_rows: 30,
            local_models: true,
            global_edges: None,
            seed: 0,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        if self.fixed_k == Some(0) {
            return Err(Error::Config("fixed_k must be at least 1".into()));
        }
        Ok(())
    }

    /// Reads a TOML or JSON config; unspecified keys keep their defaults.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io("config", path, e))?;
        let cfg: BuildConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                what: "config",
                message: e.to_string(),
            })?
        } else {
            toml::from_str(&text).map_err(|e| Error::Parse {
                what: "config",
                message: e.to_string(),
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything needed to serve suggestions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub schema: FormSchema,
    pub schema_fingerprint: String,
    pub preprocess: PreprocessModel,
    pub global: BayesNet,
    /// Root nodes of the global network, in tab order.
    pub independent_fields: Vec<String>,
    /// Mode of each cluster over the independent fields.
    pub centroids: Vec<BTreeMap<String, String>>,
    /// One network per centroid.
    pub locals: Vec<BayesNet>,
    pub config: BuildConfig,
}

/// Diagnostics from [`build`] that are not needed at suggestion time.
#[derive(Clone, Debug, Serialize)]
pub struct BuildReport {
    pub rows_loaded: usize,
    pub rows_kept: usize,
    pub removed_fields: Vec<preprocess::RemovedField>,
    pub global_edges: usize,
    pub independent_fields: Vec<String>,
    /// `J(k)` for k = 1, 2, ... when the elbow method ran.
    pub elbow_curve: Vec<f64>,
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    /// Cluster of each kept training row.
    pub assignment: Vec<usize>,
    /// Per local model: whether its structure was learned (false: global DAG refit).
    pub local_learned: Vec<bool>,
    pub local_edges: Vec<usize>,
    pub seconds: f64,
}

/// Fields with no parents in the network, in node order.
pub fn independent_fields(net: &BayesNet) -> Vec<String> {
    net.dag
        .roots()
        .into_iter()
        .map(|i| net.dag.nodes()[i].clone())
        .collect()
}

fn structure_config(cfg: &BuildConfig, stream: u64) -> StructureConfig {
    StructureConfig {
        seed: cfg.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ..cfg.structure.clone()
    }
}

fn global_dag(table: &DiscreteTable, cfg: &BuildConfig) -> Result<Dag> {
    let Some(edges) = &cfg.global_edges else {
        return learn_structure(table, &structure_config(cfg, 0));
    };
    let names: Vec<String> = table.variables.iter().map(|v| v.name.clone()).collect();
    let pairs: Vec<(&str, &str)> = edges
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    Dag::from_edges(names, &pairs).map_err(|e| Error::Config(format!("global_edges: {e}")))
}

/// Preprocesses the data, learns the global network, clusters on its independent
/// fields and trains one local network per cluster.
pub fn build(dataset: &Dataset, cfg: &BuildConfig) -> Result<(ModelBundle, BuildReport)> {
    cfg.validate()?;
    let started = Instant::now();
    let (pre, fitted) = preprocess::fit(dataset, &cfg.preprocess)?;
    let table = fitted.table;

    let global = fit_cpts(&global_dag(&table, cfg)?, &table, cfg.alpha)?;
    let independent = independent_fields(&global);

    let mut report = BuildReport {
        rows_loaded: dataset.len(),
        rows_kept: table.n_rows(),
        removed_fields: pre.removed.clone(),
        global_edges: global.dag.edge_count(),
        independent_fields: independent.clone(),
        elbow_curve: Vec::new(),
        k: 0,
        cluster_sizes: Vec::new(),
        assignment: Vec::new(),
        local_learned: Vec::new(),
        local_edges: Vec::new(),
        seconds: 0.0,
    };

    let mut centroids = Vec::new();
    let mut locals = Vec::new();
    if cfg.local_models && !independent.is_empty() {
        let cols: Vec<usize> = independent
            .iter()
            .map(|n| table.index_of(n).unwrap())
            .collect();
        let rows: Vec<Vec<u32>> = (0..table.n_rows())
            .map(|r| cols.iter().map(|&c| table.columns[c][r]).collect())
            .collect();
        let k = match cfg.fixed_k {
            Some(k) => k,
            None => {
                report.elbow_curve = elbow_curve(&rows, cfg.k_max, cfg.seed, &cfg.kmodes)?;
                knee(&report.elbow_curve)
            }
        };
        let clusters = kmodes(&rows, k, cfg.seed, &cfg.kmodes)?;

        centroids = clusters
            .centroids
            .iter()
            .map(|c| {
                cols.iter()
                    .zip(c)
                    .map(|(&col, &code)| {
                        let v = &table.variables[col];
                        (v.name.clone(), v.states[code as usize].clone())
                    })
                    .collect()
            })
            .collect();

        let members: Vec<Vec<usize>> = (0..k)
            .map(|j| {
                (0..table.n_rows())
                    .filter(|&r| clusters.assignment[r] == j)
                    .collect()
            })
            .collect();
        let trained: Vec<(BayesNet, bool)> = members
            .par_iter()
            .enumerate()
            .map(|(j, rows)| {
                let sub = table.select_rows(rows);
                let learned = rows.len() >= cfg.min_cluster_rows && cfg.global_edges.is_none();
                let dag = if learned {
                    learn_structure(&sub, &structure_config(cfg, j as u64 + 1))?
                } else {
                    global.dag.clone()
                };
                Ok((fit_cpts(&dag, &sub, cfg.alpha)?, learned))
            })
            .collect::<Result<_>>()?;

        report.k = k;
        report.cluster_sizes = members.iter().map(Vec::len).collect();
        report.assignment = clusters.assignment;
        for (net, learned) in trained {
            report.local_learned.push(learned);
            report.local_edges.push(net.dag.edge_count());
            locals.push(net);
        }
    }
    report.seconds = started.elapsed().as_secs_f64();

    let bundle = ModelBundle {
        format_version: FORMAT_VERSION,
        schema_fingerprint: dataset.schema.fingerprint(),
        schema: dataset.schema.clone(),
        preprocess: pre,
        global,
        independent_fields: independent,
        centroids,
        locals,
        config: cfg.clone(),
    };
    Ok((bundle, report))
}
