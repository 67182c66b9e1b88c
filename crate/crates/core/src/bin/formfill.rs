use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use formfill::evaluation::{run_benchmark, Algorithm, BenchmarkConfig, Scenario};
use formfill::model::{build, BuildConfig, ModelBundle};
use formfill::schema::{load_dataset, load_schema, Dataset, LoadOptions};
use formfill::service::{serve, AppState, Loaded};
use formfill::suggest::{suggest, ListSize, SuggestionRequest, DEFAULT_THETA, DEFAULT_TOP_PERCENT};
use formfill::{Error, Result};

#[derive(Parser)]
#[command(
    name = "formfill",
    version,
    about = "Value suggestions for partially filled forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a model bundle from historical submissions.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// TOML or JSON build settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank values for one field of a partially filled form.
    Suggest {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        target: String,
        /// A filled field as `name=value`; repeatable.
        #[arg(long, value_parser = parse_pair)]
        filled: Vec<(String, String)>,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_TOP_PERCENT)]
        top_percent: f64,
        /// Suggest exactly this many values instead of a percentage.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Compare algorithms on a time-ordered split of the data.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// TOML or JSON benchmark settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "sequential")]
        scenario: String,
        /// Comma-separated algorithm names.
        #[arg(long, default_value = "bn,mfm,arm,fls")]
        algorithms: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for report.json and report.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the schema and suggestions over HTTP.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.to_string()))
        .ok_or_else(|| format!("expected name=value, got `{s}`"))
}

fn load_data(data: &Path, schema: &Path) -> Result<Dataset> {
    let schema = load_schema(schema)?;
    let (dataset, report) = load_dataset(&schema, data, &LoadOptions::default())?;
    for (field, n) in &report.out_of_vocabulary {
        eprintln!("note: {n} value(s) of `{field}` are not among its declared candidates");
    }
    Ok(dataset)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io("output", path, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            data,
            schema,
            config,
            seed,
            out,
        } => {
            let dataset = load_data(&data, &schema)?;
            let mut cfg = config
                .as_deref()
                .map(BuildConfig::load)
                .transpose()?
                .unwrap_or_default();
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let (bundle, report) = build(&dataset, &cfg)?;
            bundle.save(&out)?;
            println!(
                "rows: {} loaded, {} kept",
                report.rows_loaded, report.rows_kept
            );
            for f in &report.removed_fields {
                println!("removed field `{}`: {}", f.name, f.reason);
            }
            println!(
                "independent fields: {}",
                report.independent_fields.join(", ")
            );
            println!("k: {}", report.k);
            println!(
                "global: {} nodes, {} edges",
                bundle.global.node_names().len(),
                report.global_edges
            );
            for (i, (size, edges)) in report
                .cluster_sizes
                .iter()
                .zip(&report.local_edges)
                .enumerate()
            {
                let how = if report.local_learned[i] {
                    "learned"
                } else {
                    "global structure"
                };
                println!("local {i}: {size} rows, {edges} edges ({how})");
            }
            println!("training time: {:.3}s", report.seconds);
            println!("wrote {}", out.display());
        }
        Command::Suggest {
            model,
            target,
            filled,
            theta,
            top_percent,
            count,
        } => {
            let bundle = ModelBundle::load(&model)?;
            let size = match count {
                Some(n) => ListSize::Count(n),
                None => ListSize::TopPercent {
                    percent: top_percent,
                    min_count: 1,
                },
            };
            let request = SuggestionRequest {
                filled: filled.into_iter().collect::<BTreeMap<_, _>>(),
                target,
                size,
                theta,
            };
            let s = suggest(&bundle, &request)?;
            println!(
                "model: {} | check_dep: {} | check_prob: {} | top_mass: {:.4}",
                s.model_used, s.check_dep, s.check_prob, s.top_mass
            );
            if s.endorsed {
                for (i, item) in s.items.iter().enumerate() {
                    println!("{}. {} {:.4}", i + 1, item.value, item.probability);
                }
            } else {
                println!("no suggestion (not endorsed)");
            }
        }
        Command::Evaluate {
            data,
            schema,
            config,
            scenario,
            algorithms,
            seed,
            out,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let algorithms = Algorithm::parse_list(&algorithms)?;
            let cfg = config
                .as_deref()
                .map(BenchmarkConfig::load)
                .transpose()?
                .unwrap_or_default();
            let dataset = load_data(&data, &schema)?;
            let report = run_benchmark(&dataset, &algorithms, scenario, seed, &cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io("output", &out, e))?;
            write(&out.join("report.json"), &report.to_json()?)?;
            write(&out.join("report.csv"), &report.to_csv()?)?;
            println!(
                "{} train / {} test instances, {} cases ({scenario})",
                report.train_instances, report.test_instances, report.cases
            );
            let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
            for a in &report.algorithms {
                match (&a.error, &a.overall) {
                    (Some(e), _) => println!("{:<18} error: {e}", a.algorithm),
                    (None, Some(s)) => {
                        println!("{:<18} mrr {} pcr {}", a.algorithm, fmt(s.mrr), fmt(s.pcr))
                    }
                    (None, None) => {}
                }
            }
            println!("wrote {}", out.display());
        }
        Command::Serve { model, bind } => {
            let state = AppState::new(Loaded::from_file(&model)?);
            let rt = tokio::runtime::Runtime::new().map_err(|source| Error::Io {
                what: "runtime",
                source,
            })?;
            eprintln!("listening on {bind}");
            rt.block_on(serve(state, &bind))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!(
                "error: {}",
                msg.lines()
                    .next()
                    .unwrap_or("invalid arguments")
                    .trim_start_matches("error: ")
            );
            return ExitCode::from(4);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
