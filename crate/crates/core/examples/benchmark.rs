//! Compares every suggester on a synthetic form with planted dependencies.
//!
//! ```text
//! cargo run --release --example benchmark -- [instances] [random|sequential]
//! ```

use formfill::evaluation::{run_benchmark, Algorithm, BenchmarkConfig, Scenario};
use formfill::synthetic::planted;

fn main() -> formfill::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args
        .next()
        .map_or(Ok(20_000), |s| s.parse())
        .expect("instance count");
    let scenario: Scenario = args.next().as_deref().unwrap_or("sequential").parse()?;

    let data = planted(n, 1);
    let algorithms: Vec<Algorithm> = Algorithm::NAMES
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let report = run_benchmark(&data, &algorithms, scenario, 1, &BenchmarkConfig::default())?;

    println!(
        "{} train / {} test instances, {} cases, targets {:?}",
        report.train_instances, report.test_instances, report.cases, report.targets
    );
    println!(
        "{:<18} {:>7} {:>7} {:>9}",
        "algorithm", "MRR", "PCR", "seconds"
    );
    for a in &report.algorithms {
        match &a.overall {
            Some(s) => println!(
                "{:<18} {:>7.3} {:>7.3} {:>9.2}",
                a.algorithm,
                s.mrr.unwrap_or(f64::NAN),
                s.pcr.unwrap_or(f64::NAN),
                a.suggest_seconds
            ),
            None => println!(
                "{:<18} failed: {}",
                a.algorithm,
                a.error.as_deref().unwrap_or("?")
            ),
        }
    }
    println!("\nrank-sum tests on reciprocal ranks:");
    for t in report.significance.iter().filter(|t| t.a == "bn") {
        println!(
            "  bn vs {:<18} U {:>12.1}  p {:.3e}",
            t.b, t.test.u, t.test.p_value
        );
    }
    Ok(())
}
