//! Loads a JSON experiment config, runs it, and prints where the trace CSVs
//! and the summary landed. Pass a config path, or the bundled
//! `examples/configs/quadratic_rates.json` is used.

use std::path::PathBuf;

use ocpopt::harness::{execute, load_config_with, LoadOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/quadratic_rates.json")
    });
    let out = std::env::temp_dir().join("ocpopt-experiment");
    let options = LoadOptions {
        seed: None,
        output_dir: Some(out),
    };
    let cfg = load_config_with(&path, &options)?;
    let result = execute(&cfg)?;

    for run in &result.runs {
        let rep = &run.report;
        println!(
            "{:<32} {:<20} {:>4} iterations  {}  defaulted {:?}",
            rep.id, rep.stop_reason, rep.iterations, rep.classification, rep.parameters.defaulted
        );
    }
    println!("summary written to {}", result.summary_path().display());
    println!("exit code {}", result.exit_code());
    Ok(())
}
