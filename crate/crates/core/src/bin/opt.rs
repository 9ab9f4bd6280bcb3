use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ocpopt::harness::{
    execute, load_config_with, verify_ocp, LoadOptions, DEFAULT_OCP_TRIALS, OCP_TOLERANCE,
};
use ocpopt::problems::{problem_description, PROBLEM_NAMES};
use ocpopt::steppers::Algorithm;

#[derive(Parser)]
#[command(name = "opt", version, about = "Run and analyse optimal-control-derived minimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the runs of a JSON experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for randomized problems (overrides the config's `seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-check the exact LQ solver against brute force on random problems.
    VerifyOcp {
        #[arg(long, default_value_t = DEFAULT_OCP_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the available problems and algorithms.
    List,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, seed } => run(config, out, seed),
        Command::VerifyOcp { trials, seed } => verify(trials, seed),
        Command::List => {
            println!("problems:");
            for name in PROBLEM_NAMES {
                println!("  {name:<22} {}", problem_description(name).unwrap_or(""));
            }
            println!("algorithms:");
            for alg in Algorithm::ALL {
                println!("  {:<22} {}", alg.name(), alg.description());
            }
            ExitCode::SUCCESS
        }
    }
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> ExitCode {
    let options = LoadOptions {
        seed,
        output_dir: out,
    };
    let cfg = match load_config_with(&config, &options) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    println!(
        "{:<40} {:<18} {:>6} {:>11} {:>11}  rate",
        "run", "stop", "iters", "|grad|", "error"
    );
    for r in &result.runs {
        let rep = &r.report;
        let stop = rep.stop_reason.split(':').next().unwrap_or("");
        println!(
            "{:<40} {:<18} {:>6} {:>11} {:>11}  {}",
            rep.id,
            stop,
            rep.iterations,
            fmt_opt(rep.final_grad_norm),
            fmt_opt(rep.final_error),
            rep.classification
        );
        for w in &rep.warnings {
            println!("    warning: {w}");
        }
        if let ocpopt::steppers::StopReason::NumericalFailure(e) = &r.outcome.stop {
            println!("    failure: {e}");
        }
    }
    println!("summary: {}", result.summary_path().display());
    ExitCode::from(result.exit_code() as u8)
}

fn verify(trials: usize, seed: u64) -> ExitCode {
    let report = verify_ocp(seed, trials);
    println!(
        "trials {}  max disagreement {:.3e}  max residual {:.3e}  (tolerance {:.0e})",
        report.trials, report.max_disagreement, report.max_residual, OCP_TOLERANCE
    );
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for f in &report.failures {
            eprintln!(
                "failed: seed {} disagreement {} residual {}{}",
                f.seed,
                fmt_opt(f.disagreement),
                fmt_opt(f.residual),
                f.error.as_ref().map(|e| format!(" error: {e}")).unwrap_or_default()
            );
        }
        ExitCode::from(1)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}
