//! `compop`: runs one registered experiment and writes its tables.
//!
//! Exit status: 0 when every in-experiment check passes, 2 when a check
//! fails, 1 on error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use compop::experiments::{run, ExperimentConfig, ExperimentId, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "compop", version, about = "Composition-operator spectra experiments")]
struct Args {
    /// Experiment id (cusp-diagonal, lens-trichotomy, tensor-lemma,
    /// spiral-harmonic, blaschke-passage, polydisk-pairs, shapiro-taylor).
    #[arg(long)]
    experiment: ExperimentId,
    /// Output directory for CSV tables and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Finite-section size K.
    #[arg(long)]
    k: Option<usize>,
    /// Polydisk dimension N.
    #[arg(long)]
    n_dim: Option<usize>,
    /// Monte Carlo trajectories or boundary samples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    /// Sub-item of polydisk-pairs (1-4).
    #[arg(long)]
    item: Option<u32>,
    /// Print the manifest as JSON on stdout.
    #[arg(long)]
    json: bool,
}

fn summary(m: &RunManifest) -> String {
    let mut s = format!("{} ({:.1} s)\n", m.experiment, m.wall_time_s);
    for c in &m.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("  {tag} {}: {}\n", c.name, c.detail));
    }
    for t in &m.tables {
        s.push_str(&format!("  wrote {} ({} rows)\n", t.file, t.rows));
    }
    s.push_str(if m.passed { "PASS" } else { "FAIL" });
    s
}

fn main() -> ExitCode {
    // Usage errors exit with 1, keeping 2 for failed checks.
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let config = ExperimentConfig {
        experiment: args.experiment,
        out: args.out,
        seed: args.seed,
        k: args.k,
        n_dim: args.n_dim,
        samples: args.samples,
        theta: args.theta,
        item: args.item,
    };
    match run(&config) {
        Ok((manifest, _)) => {
            if args.json {
                match serde_json::to_string(&manifest) {
                    Ok(j) => println!("{j}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
            } else {
                println!("{}", summary(&manifest));
            }
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
