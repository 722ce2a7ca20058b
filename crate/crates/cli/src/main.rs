use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use pisaa::config::{load_experiment, ExperimentSpec};
use pisaa::experiment::{
    compute_oracle, load_manifest, resume_checkpoint, run_experiment, summarize_directory, validate_experiment,
};

/// Population stochastic approximation annealing experiments.
#[derive(Parser)]
#[command(name = "pisaa", version)]
struct Cli {
    /// Root under which experiments without an explicit output directory
    /// are written.
    #[arg(long, global = true, env = "PISAA_OUTPUT_ROOT", default_value = "pisaa-runs")]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML file or a previous manifest.
    Run {
        config: PathBuf,
        /// Output directory (overrides the file and the output root).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replicates to run at once; 0 uses every core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a configuration and print it with defaults filled in.
    Validate { config: PathBuf },
    /// Compute oracle bias weights and store them as JSON.
    Oracle {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print terminal best-energy statistics of a finished run directory.
    Summarize { dir: PathBuf },
    /// Finish a checkpointed replicate.
    Resume {
        checkpoint: PathBuf,
        /// Run directory receiving the trace; inferred from the checkpoint
        /// location when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        Ok(load_manifest(path).with_context(|| format!("reading manifest {}", path.display()))?.spec)
    } else {
        Ok(load_experiment(path).with_context(|| format!("reading {}", path.display()))?)
    }
}

fn output_dir(spec: &ExperimentSpec, out: Option<PathBuf>, root: &Path) -> PathBuf {
    out.or_else(|| spec.output.clone()).unwrap_or_else(|| root.join(&spec.name))
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run { config, out, threads } => {
            let mut spec = load_spec(&config)?;
            if let Some(t) = threads {
                spec.replicate_threads = t;
            }
            let dir = output_dir(&spec, out, &cli.output_root);
            let report = run_experiment(&spec, &dir)?;
            let total = report.manifest.runs.len();
            println!(
                "{}: {} of {} replicates finished, outputs in {}",
                spec.name,
                total - report.failed_replicates,
                total,
                dir.display()
            );
            for r in report.manifest.runs.iter().filter(|r| r.status != "ok") {
                eprintln!(
                    "replicate kappa={} beta={} #{} failed: {}",
                    r.kappa,
                    r.beta,
                    r.replicate,
                    r.error.as_deref().unwrap_or("unknown error")
                );
            }
            Ok(report.exit_code() as u8)
        }
        Command::Validate { config } => {
            let spec = load_spec(&config)?;
            validate_experiment(&spec)?;
            println!("{}", serde_json::to_string_pretty(&spec)?);
            Ok(0)
        }
        Command::Oracle { config, out } => {
            let spec = load_spec(&config)?;
            let oracle = compute_oracle(&spec)?;
            let path = out.unwrap_or_else(|| output_dir(&spec, None, &cli.output_root).join("oracle.json"));
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, serde_json::to_vec_pretty(&oracle)?)?;
            println!("j,nonempty,w");
            for (j, (w, ne)) in oracle.w.iter().zip(&oracle.nonempty).enumerate() {
                println!("{j},{ne},{w}");
            }
            eprintln!("oracle written to {}", path.display());
            Ok(0)
        }
        Command::Summarize { dir } => {
            println!("cell,replicates,mean,std_err,min,max");
            for (cell, s) in summarize_directory(&dir)? {
                let se = s.std_err.map_or(String::new(), |v| v.to_string());
                println!("{cell},{},{},{se},{},{}", s.n, s.mean, s.min, s.max);
            }
            Ok(0)
        }
        Command::Resume { checkpoint, out } => {
            let dir = match out {
                Some(d) => d,
                None => checkpoint
                    .parent()
                    .and_then(Path::parent)
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| PathBuf::from(".")),
            };
            let trace = resume_checkpoint(&checkpoint, &dir)?;
            println!("trace written to {}", trace.display());
            Ok(0)
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use pisaa::Error;
    match err.downcast_ref::<Error>() {
        Some(
            Error::Config(_)
            | Error::InvalidPartition(_)
            | Error::InvalidSchedule(_)
            | Error::InvalidOperator(_)
            | Error::InvalidProblem(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
