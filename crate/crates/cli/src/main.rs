use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, Subcommand};
use gnfield_cli::{exit, run, validate, Experiment, RunError, ScenarioConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gnfield", version, about = "Run reduced-dynamics experiments from JSON scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV table and metadata.
    Run {
        config: PathBuf,
        /// Directory for the output (keeps the file name of `output_path`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the scenario.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a scenario and print it with defaults filled in.
    Validate { config: PathBuf },
    /// List the available experiments and their parameters.
    ListExperiments,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(exit::USAGE);
        }
    };
    // A seed given on the command line also satisfies the schema.
    let text = match seed {
        Some(s) => match serde_json::from_str::<serde_json::Value>(&text) {
            Ok(serde_json::Value::Object(mut m)) => {
                m.insert("seed".into(), json!(s));
                serde_json::Value::Object(m).to_string()
            }
            _ => text,
        },
        None => text,
    };
    validate(&text).map_err(|errors| {
        for e in errors {
            eprintln!("error: {e}");
        }
        exit::USAGE
    })
}

fn output_path(config: &ScenarioConfig, out: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(&config.output_path);
    match out {
        Some(dir) => dir.join(p.file_name().unwrap_or(p.as_os_str())),
        None => p,
    }
}

fn cmd_run(path: &Path, out: Option<&Path>, seed: Option<u64>) -> anyhow::Result<i32> {
    let config = match load(path, seed) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    let start = Instant::now();
    let table = match run(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(match e {
                RunError::Usage(_) => exit::USAGE,
                RunError::Resource(_) => exit::RESOURCE,
            });
        }
    };
    let runtime = start.elapsed().as_secs_f64();
    let failing = table.failing_rows();
    let metadata = json!({
        "config": config.echo(),
        "seed": config.seed,
        "code_version": env!("CARGO_PKG_VERSION"),
        "runtime_seconds": runtime,
        "finished_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "columns": table.columns(),
        "rows": table.rows().len(),
        "failing_rows": failing,
        "notes": table.notes,
    });
    let csv = output_path(&config, out);
    let meta = table.write(&csv, &metadata).with_context(|| format!("writing {}", csv.display()))?;
    println!("{}: {} rows -> {} ({})", config.experiment.name(), table.rows().len(), csv.display(), meta.display());
    if failing.is_empty() {
        println!("PASS");
        Ok(exit::PASS)
    } else {
        for i in &failing {
            println!("FAIL row {i}");
        }
        Ok(exit::TOLERANCE)
    }
}

fn cmd_validate(path: &Path) -> anyhow::Result<i32> {
    Ok(match load(path, None) {
        Ok(c) => {
            println!("{}", serde_json::to_string_pretty(&c.echo())?);
            exit::PASS
        }
        Err(code) => code,
    })
}

fn cmd_list() -> i32 {
    for e in Experiment::ALL {
        let seed = if e.needs_seed() { " (seed required)" } else { "" };
        println!("{}{seed}\n    {}", e.name(), e.summary());
        for p in e.params() {
            println!("    {:<16} {:<40} default {}", p.name, p.help, (p.default)());
        }
    }
    exit::PASS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, seed } => cmd_run(&config, out.as_deref(), seed),
        Command::Validate { config } => cmd_validate(&config),
        Command::ListExperiments => Ok(cmd_list()),
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::RESOURCE as u8)
        }
    }
}
