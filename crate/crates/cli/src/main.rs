mod args;
mod commands;
mod error;
mod record;

use std::process::ExitCode;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches};
use serde_json::Value;

use args::{Cli, Command};
use commands::{run, Ctx, Outcome};
use error::{CliError, CliResult};
use record::{leaf_matches, Config, RunRecord};

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, matches: &clap::ArgMatches) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = match matches.value_source("seed") {
        Some(ValueSource::CommandLine) => cli.seed,
        _ => config.seed.unwrap_or(cli.seed),
    };
    if let Some(t) = cli.threads.or(config.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Internal(e.into()))?;
    }

    if let Command::Replay(a) = &cli.command {
        return replay(&a.file);
    }

    let (name, mut params) = cli.command.leaf();
    config.merge(&name, &mut params, leaf_matches(matches))?;
    let start = Instant::now();
    let outcome = run(&name, params.clone(), &Ctx { seed, emit: true })?;
    let wall_time = start.elapsed().as_secs_f64();
    print_outcome(&outcome)?;
    if let Some(path) = &cli.record {
        let params = match params {
            Value::Object(o) => o.into_iter().collect(),
            _ => Default::default(),
        };
        let rec = RunRecord { command: name, params, seed, outputs: outcome.outputs, wall_time };
        std::fs::write(path, serde_json::to_string_pretty(&rec)? + "\n")?;
    }
    Ok(())
}

fn print_outcome(o: &Outcome) -> CliResult<()> {
    match &o.stdout {
        Some(text) => print!("{text}"),
        None => println!("{}", serde_json::to_string_pretty(&o.outputs)?),
    }
    Ok(())
}

/// Re-runs a record without writing files and compares outputs exactly.
/// Monte Carlo outputs are reproducible too: every block has its own seed.
fn replay(path: &std::path::Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let rec: RunRecord =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("bad run record: {e}")))?;
    let params = Value::Object(rec.params.into_iter().collect());
    let start = Instant::now();
    let outcome = run(&rec.command, params, &Ctx { seed: rec.seed, emit: false })?;
    let mut diffs = Vec::new();
    diff("", &rec.outputs, &outcome.outputs, &mut diffs);
    let summary = serde_json::json!({
        "command": rec.command,
        "reproduced": diffs.is_empty(),
        "differences": diffs,
        "wall_time": start.elapsed().as_secs_f64(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(CliError::Internal(anyhow::anyhow!("replay of `{}` differs at {} place(s)", rec.command, diffs.len())))
    }
}

fn diff(at: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let p = format!("{at}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => diff(&p, u, v, out),
                    _ => out.push(p),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                diff(&format!("{at}/{i}"), u, v, out);
            }
        }
        _ if a == b => {}
        _ => out.push(if at.is_empty() { "/".into() } else { at.into() }),
    }
}
