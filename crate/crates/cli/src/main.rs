//! `fr`: config-driven experiments for source-term recovery from
//! time-space samples of linear dynamical systems.
//!
//! Exit codes: 0 success, 2 config error, 3 recoverability condition fails,
//! 4 numerical failure. Errors go to stderr as JSON.

mod commands;
mod config;
mod error;

use clap::{Parser, Subcommand};
use commands::Rendered;
use error::CliError;
use fr_core::io::to_json_string;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "fr", version, about = "Source-term recovery experiments for linear dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config entry by dotted path, e.g. `recovery.eps=1e-8`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print JSON instead of a key/value listing.
    #[arg(long, global = true)]
    json: bool,

    /// Run recovery even when the recoverability verdict is negative.
    #[arg(long, global = true)]
    force: bool,

    /// Run the command once per config, each on its own thread.
    #[arg(long, global = true, num_args = 1.., value_name = "PATH", conflicts_with = "config")]
    sweep: Vec<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Simulate the system and write trajectory and data-matrix CSVs.
    Simulate,
    /// Frame bounds and recoverability verdicts.
    Analyze,
    /// Recover the source term with the configured method.
    Recover,
    /// Run a named construction and its checks.
    Scenario,
    /// Norms of the data matrix and the strong-convergence test.
    Norms,
}

fn execute(cli: &Cli, path: Option<&Path>) -> Result<Rendered, CliError> {
    let cfg = config::load(path, &cli.set)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Analyze => commands::analyze(&cfg),
        Command::Recover => commands::recover(&cfg, cli.force),
        Command::Scenario => commands::scenario(&cfg),
        Command::Norms => commands::norms(&cfg),
    }
}

fn render_json(v: &Value) -> String {
    to_json_string(v).expect("JSON values serialize")
}

fn human(v: &Value) -> String {
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            map.iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k:width$}  {s}"),
                    other => format!("{k:width$}  {}", render_json(other)),
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
        other => render_json(other),
    }
}

fn print_rendered(r: Rendered, as_json: bool) {
    match r {
        Rendered::Csv(text) => print!("{text}"),
        Rendered::Json(v) if as_json => println!("{}", render_json(&v)),
        Rendered::Json(v) => println!("{}", human(&v)),
    }
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("{}", to_json_string(e).unwrap_or_else(|_| format!("{{\"message\":{:?}}}", e.message)));
    e.exit_code
}

fn sweep(cli: &Cli) -> i32 {
    let results: Vec<(i32, Value)> = std::thread::scope(|scope| {
        let handles: Vec<_> = cli
            .sweep
            .iter()
            .map(|path| {
                scope.spawn(move || {
                    let name = path.display().to_string();
                    match execute(cli, Some(path)) {
                        Ok(Rendered::Json(v)) => (0, json!({ "config": name, "exit_code": 0, "result": v })),
                        Ok(Rendered::Csv(text)) => (0, json!({ "config": name, "exit_code": 0, "csv": text })),
                        Err(e) => (e.exit_code, json!({ "config": name, "exit_code": e.exit_code, "error": e })),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let code = results.iter().map(|(c, _)| *c).max().unwrap_or(0);
    let values: Vec<Value> = results.into_iter().map(|(_, v)| v).collect();
    println!("{}", render_json(&Value::Array(values)));
    code
}

fn main() {
    let cli = Cli::parse();
    let code = if cli.sweep.is_empty() {
        match execute(&cli, cli.config.as_deref()) {
            Ok(r) => {
                print_rendered(r, cli.json);
                0
            }
            Err(e) => report_error(&e),
        }
    } else {
        sweep(&cli)
    };
    std::process::exit(code);
}
