//! Scenario runner and REPL for the nested-belief dialogue engine.
//!
//! Exit codes: 0 on success, 1 when an expectation failed (or a command
//! errored), 2 on parse/IO failures, 3 when a planner limit was exceeded.

use anyhow::Context;
use beliefbox::plan::Limits;
use beliefbox::scenario::{
    parse_scenario, run, RunConfig, RunOutcome, ShowFormat, TraceEvent, EXIT_FATAL,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "beliefbox", version, about = "Nested-belief dialogue engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Maximum belief-nesting depth.
    #[arg(long, global = true, default_value_t = 5)]
    max_depth: usize,

    /// Maximum plan size for simulation and recognition.
    #[arg(long, global = true, default_value_t = 8)]
    max_steps: usize,

    /// Node budget for every planner search.
    #[arg(long, global = true, default_value_t = 100_000)]
    max_nodes: u64,

    /// Additional act/operator library files, loaded in order.
    #[arg(long = "library", global = true)]
    libraries: Vec<PathBuf>,

    /// Default rendering format for `show`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Ascii)]
    format: Format,

    /// Write the JSON trace of the run to this file.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { file: PathBuf },
    /// Interactive line-by-line session.
    Repl,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_FATAL as u8)
        }
    }
}

fn config_from(cli: &Cli, base_dir: Option<PathBuf>) -> RunConfig {
    RunConfig {
        max_depth: cli.max_depth,
        limits: Limits { max_steps: cli.max_steps, max_nodes: cli.max_nodes },
        format: match cli.format {
            Format::Ascii => ShowFormat::Ascii,
            Format::Json => ShowFormat::Json,
        },
        base_dir,
        preload_libraries: cli.libraries.clone(),
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Run { file } => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("cannot read scenario {}", file.display()))?;
            let base_dir = file.parent().map(|p| p.to_path_buf());
            let commands = match parse_scenario(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return Ok(EXIT_FATAL as u8);
                }
            };
            let outcome = run(&commands, &config_from(cli, base_dir));
            report(&outcome);
            write_trace(cli, &outcome)?;
            Ok(outcome.exit as u8)
        }
        Command::Repl => repl(cli),
    }
}

/// Prints renders and verdicts to stdout, warnings and errors to stderr.
fn report(outcome: &RunOutcome) {
    for event in &outcome.trace.events {
        match event {
            TraceEvent::Render { store, text } => {
                println!("--- {store} ---");
                println!("{text}");
            }
            TraceEvent::ExpectVerdict { store, viewpoint, space, formula, expected, actual, pass } => {
                let mark = if *pass { "ok" } else { "FAIL" };
                println!(
                    "expect [{store}] {viewpoint} {space} {formula} is {expected}: {mark} (actual {actual})"
                );
            }
            TraceEvent::FelicityWarning { store, act, missing } => {
                eprintln!("warning [{store}]: {act} infelicitous, missing {}", missing.join(", "));
            }
            TraceEvent::CommandError { index, message } => {
                eprintln!("error at command {index}: {message}");
            }
            _ => {}
        }
    }
}

fn write_trace(cli: &Cli, outcome: &RunOutcome) -> anyhow::Result<()> {
    if let Some(path) = &cli.trace {
        std::fs::write(path, outcome.trace.to_json_pretty())
            .with_context(|| format!("cannot write trace {}", path.display()))?;
    }
    Ok(())
}

/// One DSL command per line against a live session; `quit` leaves.
///
/// The session replays all accepted commands plus the new line on every
/// input: stores are values, recomputation is cheap, and the session stays
/// a pure function of its lines. Determinism makes each run's event list a
/// strict extension of the previous one, so only the tail is reported.
fn repl(cli: &Cli) -> anyhow::Result<u8> {
    let config = config_from(cli, std::env::current_dir().ok());
    let stdin = std::io::stdin();
    let mut accumulated: Vec<beliefbox::scenario::ScenarioCommand> = Vec::new();
    let mut seen_events = run(&accumulated, &config).trace.events.len();
    let mut worst_exit = 0u8;
    let mut out = std::io::stdout();
    loop {
        print!("> ");
        out.flush().ok();
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            return Ok(worst_exit);
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "quit" || trimmed == "exit" {
            return Ok(worst_exit);
        }
        match parse_scenario(trimmed) {
            Err(e) => eprintln!("{e}"),
            Ok(commands) => {
                let mut attempt = accumulated.clone();
                attempt.extend(commands);
                let outcome = run(&attempt, &config);
                let mut failed = false;
                for event in outcome.trace.events.iter().skip(seen_events) {
                    match event {
                        TraceEvent::Command { .. } => {}
                        TraceEvent::Render { store, text } => {
                            println!("--- {store} ---\n{text}");
                        }
                        TraceEvent::ExpectVerdict { pass, formula, actual, .. } => {
                            let mark = if *pass { "ok" } else { "FAIL" };
                            println!("{mark}: {formula} (actual {actual})");
                            if !pass {
                                failed = true;
                            }
                        }
                        TraceEvent::CommandError { message, .. } => {
                            eprintln!("error: {message}");
                            failed = true;
                        }
                        TraceEvent::FelicityWarning { act, missing, .. } => {
                            eprintln!("warning: {act} infelicitous, missing {}", missing.join(", "));
                        }
                        _ => {}
                    }
                }
                if failed {
                    worst_exit = worst_exit.max(outcome.exit as u8);
                } else {
                    accumulated = attempt;
                    seen_events = outcome.trace.events.len();
                }
            }
        }
    }
}
