//! The scenario surface: DSL parsing, batch running with traces, and store
//! persistence.

mod parse;
mod persist;
mod run;

pub use parse::{
    parse_library, parse_scenario, ParseError, ParsedLibrary, Path, PerformSide,
    ScenarioCommand, ShowFormat,
};
pub use persist::{load_store, render_structured, save_store, store_commands, PersistError};
pub use run::{
    run, run_text, RunConfig, RunOutcome, Trace, TraceEvent, EXIT_EXPECT_FAILED, EXIT_FATAL,
    EXIT_LIMIT, EXIT_OK, TRACE_SCHEMA_VERSION,
};
