//! Scenario surface behavior: parser totality, exit statuses, trace
//! content, and end-to-end figure scenarios through the runner.

use beliefbox::scenario::{
    parse_scenario, run, run_text, RunConfig, TraceEvent, EXIT_EXPECT_FAILED, EXIT_OK,
};
use beliefbox::store::{AttitudeType, TriState, Viewpoint};
use beliefbox::term::Proposition;
use proptest::prelude::*;

fn prop(s: &str) -> Proposition {
    Proposition::parse(s).unwrap()
}

#[test]
fn the_shared_belief_scenario_runs_green() {
    let text = "\
agent john
believe system: round(world)
ascribe default system to john: round(world)
expect system > john believe round(world) is holds
expect system believe round(world) is holds
";
    let outcome = run_text(text, &RunConfig::default()).unwrap();
    assert_eq!(outcome.exit, EXIT_OK);
    let store = &outcome.stores["system"];
    assert_eq!(
        store.holds(&Viewpoint::beliefs(["john"]), AttitudeType::Belief, &prop("round(world)")),
        TriState::Holds
    );
}

#[test]
fn failing_expectation_sets_exit_one_and_continues() {
    let text = "\
agent john
believe system: round(world)
expect system > john believe round(world) is holds
believe system: sky(blue)
expect system believe sky(blue) is holds
";
    let outcome = run_text(text, &RunConfig::default()).unwrap();
    assert_eq!(outcome.exit, EXIT_EXPECT_FAILED);
    // Execution continued past the failure: the later assert happened and
    // its expectation passed.
    let verdicts: Vec<bool> = outcome
        .trace
        .events
        .iter()
        .filter_map(|e| match e {
            TraceEvent::ExpectVerdict { pass, .. } => Some(*pass),
            _ => None,
        })
        .collect();
    assert_eq!(verdicts, vec![false, true]);
}

#[test]
fn command_errors_are_recorded_not_fatal() {
    let text = "\
believe nowhere: p(x)
believe system: p(x)
expect system believe p(x) is holds
";
    let outcome = run_text(text, &RunConfig::default()).unwrap();
    assert_eq!(outcome.exit, EXIT_EXPECT_FAILED);
    assert!(outcome
        .trace
        .events
        .iter()
        .any(|e| matches!(e, TraceEvent::CommandError { .. })));
    // The later commands still ran.
    assert!(outcome
        .trace
        .events
        .iter()
        .any(|e| matches!(e, TraceEvent::ExpectVerdict { pass: true, .. })));
}

#[test]
fn blocked_ascription_reports_its_evidence_in_the_trace() {
    let text = "\
agent john
believe system: round(world)
believe system > john: not(round(world))
ascribe default system to john: round(world)
expect system > john believe round(world) is contrary
";
    let outcome = run_text(text, &RunConfig::default()).unwrap();
    assert_eq!(outcome.exit, EXIT_OK);
    let blocked: Vec<_> = outcome
        .trace
        .events
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Ascription { outcome, evidence, .. } if outcome == "blocked" => {
                Some(evidence.clone())
            }
            _ => None,
        })
        .collect();
    assert_eq!(blocked, vec![Some("not(round(world))".to_string())]);
}

#[test]
fn infelicitous_performance_warns_and_proceeds() {
    let text = "\
agent speaker
agent hearer
perform speaker inform(speaker,hearer,on(coffee,stove))
expect speaker > hearer > speaker believe on(coffee,stove) is holds
";
    let outcome = run_text(text, &RunConfig::default()).unwrap();
    assert_eq!(outcome.exit, EXIT_OK, "warned but proceeded");
    assert!(outcome
        .trace
        .events
        .iter()
        .any(|e| matches!(e, TraceEvent::FelicityWarning { .. })));
}

#[test]
fn missing_library_file_is_fatal() {
    let text = "library does-not-exist.acts\nagent john\n";
    let outcome = run_text(text, &RunConfig::default()).unwrap();
    assert_eq!(outcome.exit, beliefbox::scenario::EXIT_FATAL);
}

#[test]
fn show_renders_into_the_trace() {
    let text = "\
agent john
believe system: round(world)
show system ascii
show system json
";
    let outcome = run_text(text, &RunConfig::default()).unwrap();
    let renders: Vec<&String> = outcome
        .trace
        .events
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Render { text, .. } => Some(text),
            _ => None,
        })
        .collect();
    assert_eq!(renders.len(), 2);
    assert!(renders[0].contains("| round(world)"));
    assert!(renders[1].trim_start().starts_with('{'));
}

#[test]
fn trace_json_carries_its_schema_version() {
    let outcome = run_text("agent john\n", &RunConfig::default()).unwrap();
    let json = outcome.trace.to_json_pretty();
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert!(parsed["events"].is_array());
}

#[test]
fn max_depth_command_is_honored() {
    let text = "\
max-depth 2
agent a
believe system > a > a2: p(x)
";
    // Path depths beyond the limit error per command.
    let config = RunConfig { max_depth: 5, ..RunConfig::default() };
    let outcome = run_text(
        "max-depth 1\nagent a\nbelieve system > a > b: p(x)\n",
        &config,
    )
    .unwrap();
    assert_eq!(outcome.exit, EXIT_EXPECT_FAILED);
    assert!(outcome
        .trace
        .events
        .iter()
        .any(|e| matches!(e, TraceEvent::CommandError { message, .. } if message.contains("depth"))));
    let _ = text;
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    /// Parser totality: arbitrary input never panics; it parses or yields a
    /// located error.
    #[test]
    fn parser_never_panics(text in "\\PC*") {
        match parse_scenario(&text) {
            Ok(_) => {}
            Err(e) => {
                prop_assert!(e.line >= 1);
                prop_assert!(e.column >= 1);
                prop_assert!(!e.expected.is_empty());
            }
        }
    }

    /// Structured fragments with braces and separators also never panic.
    #[test]
    fn parser_survives_structured_noise(
        head in prop::sample::select(vec![
            "believe", "goal", "expect", "simulate", "stereotype", "ascribe", "perform",
        ]),
        noise in "[a-zA-Z(){};:>, ]{0,60}",
    ) {
        let _ = parse_scenario(&format!("{head} {noise}"));
    }
}

#[test]
fn operator_libraries_drive_simulation_through_the_dsl() {
    let dir = tempfile::tempdir().unwrap();
    let lib_path = dir.path().join("blocks.ops");
    std::fs::write(
        &lib_path,
        "operator pickup(X) pre { clear(X); handempty } add { holding(X) } del { handempty; clear(X) }\n\
         operator puton(X,Y) pre { holding(X); clear(Y) } add { on(X,Y); handempty } del { holding(X); clear(Y) }\n",
    )
    .unwrap();
    let text = format!(
        "library {}\n\
         agent john\n\
         believe system > john: clear(a)\n\
         believe system > john: clear(b)\n\
         believe system > john: handempty\n\
         simulate system > john achieving {{ on(a,b) }}\n\
         expect system > john intend pickup(a) is holds\n\
         expect system > john intend puton(a,b) is holds\n\
         expect system > john goal on(a,b) is holds\n",
        lib_path.display()
    );
    let outcome = run_text(&text, &RunConfig::default()).unwrap();
    assert_eq!(outcome.exit, EXIT_OK, "trace: {}", outcome.trace.to_json_pretty());
    let summary = outcome
        .trace
        .events
        .iter()
        .find_map(|e| match e {
            TraceEvent::PlannerSummary { task, steps, outcome, .. } if task == "simulate" => {
                Some((steps.clone(), outcome.clone()))
            }
            _ => None,
        })
        .expect("planner summary traced");
    assert_eq!(summary.1, "found");
    assert_eq!(summary.0, vec!["pickup(a)".to_string(), "puton(a,b)".to_string()]);
}

#[test]
fn exhausted_node_budget_exits_three() {
    let config = RunConfig {
        limits: beliefbox::plan::Limits { max_steps: 8, max_nodes: 2 },
        ..RunConfig::default()
    };
    let text = "\
agent john
believe system: round(world)
simulate system > john achieving { round(world) }
";
    let outcome = run_text(text, &config).unwrap();
    assert_eq!(outcome.exit, beliefbox::scenario::EXIT_LIMIT);
    assert!(outcome.trace.events.iter().any(|e| matches!(
        e,
        TraceEvent::PlannerSummary { outcome, .. } if outcome.starts_with("limit-exceeded")
    )));
}

#[test]
fn run_is_a_pure_function_of_commands() {
    let text = "\
agent speaker
agent hearer
believe speaker: on(coffee,stove)
goal speaker: believe(hearer,on(coffee,stove))
intend speaker: inform(speaker,hearer,on(coffee,stove))
perform both inform(speaker,hearer,on(coffee,stove))
trust hearer: speaker
ascribe accept hearer from speaker: on(coffee,stove)
show
expect hearer believe on(coffee,stove) is holds
";
    let commands = parse_scenario(text).unwrap();
    let config = RunConfig::default();
    let a = run(&commands, &config);
    let b = run(&commands, &config);
    assert_eq!(a.trace.to_json_pretty(), b.trace.to_json_pretty());
    assert_eq!(a.stores, b.stores);
    assert_eq!(a.exit, EXIT_OK);
}
