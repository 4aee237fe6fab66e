//! Batch execution of scenario commands against one store per declared
//! agent plus the system store, with a deterministic trace of everything
//! that happened.

use super::parse::{
    parse_library, parse_scenario, Path, PerformSide, ScenarioCommand, ShowFormat,
};
use crate::ascription::{
    accept_belief, ascribe_on_demand, default_ascribe, stereotype_ascribe, AscriptionOutcome,
    ChainedAscription,
};
use crate::acts::{check_felicity, hearer_update, speaker_update, ActLibrary, Felicity};
use crate::plan::{recognize, simulate, Limits, Operator, Plan};
use crate::render::render_ascii_at;
use crate::store::{AttitudeType, BeliefStore, Viewpoint};
use crate::term::Symbol;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// Exit statuses of a scenario run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECT_FAILED: i32 = 1;
pub const EXIT_FATAL: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub max_depth: usize,
    pub limits: Limits,
    pub format: ShowFormat,
    /// Directory library paths resolve against (the scenario file's home).
    pub base_dir: Option<PathBuf>,
    /// Libraries loaded before the scenario runs.
    pub preload_libraries: Vec<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            max_depth: crate::store::DEFAULT_MAX_DEPTH,
            limits: Limits::default(),
            format: ShowFormat::Ascii,
            base_dir: None,
            preload_libraries: Vec::new(),
        }
    }
}

/// One recorded event. Everything is pre-rendered to strings so traces are
/// stable, diffable and schema-versioned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Command {
        index: usize,
        text: String,
    },
    Ascription {
        store: Symbol,
        kind: String,
        source: String,
        target: String,
        prop: String,
        outcome: String,
        evidence: Option<String>,
    },
    OnDemandStatus {
        store: Symbol,
        viewpoint: String,
        prop: String,
        status: String,
    },
    FelicityWarning {
        store: Symbol,
        act: String,
        missing: Vec<String>,
    },
    UpdateCondition {
        store: Symbol,
        side: String,
        act: String,
        condition: String,
        written: String,
        outcome: String,
        evidence: Option<String>,
    },
    IntentionDropped {
        store: Symbol,
        act: String,
    },
    PlannerSummary {
        store: Symbol,
        task: String,
        viewpoint: String,
        outcome: String,
        steps: Vec<String>,
        nodes_expanded: u64,
        ascribed_goals: Vec<String>,
    },
    ExpectVerdict {
        store: Symbol,
        viewpoint: String,
        space: String,
        formula: String,
        expected: String,
        actual: String,
        pass: bool,
    },
    Render {
        store: Symbol,
        text: String,
    },
    LibraryLoaded {
        file: String,
        acts: usize,
        operators: usize,
    },
    CommandError {
        index: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub schema_version: u32,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub stores: BTreeMap<Symbol, BeliefStore>,
    pub trace: Trace,
    pub exit: i32,
}

struct Runner {
    stores: BTreeMap<Symbol, BeliefStore>,
    acts: ActLibrary,
    operators: Vec<Operator>,
    config: RunConfig,
    events: Vec<TraceEvent>,
    expect_failures: usize,
    command_errors: usize,
    limit_hit: bool,
    max_depth: usize,
}

/// Parses and runs a scenario in one call.
pub fn run_text(text: &str, config: &RunConfig) -> Result<RunOutcome, super::ParseError> {
    let commands = parse_scenario(text)?;
    Ok(run(&commands, config))
}

/// Executes commands in order. `Expect` failures and per-command errors are
/// recorded and execution continues; only library loading failures are
/// fatal.
pub fn run(commands: &[ScenarioCommand], config: &RunConfig) -> RunOutcome {
    let mut runner = Runner {
        stores: BTreeMap::new(),
        acts: ActLibrary::standard().clone(),
        operators: Vec::new(),
        config: config.clone(),
        events: Vec::new(),
        expect_failures: 0,
        command_errors: 0,
        limit_hit: false,
        max_depth: config.max_depth,
    };
    runner
        .stores
        .insert("system".into(), BeliefStore::with_max_depth("system", config.max_depth));

    for file in config.preload_libraries.clone() {
        if let Err(message) = runner.load_library(&file.display().to_string()) {
            runner.events.push(TraceEvent::CommandError { index: 0, message });
            return runner.finish(EXIT_FATAL);
        }
    }

    for (index, command) in commands.iter().enumerate() {
        runner.events.push(TraceEvent::Command { index, text: describe(command) });
        match runner.execute(command) {
            Ok(()) => {}
            Err(CommandFailure::Recorded(message)) => {
                runner.command_errors += 1;
                runner.events.push(TraceEvent::CommandError { index, message });
            }
            Err(CommandFailure::Fatal(message)) => {
                runner.events.push(TraceEvent::CommandError { index, message });
                return runner.finish(EXIT_FATAL);
            }
        }
    }
    let exit = if runner.expect_failures > 0 || runner.command_errors > 0 {
        EXIT_EXPECT_FAILED
    } else if runner.limit_hit {
        EXIT_LIMIT
    } else {
        EXIT_OK
    };
    runner.finish(exit)
}

enum CommandFailure {
    Recorded(String),
    Fatal(String),
}

fn recorded(e: impl std::fmt::Display) -> CommandFailure {
    CommandFailure::Recorded(e.to_string())
}

fn describe(command: &ScenarioCommand) -> String {
    command.to_string()
}

impl Runner {
    fn finish(self, exit: i32) -> RunOutcome {
        RunOutcome {
            stores: self.stores,
            trace: Trace { schema_version: TRACE_SCHEMA_VERSION, events: self.events },
            exit,
        }
    }

    fn store(&self, owner: &str) -> Result<&BeliefStore, CommandFailure> {
        self.stores.get(owner).ok_or_else(|| {
            CommandFailure::Recorded(format!(
                "unknown store '{owner}': declare the agent first"
            ))
        })
    }

    fn put(&mut self, owner: &str, store: BeliefStore) {
        self.stores.insert(owner.to_string(), store);
    }

    fn viewpoint(path: &Path) -> Viewpoint {
        Viewpoint::beliefs(path.hops.iter().cloned())
    }

    fn push_ascriptions(
        &mut self,
        store: &str,
        kind: &str,
        items: impl IntoIterator<Item = (String, String, String, AscriptionOutcome)>,
    ) {
        for (source, target, prop, outcome) in items {
            self.events.push(TraceEvent::Ascription {
                store: store.to_string(),
                kind: kind.to_string(),
                source,
                target,
                prop,
                outcome: outcome_word(&outcome),
                evidence: outcome.blocking_evidence.as_ref().map(|p| p.to_string()),
            });
        }
    }

    fn push_chained(&mut self, store: &str, kind: &str, hops: &[ChainedAscription]) {
        let items: Vec<_> = hops
            .iter()
            .map(|h| {
                (
                    h.source_holder.clone(),
                    h.target_agent.clone(),
                    h.prop.to_string(),
                    h.outcome.clone(),
                )
            })
            .collect();
        self.push_ascriptions(store, kind, items);
    }

    fn load_library(&mut self, file: &str) -> Result<(), String> {
        let mut path = PathBuf::from(file);
        if path.is_relative() {
            if let Some(base) = &self.config.base_dir {
                path = base.join(path);
            }
        }
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("cannot read library {}: {e}", path.display()))?;
        let parsed =
            parse_library(&text).map_err(|e| format!("library {}: {e}", path.display()))?;
        let mut acts = 0;
        for schema in parsed.acts.iter() {
            self.acts.define(schema.clone()).map_err(|e| e.to_string())?;
            acts += 1;
        }
        let operators = parsed.operators.len();
        for op in parsed.operators {
            self.operators.retain(|o| o.name != op.name);
            self.operators.push(op);
        }
        self.operators.sort_by(|a, b| a.name.cmp(&b.name));
        self.events.push(TraceEvent::LibraryLoaded { file: file.to_string(), acts, operators });
        Ok(())
    }

    fn execute(&mut self, command: &ScenarioCommand) -> Result<(), CommandFailure> {
        match command {
            ScenarioCommand::DeclareAgent { name } => {
                self.stores
                    .entry(name.clone())
                    .or_insert_with(|| BeliefStore::with_max_depth(name.clone(), self.max_depth));
                Ok(())
            }
            ScenarioCommand::Assert { path, at, formula } => {
                let store = self.store(&path.owner)?.clone();
                let (next, _) = store
                    .assert_formula(&Self::viewpoint(path), *at, formula)
                    .map_err(recorded)?;
                self.put(&path.owner, next);
                Ok(())
            }
            ScenarioCommand::Retract { path, at, formula } => {
                let store = self.store(&path.owner)?.clone();
                let next = store
                    .retract_formula(&Self::viewpoint(path), *at, formula)
                    .map_err(recorded)?;
                self.put(&path.owner, next);
                Ok(())
            }
            ScenarioCommand::Stereotype { name, members } => {
                let store = self.stores.get("system").expect("system store").clone();
                let next = store.define_stereotype(name.clone(), members.clone()).map_err(recorded)?;
                self.put("system", next);
                // Stereotype bundles are shared background knowledge: every
                // declared store carries them.
                for (owner, s) in self.stores.clone() {
                    if owner != "system" {
                        let next =
                            s.define_stereotype(name.clone(), members.clone()).map_err(recorded)?;
                        self.put(&owner, next);
                    }
                }
                Ok(())
            }
            ScenarioCommand::Trust { path, agent } => {
                let store = self.store(&path.owner)?.clone();
                let next =
                    store.mark_trustworthy(&Self::viewpoint(path), agent.clone()).map_err(recorded)?;
                self.put(&path.owner, next);
                Ok(())
            }
            ScenarioCommand::Topic { path, at, topic } => {
                let store = self.store(&path.owner)?.clone();
                let next = store
                    .set_topic(&Self::viewpoint(path), *at, Some(topic.clone()))
                    .map_err(recorded)?;
                self.put(&path.owner, next);
                Ok(())
            }
            ScenarioCommand::AscribeDefault { path, target, prop } => {
                let store = self.store(&path.owner)?.clone();
                let (next, outcome) =
                    default_ascribe(&store, &Self::viewpoint(path), target, prop).map_err(recorded)?;
                let source = store.holder_at(&Self::viewpoint(path)).clone();
                self.put(&path.owner, next);
                self.push_ascriptions(
                    &path.owner,
                    "default",
                    [(source, target.clone(), prop.to_string(), outcome)],
                );
                Ok(())
            }
            ScenarioCommand::AscribeStereotypes { path, target } => {
                let store = self.store(&path.owner)?.clone();
                let (next, outcomes) =
                    stereotype_ascribe(&store, &Self::viewpoint(path), target).map_err(recorded)?;
                let source = store.holder_at(&Self::viewpoint(path)).clone();
                self.put(&path.owner, next);
                let items: Vec<_> = outcomes
                    .into_iter()
                    .map(|o| {
                        (
                            format!("{source} [{}]", o.stereotype),
                            target.clone(),
                            o.prop.to_string(),
                            o.outcome,
                        )
                    })
                    .collect();
                self.push_ascriptions(&path.owner, "stereotype", items);
                Ok(())
            }
            ScenarioCommand::AscribeAccept { path, source, prop } => {
                let store = self.store(&path.owner)?.clone();
                let (next, outcome) =
                    accept_belief(&store, &Self::viewpoint(path), source, prop).map_err(recorded)?;
                let acceptor = store.holder_at(&Self::viewpoint(path)).clone();
                self.put(&path.owner, next);
                self.push_ascriptions(
                    &path.owner,
                    "accept",
                    [(source.clone(), acceptor, prop.to_string(), outcome)],
                );
                Ok(())
            }
            ScenarioCommand::AscribeOnDemand { path, prop } => {
                let store = self.store(&path.owner)?.clone();
                let v = Self::viewpoint(path);
                let (next, status, hops) =
                    ascribe_on_demand(&store, &v, AttitudeType::Belief, prop).map_err(recorded)?;
                self.put(&path.owner, next);
                self.push_chained(&path.owner, "on-demand", &hops);
                self.events.push(TraceEvent::OnDemandStatus {
                    store: path.owner.clone(),
                    viewpoint: v.to_string(),
                    prop: prop.to_string(),
                    status: status.to_string(),
                });
                Ok(())
            }
            ScenarioCommand::Perform { side, act } => {
                if matches!(side, PerformSide::Speaker | PerformSide::Both) {
                    let store = self.store(&act.speaker)?.clone();
                    match check_felicity(&store, &self.acts, act).map_err(recorded)? {
                        Felicity::Felicitous => {}
                        Felicity::Missing(missing) => {
                            self.events.push(TraceEvent::FelicityWarning {
                                store: act.speaker.clone(),
                                act: act.to_string(),
                                missing: missing.iter().map(|m| m.to_string()).collect(),
                            });
                        }
                    }
                    let (next, report) =
                        speaker_update(&store, &self.acts, act).map_err(recorded)?;
                    self.put(&act.speaker, next);
                    for w in &report.writes {
                        self.events.push(TraceEvent::UpdateCondition {
                            store: act.speaker.clone(),
                            side: "speaker".into(),
                            act: act.to_string(),
                            condition: w.condition.to_string(),
                            written: w.written.to_string(),
                            outcome: outcome_word(&w.outcome),
                            evidence: w
                                .outcome
                                .blocking_evidence
                                .as_ref()
                                .map(|p| p.to_string()),
                        });
                    }
                    if let Some(dropped) = &report.intention_dropped {
                        self.events.push(TraceEvent::IntentionDropped {
                            store: act.speaker.clone(),
                            act: dropped.to_string(),
                        });
                    }
                }
                if matches!(side, PerformSide::Hearer | PerformSide::Both) {
                    let store = self.store(&act.hearer)?.clone();
                    let (next, report) = hearer_update(&store, &self.acts, act).map_err(recorded)?;
                    self.put(&act.hearer, next);
                    for w in &report.writes {
                        self.events.push(TraceEvent::UpdateCondition {
                            store: act.hearer.clone(),
                            side: "hearer".into(),
                            act: act.to_string(),
                            condition: w.condition.to_string(),
                            written: w.written.to_string(),
                            outcome: outcome_word(&w.outcome),
                            evidence: w
                                .outcome
                                .blocking_evidence
                                .as_ref()
                                .map(|p| p.to_string()),
                        });
                    }
                }
                Ok(())
            }
            ScenarioCommand::Simulate { path, goals } => {
                let store = self.store(&path.owner)?.clone();
                let v = Self::viewpoint(path);
                match simulate(&store, &self.acts, &self.operators, &v, goals, &self.config.limits)
                {
                    Ok(outcome) => {
                        self.put(&path.owner, outcome.store);
                        self.push_chained(&path.owner, "on-demand", &outcome.ascriptions);
                        self.events.push(TraceEvent::PlannerSummary {
                            store: path.owner.clone(),
                            task: "simulate".into(),
                            viewpoint: v.to_string(),
                            outcome: match &outcome.plan {
                                Some(_) => "found".into(),
                                None if outcome.exhausted => "none-within-limits".into(),
                                None => "none".into(),
                            },
                            steps: plan_steps(outcome.plan.as_ref()),
                            nodes_expanded: outcome.stats.nodes_expanded,
                            ascribed_goals: Vec::new(),
                        });
                        Ok(())
                    }
                    Err(crate::plan::PlanError::LimitExceeded { explored, frontier }) => {
                        self.limit_hit = true;
                        self.events.push(TraceEvent::PlannerSummary {
                            store: path.owner.clone(),
                            task: "simulate".into(),
                            viewpoint: v.to_string(),
                            outcome: format!(
                                "limit-exceeded ({explored} nodes, frontier {frontier})"
                            ),
                            steps: Vec::new(),
                            nodes_expanded: explored,
                            ascribed_goals: Vec::new(),
                        });
                        Ok(())
                    }
                    Err(e) => Err(recorded(e)),
                }
            }
            ScenarioCommand::Recognize { path, observed } => {
                let store = self.store(&path.owner)?.clone();
                let v = Self::viewpoint(path);
                let (next, result) = recognize(
                    &store,
                    &self.acts,
                    &self.operators,
                    &v,
                    observed,
                    &self.config.limits,
                )
                .map_err(recorded)?;
                self.put(&path.owner, next);
                self.events.push(TraceEvent::PlannerSummary {
                    store: path.owner.clone(),
                    task: "recognize".into(),
                    viewpoint: v.to_string(),
                    outcome: if result.is_some() { "found".into() } else { "none".into() },
                    steps: plan_steps(result.as_ref().map(|r| &r.plan)),
                    nodes_expanded: 0,
                    ascribed_goals: result
                        .as_ref()
                        .map(|r| r.ascribed_goals.iter().map(|g| g.to_string()).collect())
                        .unwrap_or_default(),
                });
                Ok(())
            }
            ScenarioCommand::Show { path, format } => {
                let format = format.unwrap_or(self.config.format);
                let selected: Vec<Symbol> = match path {
                    Some(p) => vec![p.owner.clone()],
                    None => self.stores.keys().cloned().collect(),
                };
                for owner in selected {
                    let store = self.store(&owner)?;
                    let v = match path {
                        Some(p) => Self::viewpoint(p),
                        None => Viewpoint::root(),
                    };
                    let text = match format {
                        ShowFormat::Ascii => render_ascii_at(store, &v),
                        ShowFormat::Json => {
                            serde_json::to_string_pretty(store).expect("store serializes")
                        }
                    };
                    self.events.push(TraceEvent::Render { store: owner, text });
                }
                Ok(())
            }
            ScenarioCommand::Expect { path, at, formula, expected } => {
                let store = self.store(&path.owner)?;
                let actual = store.query_formula(&Self::viewpoint(path), *at, formula);
                let pass = actual == *expected;
                if !pass {
                    self.expect_failures += 1;
                }
                self.events.push(TraceEvent::ExpectVerdict {
                    store: path.owner.clone(),
                    viewpoint: Self::viewpoint(path).to_string(),
                    space: at.label().to_string(),
                    formula: formula.to_string(),
                    expected: expected.to_string(),
                    actual: actual.to_string(),
                    pass,
                });
                Ok(())
            }
            ScenarioCommand::LoadLibrary { file } => {
                self.load_library(file).map_err(CommandFailure::Fatal)
            }
            ScenarioCommand::SetMaxDepth { depth } => {
                self.max_depth = *depth;
                for (owner, store) in self.stores.clone() {
                    self.put(&owner, store.with_depth_limit(*depth));
                }
                Ok(())
            }
        }
    }
}

fn outcome_word(outcome: &AscriptionOutcome) -> String {
    use crate::ascription::AscriptionResult::*;
    match outcome.result {
        Ascribed => "ascribed".into(),
        Blocked => "blocked".into(),
        AlreadyHeld => "already-held".into(),
    }
}

fn plan_steps(plan: Option<&Plan>) -> Vec<String> {
    match plan {
        None => Vec::new(),
        Some(p) => {
            let mut out = Vec::new();
            for id in p.canonical_linearization() {
                let step = p.step(id);
                if step.is_start() || step.is_finish() {
                    continue;
                }
                let tag = if step.mental { " (mental)" } else { "" };
                out.push(format!("{}{tag}", p.step_instance(id)));
            }
            out
        }
    }
}
