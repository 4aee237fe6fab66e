//! Store persistence: the scenario DSL is the single structured format. A
//! saved store is the command list that rebuilds it.

use super::parse::{parse_scenario, Path, ScenarioCommand};
use crate::formula::AttitudeFormula;
use crate::store::{BeliefStore, Entry, StoreError, DEFAULT_MAX_DEPTH};
use crate::term::Proposition;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PersistError {
    #[error(transparent)]
    Parse(#[from] super::parse::ParseError),
    #[error("store dump must start with an 'agent <owner>' line")]
    MissingOwner,
    #[error("command not allowed in a store dump: {0}")]
    ForeignCommand(String),
    #[error("path {0} does not address this store")]
    WrongOwner(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// The command sequence reconstructing a store, in deterministic order.
pub fn store_commands(store: &BeliefStore) -> Vec<ScenarioCommand> {
    let owner = store.owner().clone();
    let mut out = vec![ScenarioCommand::DeclareAgent { name: owner.clone() }];
    if store.max_depth() != DEFAULT_MAX_DEPTH {
        out.push(ScenarioCommand::SetMaxDepth { depth: store.max_depth() });
    }
    for (name, members) in store.stereotypes() {
        out.push(ScenarioCommand::Stereotype { name: name.clone(), members: members.clone() });
    }
    for (viewpoint, space) in store.addresses() {
        let path = Path { owner: owner.clone(), hops: viewpoint.agents() };
        if let Some(topic) = store.topic(&viewpoint, space) {
            out.push(ScenarioCommand::Topic { path: path.clone(), at: space, topic });
        }
        for entry in store.entries(&viewpoint, space) {
            let formula = match entry {
                Entry::Fact(p) => AttitudeFormula::Fact(p),
                Entry::Formula(g) => g,
                Entry::Action(t) => AttitudeFormula::Fact(Proposition::positive(t)),
            };
            out.push(ScenarioCommand::Assert { path: path.clone(), at: space, formula });
        }
    }
    out
}

/// Serializes a store as scenario text. `load_store` inverts this exactly.
pub fn save_store(store: &BeliefStore) -> String {
    let mut text = String::new();
    for command in store_commands(store) {
        text.push_str(&command.to_string());
        text.push('\n');
    }
    text
}

/// Alias making the render-format naming explicit: the structured render of
/// a store is its scenario-DSL dump.
pub fn render_structured(store: &BeliefStore) -> String {
    save_store(store)
}

/// Rebuilds a store from scenario text produced by [`save_store`] (or
/// handwritten text limited to store-building commands).
pub fn load_store(text: &str) -> Result<BeliefStore, PersistError> {
    let commands = parse_scenario(text)?;
    let mut iter = commands.into_iter();
    let owner = match iter.next() {
        Some(ScenarioCommand::DeclareAgent { name }) => name,
        _ => return Err(PersistError::MissingOwner),
    };
    let mut store = BeliefStore::new(owner.clone());
    for command in iter {
        match command {
            ScenarioCommand::SetMaxDepth { depth } => {
                store = store.with_depth_limit(depth);
            }
            ScenarioCommand::Stereotype { name, members } => {
                store = store.define_stereotype(name, members)?;
            }
            ScenarioCommand::Topic { path, at, topic } => {
                let v = owned_viewpoint(&owner, &path)?;
                store = store.set_topic(&v, at, Some(topic))?;
            }
            ScenarioCommand::Assert { path, at, formula } => {
                let v = owned_viewpoint(&owner, &path)?;
                let (next, _) = store.assert_formula(&v, at, &formula)?;
                store = next;
            }
            ScenarioCommand::Trust { path, agent } => {
                let v = owned_viewpoint(&owner, &path)?;
                store = store.mark_trustworthy(&v, agent)?;
            }
            other => return Err(PersistError::ForeignCommand(other.to_string())),
        }
    }
    Ok(store)
}

fn owned_viewpoint(
    owner: &str,
    path: &Path,
) -> Result<crate::store::Viewpoint, PersistError> {
    if path.owner != owner {
        return Err(PersistError::WrongOwner(path.to_string()));
    }
    Ok(crate::store::Viewpoint::beliefs(path.hops.iter().cloned()))
}
