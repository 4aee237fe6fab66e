//! Nested-box rendering of attitude environments: entries inside the box,
//! topic at the top left, holder at the bottom left, attitude type at the
//! bottom right. Deterministic output.

use crate::formula::AttitudeFormula;
use crate::store::{AttitudeType, BeliefStore, Entry, Viewpoint};
use crate::term::Symbol;
use std::collections::BTreeSet;

/// Output forms of a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    /// Nested box drawing.
    Ascii,
    /// The scenario-DSL dump; parsing it back rebuilds the store.
    Structured,
}

/// Renders a store in the requested format. Both forms are deterministic;
/// the structured form round-trips through the scenario parser.
pub fn render(store: &BeliefStore, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => render_ascii(store),
        RenderFormat::Structured => crate::scenario::save_store(store),
    }
}

/// Renders the whole store: the holder's belief box (always shown, even
/// when empty) followed by its goal and intention boxes when non-empty.
pub fn render_ascii(store: &BeliefStore) -> String {
    render_ascii_at(store, &Viewpoint::root())
}

/// Renders the subtree rooted at a viewpoint.
pub fn render_ascii_at(store: &BeliefStore, v: &Viewpoint) -> String {
    let holder = store.holder_at(v).clone();
    let mut out = box_for(store, v, AttitudeType::Belief, &holder);
    for space in [AttitudeType::Goal, AttitudeType::Intention] {
        if !store.entries(v, space).is_empty() || store.topic(v, space).is_some() {
            out.extend(box_for(store, v, space, &holder));
        }
    }
    let mut text = out.join("\n");
    text.push('\n');
    text
}

/// Agents with any environment directly under `v`.
fn child_agents(store: &BeliefStore, v: &Viewpoint) -> Vec<Symbol> {
    let mut out = BTreeSet::new();
    for (addr, _) in store.addresses() {
        if addr.depth() > v.depth() && addr.starts_with(v) {
            out.insert(addr.agents()[v.depth()].clone());
        }
    }
    out.into_iter().collect()
}

fn box_for(store: &BeliefStore, v: &Viewpoint, space: AttitudeType, holder: &str) -> Vec<String> {
    let mut content: Vec<String> = Vec::new();
    for entry in store.entries(v, space) {
        match entry {
            Entry::Fact(p) => content.push(p.to_string()),
            Entry::Action(t) => content.push(t.to_string()),
            Entry::Formula(f) => content.extend(formula_box(&f)),
        }
    }
    if space == AttitudeType::Belief {
        for agent in child_agents(store, v) {
            let child = v.child(agent.clone());
            content.extend(box_for(store, &child, AttitudeType::Belief, &agent));
            for leaf in [AttitudeType::Goal, AttitudeType::Intention] {
                if !store.entries(&child, leaf).is_empty() || store.topic(&child, leaf).is_some()
                {
                    content.extend(box_for(store, &child, leaf, &agent));
                }
            }
        }
    }
    frame(content, store.topic(v, space).as_deref(), holder, space.label())
}

/// Belief boxes inside goal spaces: a stored attitude formula drawn as
/// nested boxes down to its innermost proposition.
fn formula_box(formula: &AttitudeFormula) -> Vec<String> {
    match formula {
        AttitudeFormula::Fact(p) => vec![p.to_string()],
        AttitudeFormula::Att { kind, agent, body } => {
            let space: AttitudeType = (*kind).into();
            frame(formula_box(body), None, &agent.to_string(), space.label())
        }
    }
}

fn frame(content: Vec<String>, topic: Option<&str>, holder: &str, label: &str) -> Vec<String> {
    let footer = format!("{holder}  {label}");
    let mut width = footer.chars().count();
    for line in &content {
        width = width.max(line.chars().count());
    }
    if let Some(t) = topic {
        width = width.max(t.chars().count());
    }
    let pad = |s: &str| {
        let len = s.chars().count();
        format!("| {s}{} |", " ".repeat(width - len))
    };
    let mut out = Vec::new();
    out.push(format!("+{}+", "-".repeat(width + 2)));
    if let Some(t) = topic {
        out.push(pad(t));
    }
    for line in &content {
        out.push(pad(line));
    }
    // Footer: holder bottom-left, attitude type bottom-right.
    let gap = width - holder.chars().count() - label.chars().count();
    out.push(format!("| {holder}{}{label} |", " ".repeat(gap)));
    out.push(format!("+{}+", "-".repeat(width + 2)));
    out
}
