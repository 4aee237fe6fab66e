//! Independent plan validity checker: structural link/ordering checks plus
//! forward execution of every linearization. Shares nothing with the
//! refinement search except the plan representation itself.

use super::{Literal, Plan, StepId, START};
use crate::term::Term;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidityError {
    #[error("open condition remains: {step} needs {literal}")]
    OpenCondition { step: String, literal: String },
    #[error("ordering is cyclic at {0}")]
    CyclicOrdering(String),
    #[error("link {producer} -{protected}-> {consumer} not honored: {reason}")]
    BadLink { producer: String, protected: String, consumer: String, reason: String },
    #[error("unresolved threat: {step} clobbers {protected}")]
    UnresolvedThreat { step: String, protected: String },
    #[error("linearization {order:?} fails: {reason}")]
    BadLinearization { order: Vec<String>, reason: String },
    #[error("plan too large to enumerate: {steps} steps")]
    TooLarge { steps: usize },
}

const MAX_ENUMERATED_STEPS: usize = 8;

/// Validates a finished plan: empty agenda, acyclic ordering, honored
/// links, no unresolved threats, and—decisively—every linearization
/// executed forward from `initial` satisfies all `goals`.
pub fn validate(plan: &Plan, initial: &[Term], goals: &[Literal]) -> Result<(), ValidityError> {
    if let Some((step, lit)) = plan.agenda().first() {
        return Err(ValidityError::OpenCondition {
            step: plan.step_instance(*step).to_string(),
            literal: lit.to_string(),
        });
    }
    for step in plan.steps() {
        if plan.precedes(step.id, step.id) {
            return Err(ValidityError::CyclicOrdering(plan.step_instance(step.id).to_string()));
        }
    }
    for link in plan.links() {
        if link.producer != START && !plan.precedes(link.producer, link.consumer) {
            return Err(bad_link(plan, link, "producer not ordered before consumer"));
        }
        let produced = produces(plan, link.producer, &link.protected, initial);
        if !produced {
            return Err(bad_link(plan, link, "producer lacks the protected effect"));
        }
    }
    if let Some(threat) = super::threats(plan).first() {
        let link = &plan.links()[threat.link_index];
        return Err(ValidityError::UnresolvedThreat {
            step: plan.step_instance(threat.step).to_string(),
            protected: link.protected.to_string(),
        });
    }

    let real: Vec<StepId> = plan.real_steps().map(|s| s.id).collect();
    if real.len() > MAX_ENUMERATED_STEPS {
        return Err(ValidityError::TooLarge { steps: real.len() });
    }
    let mut order = Vec::new();
    let mut used = vec![false; real.len()];
    enumerate(plan, &real, &mut used, &mut order, initial, goals)
}

fn bad_link(plan: &Plan, link: &super::CausalLink, reason: &str) -> ValidityError {
    ValidityError::BadLink {
        producer: plan.step_instance(link.producer).to_string(),
        protected: link.protected.to_string(),
        consumer: plan.step_instance(link.consumer).to_string(),
        reason: reason.to_string(),
    }
}

fn produces(plan: &Plan, producer: StepId, protected: &Literal, initial: &[Term]) -> bool {
    let step = plan.step(producer);
    let target = plan.substituted(&protected.term);
    if protected.positive {
        step.add.iter().any(|e| plan.substituted(e) == target)
    } else if producer == START {
        !initial.contains(&target)
    } else {
        step.del.iter().any(|e| plan.substituted(e) == target)
    }
}

/// Depth-first enumeration of every topological order, executing each.
fn enumerate(
    plan: &Plan,
    real: &[StepId],
    used: &mut Vec<bool>,
    order: &mut Vec<StepId>,
    initial: &[Term],
    goals: &[Literal],
) -> Result<(), ValidityError> {
    if order.len() == real.len() {
        return execute(plan, order, initial, goals);
    }
    for (i, &candidate) in real.iter().enumerate() {
        if used[i] {
            continue;
        }
        // Legal next step: nothing unused must precede it.
        let blocked = real
            .iter()
            .enumerate()
            .any(|(j, &other)| !used[j] && j != i && plan.precedes(other, candidate));
        if blocked {
            continue;
        }
        used[i] = true;
        order.push(candidate);
        enumerate(plan, real, used, order, initial, goals)?;
        order.pop();
        used[i] = false;
    }
    Ok(())
}

fn execute(
    plan: &Plan,
    order: &[StepId],
    initial: &[Term],
    goals: &[Literal],
) -> Result<(), ValidityError> {
    let names = || order.iter().map(|&s| plan.step_instance(s).to_string()).collect::<Vec<_>>();
    let mut state: BTreeSet<Term> = initial.iter().cloned().collect();
    for &id in order {
        let step = plan.step(id);
        for pre in &step.preconditions {
            let term = plan.substituted(&pre.term);
            let present = state.contains(&term);
            if pre.positive != present {
                return Err(ValidityError::BadLinearization {
                    order: names(),
                    reason: format!(
                        "{} requires {} but state {} it",
                        plan.step_instance(id),
                        pre,
                        if present { "contains" } else { "lacks" }
                    ),
                });
            }
        }
        for del in &step.del {
            state.remove(&plan.substituted(del));
        }
        for add in &step.add {
            state.insert(plan.substituted(add));
        }
    }
    for goal in goals {
        let term = plan.substituted(&goal.term);
        let present = state.contains(&term);
        if goal.positive != present {
            return Err(ValidityError::BadLinearization {
                order: names(),
                reason: format!("goal {goal} unsatisfied in final state"),
            });
        }
    }
    Ok(())
}
