//! Attitude propagation between nesting levels: default ascription,
//! stereotypical ascription, belief acceptance, and the on-demand ascent
//! used during planning.
//!
//! "Contrary evidence" throughout means the explicit negation of the
//! proposition stored at exactly the target environment; there is no
//! entailment engine looking for indirect contradictions.

use crate::store::{
    AttitudeType, BeliefStore, Entry, LeafWrite, StoreError, TriState, Viewpoint,
};
use crate::term::{negate, Proposition, Symbol, Term};
use serde::{Deserialize, Serialize};
use std::fmt;

/// What happened to one candidate ascription.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AscriptionResult {
    Ascribed,
    Blocked,
    AlreadyHeld,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AscriptionOutcome {
    pub result: AscriptionResult,
    /// The contrary proposition found, when blocked.
    pub blocking_evidence: Option<Proposition>,
}

impl AscriptionOutcome {
    fn ascribed() -> AscriptionOutcome {
        AscriptionOutcome { result: AscriptionResult::Ascribed, blocking_evidence: None }
    }

    fn already_held() -> AscriptionOutcome {
        AscriptionOutcome { result: AscriptionResult::AlreadyHeld, blocking_evidence: None }
    }

    fn blocked(evidence: Proposition) -> AscriptionOutcome {
        AscriptionOutcome {
            result: AscriptionResult::Blocked,
            blocking_evidence: Some(evidence),
        }
    }
}

impl fmt::Display for AscriptionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.result, &self.blocking_evidence) {
            (AscriptionResult::Blocked, Some(e)) => write!(f, "blocked by {e}"),
            (AscriptionResult::Blocked, None) => write!(f, "blocked"),
            (AscriptionResult::Ascribed, _) => write!(f, "ascribed"),
            (AscriptionResult::AlreadyHeld, _) => write!(f, "already held"),
        }
    }
}

/// Names the failed precondition of an ascription operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailedPrecondition {
    /// default ascription: the proposition is not believed at the source.
    SourceBelief,
    /// accept: no belief that the source agent believes the proposition.
    NestedBelief,
    /// accept: a contrary belief is already held.
    ContraryHeld,
    /// accept: the source agent is not marked trustworthy.
    Trust,
    /// default ascription: the target is the holder of the source level.
    SelfAscription,
    /// on-demand: only beliefs are default-ascribed.
    BeliefOnly,
}

impl fmt::Display for FailedPrecondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailedPrecondition::SourceBelief => "proposition not believed at source",
            FailedPrecondition::NestedBelief => "no belief that the source agent believes it",
            FailedPrecondition::ContraryHeld => "a contrary belief is held",
            FailedPrecondition::Trust => "source agent not trustworthy",
            FailedPrecondition::SelfAscription => "cannot ascribe to the holding agent itself",
            FailedPrecondition::BeliefOnly => "only beliefs can be default-ascribed",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AscriptionError {
    #[error("precondition failed: {0}")]
    Precondition(FailedPrecondition),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Low-level guarded insert shared by every ascription path: blocked by
/// contrary evidence at exactly the target, held entries reported as such.
pub(crate) fn ascribe_entry(
    store: &BeliefStore,
    v: &Viewpoint,
    at: AttitudeType,
    entry: &Entry,
) -> Result<(BeliefStore, AscriptionOutcome), StoreError> {
    if let Entry::Fact(p) = entry {
        match store.holds(v, at, p) {
            TriState::Contrary => {
                return Ok((store.clone(), AscriptionOutcome::blocked(negate(p))))
            }
            TriState::Holds => return Ok((store.clone(), AscriptionOutcome::already_held())),
            TriState::Unknown => {}
        }
    } else if store.entries(v, at).contains(entry) {
        return Ok((store.clone(), AscriptionOutcome::already_held()));
    }
    let next = store.assert_entry(v, at, entry.clone())?;
    Ok((next, AscriptionOutcome::ascribed()))
}

/// Ascribes a formula with per-leaf blocking, returning the resolved leaf
/// target and its outcome.
pub(crate) fn ascribe_formula(
    store: &BeliefStore,
    v: &Viewpoint,
    at: AttitudeType,
    formula: &crate::formula::AttitudeFormula,
) -> Result<(BeliefStore, LeafWrite, AscriptionOutcome), StoreError> {
    let target = store.resolve_formula(v, at, formula)?;
    let (next, outcome) = ascribe_entry(store, &target.viewpoint, target.space, &target.entry)?;
    Ok((next, target, outcome))
}

/// Default ascription: push a belief held at `source` one level deeper
/// to `target_agent`, unless contrary evidence blocks it.
pub fn default_ascribe(
    store: &BeliefStore,
    source: &Viewpoint,
    target_agent: &str,
    p: &Proposition,
) -> Result<(BeliefStore, AscriptionOutcome), AscriptionError> {
    if store.holder_at(source) == target_agent {
        return Err(AscriptionError::Precondition(FailedPrecondition::SelfAscription));
    }
    if store.holds(source, AttitudeType::Belief, p) != TriState::Holds {
        return Err(AscriptionError::Precondition(FailedPrecondition::SourceBelief));
    }
    let target = source.child(target_agent);
    let (next, outcome) = ascribe_entry(store, &target, AttitudeType::Belief, &Entry::Fact(p.clone()))?;
    Ok((next, outcome))
}

/// One stereotype member together with its ascription outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StereotypeAscription {
    pub stereotype: Symbol,
    pub space: AttitudeType,
    pub prop: Proposition,
    pub outcome: AscriptionOutcome,
}

/// Stereotypical ascription: for every stereotype `st` with
/// `isa(target_agent, st)` believed at `source`, ascribe each member
/// attitude to the target under the per-item contrary-evidence test.
/// An agent fitting no stereotype yields an empty outcome list.
pub fn stereotype_ascribe(
    store: &BeliefStore,
    source: &Viewpoint,
    target_agent: &str,
) -> Result<(BeliefStore, Vec<StereotypeAscription>), AscriptionError> {
    let mut current = store.clone();
    let mut outcomes = Vec::new();
    let target = source.child(target_agent);
    let names: Vec<Symbol> = store.stereotypes().keys().cloned().collect();
    for name in names {
        let isa = Proposition::positive(Term::compound(
            "isa",
            vec![Term::constant(target_agent), Term::constant(name.clone())],
        ));
        if store.holds(source, AttitudeType::Belief, &isa) != TriState::Holds {
            continue;
        }
        let members = store.stereotypes().get(&name).cloned().unwrap_or_default();
        for member in members {
            let (next, outcome) =
                ascribe_entry(&current, &target, member.space, &Entry::Fact(member.prop.clone()))?;
            current = next;
            outcomes.push(StereotypeAscription {
                stereotype: name.clone(),
                space: member.space,
                prop: member.prop,
                outcome,
            });
        }
    }
    Ok((current, outcomes))
}

/// Belief acceptance: the holder at `acceptor` adopts a proposition it
/// attributes to `source_agent`, provided it holds no contrary belief and
/// marks the source trustworthy. Fails naming the first unmet precondition,
/// in operator order.
pub fn accept_belief(
    store: &BeliefStore,
    acceptor: &Viewpoint,
    source_agent: &str,
    p: &Proposition,
) -> Result<(BeliefStore, AscriptionOutcome), AscriptionError> {
    let attributed = acceptor.child(source_agent);
    if store.holds(&attributed, AttitudeType::Belief, p) != TriState::Holds {
        return Err(AscriptionError::Precondition(FailedPrecondition::NestedBelief));
    }
    if store.holds(acceptor, AttitudeType::Belief, p) == TriState::Contrary {
        return Err(AscriptionError::Precondition(FailedPrecondition::ContraryHeld));
    }
    if !store.trusts(acceptor, source_agent) {
        return Err(AscriptionError::Precondition(FailedPrecondition::Trust));
    }
    let (next, outcome) =
        ascribe_entry(store, acceptor, AttitudeType::Belief, &Entry::Fact(p.clone()))?;
    Ok((next, outcome))
}

/// One hop of a chained on-demand ascent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainedAscription {
    /// Holder of the level the belief was pushed from.
    pub source_holder: Symbol,
    /// Agent the belief was pushed to.
    pub target_agent: Symbol,
    pub prop: Proposition,
    pub outcome: AscriptionOutcome,
}

/// On-demand ascription: when a belief query at `v` comes back unknown,
/// walk outward toward the root; from the nearest ancestor where the
/// proposition holds, chain default ascriptions down every intervening hop.
/// Contrary evidence anywhere along the chain blocks the descent there;
/// levels above the block keep their new entries.
pub fn ascribe_on_demand(
    store: &BeliefStore,
    v: &Viewpoint,
    at: AttitudeType,
    p: &Proposition,
) -> Result<(BeliefStore, TriState, Vec<ChainedAscription>), AscriptionError> {
    if at != AttitudeType::Belief {
        return Err(AscriptionError::Precondition(FailedPrecondition::BeliefOnly));
    }
    if !v.is_belief_chain() {
        return Err(StoreError::InvalidViewpoint {
            viewpoint: v.clone(),
            reason: "on-demand ascription runs along belief chains".into(),
        }
        .into());
    }
    if v.depth() > store.max_depth() {
        return Err(StoreError::Depth { depth: v.depth(), max: store.max_depth() }.into());
    }
    let status = store.holds(v, AttitudeType::Belief, p);
    if status != TriState::Unknown {
        return Ok((store.clone(), status, Vec::new()));
    }
    // Nearest ancestor where the proposition holds outright.
    let mut found = None;
    for k in (0..v.depth()).rev() {
        if store.holds(&v.prefix(k), AttitudeType::Belief, p) == TriState::Holds {
            found = Some(k);
            break;
        }
    }
    let Some(start_depth) = found else {
        return Ok((store.clone(), TriState::Unknown, Vec::new()));
    };
    let mut current = store.clone();
    let mut performed = Vec::new();
    for j in start_depth..v.depth() {
        let source = v.prefix(j);
        let target_agent = v.hops()[j].agent.clone();
        let source_holder = current.holder_at(&source).clone();
        let (next, outcome) = default_ascribe(&current, &source, &target_agent, p)?;
        current = next;
        let blocked = outcome.result == AscriptionResult::Blocked;
        performed.push(ChainedAscription {
            source_holder,
            target_agent,
            prop: p.clone(),
            outcome,
        });
        if blocked {
            return Ok((current, TriState::Unknown, performed));
        }
    }
    Ok((current, TriState::Holds, performed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::StereotypeMember;

    fn prop(s: &str) -> Proposition {
        Proposition::parse(s).unwrap()
    }

    fn root() -> Viewpoint {
        Viewpoint::root()
    }

    fn system_believes(p: &str) -> BeliefStore {
        BeliefStore::new("system")
            .assert_attitude(&root(), AttitudeType::Belief, &prop(p))
            .unwrap()
    }

    #[test]
    fn default_ascription_pushes_to_inner_environment() {
        // Fig. 2: the system assumes John shares its round-world belief.
        let s = system_believes("round(world)");
        let (s, outcome) = default_ascribe(&s, &root(), "john", &prop("round(world)")).unwrap();
        assert_eq!(outcome.result, AscriptionResult::Ascribed);
        assert_eq!(
            s.holds(&Viewpoint::beliefs(["john"]), AttitudeType::Belief, &prop("round(world)")),
            TriState::Holds
        );
    }

    #[test]
    fn contrary_evidence_blocks() {
        // The agent already believed to think the world is flat blocks the
        // ascription and nothing changes.
        let s = system_believes("round(world)")
            .assert_attitude(
                &Viewpoint::beliefs(["john"]),
                AttitudeType::Belief,
                &prop("not(round(world))"),
            )
            .unwrap();
        let (after, outcome) = default_ascribe(&s, &root(), "john", &prop("round(world)")).unwrap();
        assert_eq!(outcome.result, AscriptionResult::Blocked);
        assert_eq!(outcome.blocking_evidence, Some(prop("not(round(world))")));
        assert_eq!(after, s);
    }

    #[test]
    fn repeat_ascription_is_already_held() {
        let s = system_believes("round(world)");
        let (s1, _) = default_ascribe(&s, &root(), "john", &prop("round(world)")).unwrap();
        let (s2, outcome) = default_ascribe(&s1, &root(), "john", &prop("round(world)")).unwrap();
        assert_eq!(outcome.result, AscriptionResult::AlreadyHeld);
        assert_eq!(s1, s2);
    }

    #[test]
    fn unheld_source_belief_is_a_precondition_error() {
        let s = BeliefStore::new("system");
        let err = default_ascribe(&s, &root(), "john", &prop("round(world)")).unwrap_err();
        assert_eq!(
            err,
            AscriptionError::Precondition(FailedPrecondition::SourceBelief)
        );
    }

    #[test]
    fn self_ascription_rejected() {
        let s = system_believes("round(world)");
        let err = default_ascribe(&s, &root(), "system", &prop("round(world)")).unwrap_err();
        assert_eq!(
            err,
            AscriptionError::Precondition(FailedPrecondition::SelfAscription)
        );
    }

    fn doctor_store() -> BeliefStore {
        // Fig. 3 setup: a doctor stereotype plus isa(john, doctor).
        BeliefStore::new("system")
            .define_stereotype(
                "doctor",
                vec![
                    StereotypeMember {
                        space: AttitudeType::Belief,
                        prop: prop("isa(pneumonia,bacteria)"),
                    },
                    StereotypeMember {
                        space: AttitudeType::Belief,
                        prop: prop("treatment(bacteria,anti-biotics)"),
                    },
                ],
            )
            .unwrap()
            .assert_attitude(&root(), AttitudeType::Belief, &prop("isa(john,doctor)"))
            .unwrap()
    }

    #[test]
    fn stereotype_ascribes_all_members() {
        let s = doctor_store();
        let (s, outcomes) = stereotype_ascribe(&s, &root(), "john").unwrap();
        assert_eq!(outcomes.len(), 2);
        assert!(outcomes.iter().all(|o| o.outcome.result == AscriptionResult::Ascribed));
        let john = Viewpoint::beliefs(["john"]);
        assert_eq!(
            s.holds(&john, AttitudeType::Belief, &prop("isa(pneumonia,bacteria)")),
            TriState::Holds
        );
        assert_eq!(
            s.holds(&john, AttitudeType::Belief, &prop("treatment(bacteria,anti-biotics)")),
            TriState::Holds
        );
    }

    #[test]
    fn stereotype_blocking_is_per_item() {
        let s = doctor_store()
            .assert_attitude(
                &Viewpoint::beliefs(["john"]),
                AttitudeType::Belief,
                &prop("not(isa(pneumonia,bacteria))"),
            )
            .unwrap();
        let (_, outcomes) = stereotype_ascribe(&s, &root(), "john").unwrap();
        assert_eq!(outcomes[0].outcome.result, AscriptionResult::Blocked);
        assert_eq!(outcomes[1].outcome.result, AscriptionResult::Ascribed);
    }

    #[test]
    fn no_matching_stereotype_is_empty() {
        let s = BeliefStore::new("system");
        let (after, outcomes) = stereotype_ascribe(&s, &root(), "john").unwrap();
        assert!(outcomes.is_empty());
        assert_eq!(after, s);
    }

    fn accept_fixture(nested: bool, contrary: bool, trusted: bool) -> BeliefStore {
        let mut s = BeliefStore::new("hearer");
        if nested {
            s = s
                .assert_attitude(
                    &Viewpoint::beliefs(["speaker"]),
                    AttitudeType::Belief,
                    &prop("on(coffee,stove)"),
                )
                .unwrap();
        }
        if contrary {
            s = s
                .assert_attitude(&root(), AttitudeType::Belief, &prop("not(on(coffee,stove))"))
                .unwrap();
        }
        if trusted {
            s = s.mark_trustworthy(&root(), "speaker").unwrap();
        }
        s
    }

    #[test]
    fn accept_belief_requires_all_three_preconditions() {
        for nested in [false, true] {
            for contrary in [false, true] {
                for trusted in [false, true] {
                    let s = accept_fixture(nested, contrary, trusted);
                    let r = accept_belief(&s, &root(), "speaker", &prop("on(coffee,stove)"));
                    if nested && !contrary && trusted {
                        let (s, outcome) = r.unwrap();
                        assert_eq!(outcome.result, AscriptionResult::Ascribed);
                        assert_eq!(
                            s.holds(&root(), AttitudeType::Belief, &prop("on(coffee,stove)")),
                            TriState::Holds
                        );
                    } else {
                        let expected = if !nested {
                            FailedPrecondition::NestedBelief
                        } else if contrary {
                            FailedPrecondition::ContraryHeld
                        } else {
                            FailedPrecondition::Trust
                        };
                        assert_eq!(r.unwrap_err(), AscriptionError::Precondition(expected));
                    }
                }
            }
        }
    }

    #[test]
    fn on_demand_chains_from_the_root() {
        let s = system_believes("round(world)");
        let v = Viewpoint::beliefs(["john"]);
        let (s, status, hops) =
            ascribe_on_demand(&s, &v, AttitudeType::Belief, &prop("round(world)")).unwrap();
        assert_eq!(status, TriState::Holds);
        assert_eq!(hops.len(), 1);
        assert_eq!(hops[0].source_holder, "system");
        assert_eq!(hops[0].target_agent, "john");
        assert_eq!(s.holds(&v, AttitudeType::Belief, &prop("round(world)")), TriState::Holds);
    }

    #[test]
    fn on_demand_unknown_everywhere_is_a_no_op() {
        let s = BeliefStore::new("system");
        let v = Viewpoint::beliefs(["john", "mary"]);
        let (after, status, hops) =
            ascribe_on_demand(&s, &v, AttitudeType::Belief, &prop("p(x)")).unwrap();
        assert_eq!(status, TriState::Unknown);
        assert!(hops.is_empty());
        assert_eq!(after, s);
    }

    #[test]
    fn on_demand_blocks_at_contrary_level_keeping_upper_ascriptions() {
        // Contrary evidence two levels down: the first hop lands, the
        // second blocks, deeper levels stay untouched.
        let s = system_believes("p(x)")
            .assert_attitude(
                &Viewpoint::beliefs(["a", "b"]),
                AttitudeType::Belief,
                &prop("not(p(x))"),
            )
            .unwrap();
        let v = Viewpoint::beliefs(["a", "b", "c"]);
        let (after, status, hops) =
            ascribe_on_demand(&s, &v, AttitudeType::Belief, &prop("p(x)")).unwrap();
        assert_eq!(status, TriState::Unknown);
        assert_eq!(hops.len(), 2);
        assert_eq!(hops[0].outcome.result, AscriptionResult::Ascribed);
        assert_eq!(hops[1].outcome.result, AscriptionResult::Blocked);
        assert_eq!(
            after.holds(&Viewpoint::beliefs(["a"]), AttitudeType::Belief, &prop("p(x)")),
            TriState::Holds
        );
        assert_eq!(after.holds(&v, AttitudeType::Belief, &prop("p(x)")), TriState::Unknown);
        assert_eq!(
            after.holds(&Viewpoint::beliefs(["a", "b"]), AttitudeType::Belief, &prop("p(x)")),
            TriState::Contrary
        );
    }

    #[test]
    fn on_demand_rejects_goal_spaces() {
        let s = BeliefStore::new("system");
        let err = ascribe_on_demand(&s, &root(), AttitudeType::Goal, &prop("p(x)")).unwrap_err();
        assert_eq!(err, AscriptionError::Precondition(FailedPrecondition::BeliefOnly));
    }

    #[test]
    fn on_demand_depth_limit() {
        let s = BeliefStore::with_max_depth("system", 2);
        let v = Viewpoint::beliefs(["a", "b", "c"]);
        let err = ascribe_on_demand(&s, &v, AttitudeType::Belief, &prop("p(x)")).unwrap_err();
        assert!(matches!(err, AscriptionError::Store(StoreError::Depth { .. })));
    }
}
