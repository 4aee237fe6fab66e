//! Bridging nested environments and flat planning states.
//!
//! Inside a viewpoint the holder's own beliefs are bare facts; everything
//! deeper is wrapped in reserved attitude functors (`believe(agent, _)`
//! for nested belief boxes, `goal`/`intend` for the leaf spaces). Act
//! schemas compile per context with the speaker pre-bound to the holder,
//! so planning stays solipsist: an agent plans its own acts.

use super::{Literal, Operator};
use crate::acts::{ActError, ActLibrary, ROLE_HEARER, ROLE_PROPOSITION, ROLE_SPEAKER};
use crate::formula::{AttitudeFormula, AttitudeKind};
use crate::store::{AttitudeType, BeliefStore, Entry, StoreError, Viewpoint};
use crate::term::{Bindings, Proposition, Symbol, Term};

pub(crate) const PERFORMED_FUNCTOR: &str = "performed";
const RESERVED_HEADS: [&str; 4] = ["believe", "goal", "intend", PERFORMED_FUNCTOR];

/// Wraps a core term in `believe(agent, _)` layers, outermost agent first.
pub(crate) fn wrap_believe<I>(agents: I, core: Term) -> Term
where
    I: IntoIterator<Item = Symbol>,
    I::IntoIter: DoubleEndedIterator,
{
    agents
        .into_iter()
        .rev()
        .fold(core, |acc, a| Term::compound("believe", vec![Term::constant(a), acc]))
}

/// Peels `believe(constant, _)` wrappers off a fact. Returns the agent
/// chain and the residual proposition, or `None` when the residue is
/// itself attitude-shaped (those never ascribe as plain beliefs).
pub fn unwrap_belief_chain(term: &Term) -> Option<(Vec<Symbol>, Proposition)> {
    let mut chain = Vec::new();
    let mut cursor = term.clone();
    loop {
        match cursor {
            Term::Compound { ref functor, ref args }
                if functor == "believe" && args.len() == 2 =>
            {
                let Term::Constant(agent) = &args[0] else {
                    return None;
                };
                chain.push(agent.clone());
                let next = args[1].clone();
                cursor = next;
            }
            _ => break,
        }
    }
    let prop = Proposition::from_term(cursor);
    if let Term::Compound { functor, .. } = prop.body() {
        if RESERVED_HEADS.contains(&functor.as_str()) {
            return None;
        }
    }
    Some((chain, prop))
}

/// The flat fact state visible at `v`: every entry in the subtree rooted
/// there, holder-relative.
pub fn flatten_viewpoint(store: &BeliefStore, v: &Viewpoint) -> Result<Vec<Term>, StoreError> {
    if !v.is_belief_chain() {
        return Err(StoreError::InvalidViewpoint {
            viewpoint: v.clone(),
            reason: "planning contexts are belief chains".into(),
        });
    }
    let holder = store.holder_at(v).clone();
    let mut facts = Vec::new();
    for (addr, space) in store.addresses() {
        if !addr.starts_with(v) {
            continue;
        }
        let rest: Vec<Symbol> = addr.agents()[v.depth()..].to_vec();
        for entry in store.entries(&addr, space) {
            facts.push(flatten_entry(&holder, &rest, space, &entry));
        }
    }
    facts.sort();
    facts.dedup();
    Ok(facts)
}

fn flatten_entry(holder: &Symbol, rest: &[Symbol], space: AttitudeType, entry: &Entry) -> Term {
    match space {
        AttitudeType::Belief => {
            let core = match entry {
                Entry::Fact(p) => p.to_term(),
                Entry::Formula(f) => f.to_term(),
                Entry::Action(t) => t.clone(),
            };
            wrap_believe(rest.iter().cloned(), core)
        }
        AttitudeType::Goal | AttitudeType::Intention => {
            let owner = rest.last().cloned().unwrap_or_else(|| holder.clone());
            let body = match entry {
                Entry::Fact(p) => p.to_term(),
                Entry::Formula(f) => f.to_term(),
                Entry::Action(t) => t.clone(),
            };
            let functor = match space {
                AttitudeType::Goal => "goal",
                _ => "intend",
            };
            let core = Term::compound(functor, vec![Term::constant(owner), body]);
            let outer = rest.len().saturating_sub(1);
            wrap_believe(rest[..outer].iter().cloned(), core)
        }
    }
}

/// Strips `believe(holder, _)` wrappers from a goal or condition term:
/// within the holder's own context its beliefs are bare facts.
pub(crate) fn holder_relative(holder: &str, term: &Term) -> Term {
    let mut cursor = term.clone();
    loop {
        match &cursor {
            Term::Compound { functor, args }
                if functor == "believe"
                    && args.len() == 2
                    && args[0] == Term::Constant(holder.to_string()) =>
            {
                cursor = args[1].clone();
            }
            _ => return cursor,
        }
    }
}

/// Compiles a resolved condition formula into a flat literal relative to
/// the acting holder.
fn condition_literal(holder: &str, formula: &AttitudeFormula) -> Literal {
    match formula {
        AttitudeFormula::Fact(p) => Literal::pos(p.to_term()),
        AttitudeFormula::Att { kind: AttitudeKind::Believe, agent, body }
            if *agent == Term::Constant(holder.to_string()) =>
        {
            condition_literal(holder, body)
        }
        other => Literal::pos(other.to_term()),
    }
}

/// Owner-normalized formula: top-level believes by the holder collapse.
fn normalize_formula(holder: &str, formula: &AttitudeFormula) -> AttitudeFormula {
    match formula {
        AttitudeFormula::Att { kind: AttitudeKind::Believe, agent, body }
            if *agent == Term::Constant(holder.to_string()) =>
        {
            normalize_formula(holder, body)
        }
        other => other.clone(),
    }
}

/// Compiles an act schema into a planning operator for one speaker.
///
/// Preconditions are the act's resolved conditions, holder-relative.
/// Effects are `performed(act(speaker, Hearer, Proposition))` plus the
/// conventional uptake derived from the speaker's goal-typed conditions:
/// every `goal(speaker, F)` whose body `F` is an attitude of some other
/// agent becomes an effect. Goal bodies about the world itself stay out —
/// wanting something true is no license to plan the act as making it true.
pub fn compile_act(lib: &ActLibrary, name: &str, speaker: &str) -> Result<Operator, ActError> {
    let resolved = lib.resolve_preconditions(name)?;
    let speaker_const = Term::constant(speaker);
    let bindings = Bindings::from_pairs([(ROLE_SPEAKER, speaker_const.clone())])
        .expect("binding one role cannot fail");
    let hearer = Term::variable(ROLE_HEARER);
    let prop = Term::variable(ROLE_PROPOSITION);

    let mut preconditions = Vec::new();
    let mut add = vec![Term::compound(
        PERFORMED_FUNCTOR,
        vec![Term::compound(
            name,
            vec![speaker_const.clone(), hearer.clone(), prop.clone()],
        )],
    )];
    for cond in &resolved {
        let bound = cond.instantiate(&bindings);
        preconditions.push(condition_literal(speaker, &bound));
        if let AttitudeFormula::Att { kind: AttitudeKind::Goal, agent, body } =
            normalize_formula(speaker, &bound)
        {
            let uptake = match body.as_ref() {
                AttitudeFormula::Att { agent: inner, .. } => *inner != speaker_const,
                AttitudeFormula::Fact(_) => false,
            };
            if agent == speaker_const && uptake {
                add.push(body.to_term());
            }
        }
    }
    Ok(Operator {
        name: name.to_string(),
        params: vec![speaker_const.clone(), hearer.clone(), prop],
        preconditions,
        add,
        del: vec![],
        neq: vec![(speaker_const, hearer)],
        mental: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::TriState;

    fn prop(s: &str) -> Proposition {
        Proposition::parse(s).unwrap()
    }

    fn term(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    #[test]
    fn flatten_wraps_by_depth() {
        let root = Viewpoint::root();
        let john = Viewpoint::beliefs(["john"]);
        let john_mary = Viewpoint::beliefs(["john", "mary"]);
        let store = BeliefStore::new("system")
            .assert_attitude(&root, AttitudeType::Belief, &prop("round(world)"))
            .unwrap()
            .assert_attitude(&john, AttitudeType::Belief, &prop("flat(earth)"))
            .unwrap()
            .assert_attitude(&john, AttitudeType::Goal, &prop("rich(john)"))
            .unwrap()
            .assert_attitude(&john, AttitudeType::Intention, &prop("buy(john,car)"))
            .unwrap()
            .assert_attitude(&john_mary, AttitudeType::Belief, &prop("not(flat(earth))"))
            .unwrap();

        let at_root = flatten_viewpoint(&store, &root).unwrap();
        assert_eq!(
            at_root,
            vec![
                term("believe(john,believe(mary,not(flat(earth))))"),
                term("believe(john,flat(earth))"),
                term("goal(john,rich(john))"),
                term("intend(john,buy(john,car))"),
                term("round(world)"),
            ]
        );

        let at_john = flatten_viewpoint(&store, &john).unwrap();
        assert_eq!(
            at_john,
            vec![
                term("believe(mary,not(flat(earth)))"),
                term("flat(earth)"),
                term("goal(john,rich(john))"),
                term("intend(john,buy(john,car))"),
            ]
        );
    }

    #[test]
    fn unwrap_belief_chain_peels_constant_agents() {
        let (chain, p) = unwrap_belief_chain(&term("believe(john,believe(mary,round(world)))"))
            .unwrap();
        assert_eq!(chain, vec!["john".to_string(), "mary".to_string()]);
        assert_eq!(p, prop("round(world)"));

        let (chain, p) = unwrap_belief_chain(&term("not(flat(earth))")).unwrap();
        assert!(chain.is_empty());
        assert_eq!(p, prop("not(flat(earth))"));

        // Attitude-shaped residues are not ascribable facts.
        assert!(unwrap_belief_chain(&term("goal(john,rich(john))")).is_none());
        assert!(unwrap_belief_chain(&term("believe(X,round(world))")).is_none());
        assert!(unwrap_belief_chain(&term("believe(john,goal(mary,p(x)))")).is_none());
        assert!(unwrap_belief_chain(&term("performed(inform(a,b,p(x)))")).is_none());
    }

    #[test]
    fn compiled_inform_matches_the_schema() {
        let lib = ActLibrary::standard();
        let op = compile_act(lib, "inform", "speaker").unwrap();
        assert_eq!(
            op.preconditions,
            vec![
                Literal::pos(term("Proposition")),
                Literal::pos(term("goal(speaker,believe(Hearer,Proposition))")),
            ]
        );
        assert_eq!(
            op.add,
            vec![
                term("performed(inform(speaker,Hearer,Proposition))"),
                term("believe(Hearer,Proposition)"),
            ]
        );
        assert_eq!(op.neq, vec![(term("speaker"), Term::variable("Hearer"))]);
        op.validate().unwrap();
    }

    #[test]
    fn holder_relative_strips_only_the_holder() {
        assert_eq!(holder_relative("john", &term("believe(john,p(x))")), term("p(x)"));
        assert_eq!(
            holder_relative("john", &term("believe(mary,believe(john,p(x)))")),
            term("believe(mary,believe(john,p(x)))")
        );
        assert_eq!(
            holder_relative("john", &term("believe(john,believe(john,p(x)))")),
            term("p(x)")
        );
    }

    #[test]
    fn flatten_round_trips_through_holds() {
        // Everything flatten reports at the root can be unwrapped and found
        // by direct lookup.
        let john = Viewpoint::beliefs(["john"]);
        let store = BeliefStore::new("system")
            .assert_attitude(&john, AttitudeType::Belief, &prop("round(world)"))
            .unwrap();
        let facts = flatten_viewpoint(&store, &Viewpoint::root()).unwrap();
        for fact in facts {
            let (chain, p) = unwrap_belief_chain(&fact).unwrap();
            assert_eq!(
                store.holds(&Viewpoint::beliefs(chain), AttitudeType::Belief, &p),
                TriState::Holds
            );
        }
    }
}
