//! Planning inside nested viewpoints: simulating another agent's planning
//! with on-demand ascription, recognizing plans behind observed actions,
//! and ascribing finished plans back into the agent's goal and intention
//! spaces.

use super::flatten::{
    flatten_viewpoint, holder_relative, unwrap_belief_chain, wrap_believe,
};
use super::search::{search_full, AscriptionSupport, MentalStepSpec, SupportHook};
use super::{
    compile_act, Limits, Literal, Operator, Plan, PlanError, PlanSearch,
    SearchStats, StepId, DEFAULT_BELIEF_ASCRIPTION, FINISH, START,
};
use crate::ascription::{ascribe_formula, ascribe_on_demand, AscriptionError, ChainedAscription};
use crate::acts::ActLibrary;
use crate::formula::AttitudeFormula;
use crate::store::{AttitudeType, BeliefStore, Entry, StoreError, TriState, Viewpoint};
use crate::term::{Proposition, Symbol, Term};

/// Result of simulating an agent's planning inside its viewpoint.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    /// Store extended by any ascriptions the successful search performed,
    /// with the plan's actions and goals ascribed at the viewpoint.
    pub store: BeliefStore,
    pub plan: Option<Plan>,
    pub stats: SearchStats,
    /// Every default-ascription hop performed along the way, including
    /// maintenance at levels above the simulated viewpoint.
    pub ascriptions: Vec<ChainedAscription>,
    /// True when a failed search proved no plan exists within the bound.
    pub exhausted: bool,
}

/// An explained observation: the plan through the observed action, and the
/// candidate goals it achieves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognitionResult {
    pub plan: Plan,
    pub ascribed_goals: Vec<Proposition>,
    pub observed: Term,
}

struct OnDemandHook<'a> {
    viewpoint: &'a Viewpoint,
}

impl SupportHook for OnDemandHook<'_> {
    fn try_support(
        &self,
        store: &BeliefStore,
        term: &Term,
    ) -> Result<Option<AscriptionSupport>, AscriptionError> {
        let Some((chain, prop)) = unwrap_belief_chain(term) else {
            return Ok(None);
        };
        let mut target = self.viewpoint.clone();
        for agent in &chain {
            target = target.child(agent.clone());
        }
        let (new_store, status, hops) =
            ascribe_on_demand(store, &target, AttitudeType::Belief, &prop)?;
        if status != TriState::Holds || hops.is_empty() {
            // Nothing usable; a blocked or empty ascent leaves the node
            // untouched.
            return Ok(None);
        }
        let base_depth = self.viewpoint.depth();
        let agents = target.agents();
        let start_level = target.depth() - hops.len();
        let mut steps = Vec::new();
        for (i, hop) in hops.iter().enumerate() {
            let level = start_level + 1 + i;
            if level < base_depth {
                continue; // maintenance above the simulated viewpoint
            }
            let effect =
                wrap_believe(agents[base_depth..level].iter().cloned(), prop.to_term());
            let source_level = level - 1;
            let pre = if source_level >= base_depth {
                Some(wrap_believe(
                    agents[base_depth..source_level].iter().cloned(),
                    prop.to_term(),
                ))
            } else {
                None
            };
            steps.push(MentalStepSpec {
                name: DEFAULT_BELIEF_ASCRIPTION.into(),
                args: vec![
                    Term::constant(hop.source_holder.clone()),
                    Term::constant(hop.target_agent.clone()),
                    prop.to_term(),
                ],
                pre,
                effect,
            });
        }
        if steps.is_empty() {
            return Ok(None);
        }
        Ok(Some(AscriptionSupport { steps, store: new_store, trace: hops }))
    }
}

/// Sound unreachability proof for a goal fact: no plan can achieve a goal
/// that is not in the initial state, unifies with no operator effect, and
/// cannot be reached by an ascription ascent. (Chained productions are
/// covered: a produced goal's final producer must unify it directly.)
fn goal_feasible(
    store: &BeliefStore,
    v: &Viewpoint,
    initial: &[Term],
    operators: &[Operator],
    goal: &Term,
) -> bool {
    if initial.contains(goal) {
        return true;
    }
    if operators.iter().any(|op| {
        op.add
            .iter()
            .any(|e| crate::term::unify(e, goal, &crate::term::Bindings::new()).is_some())
    }) {
        return true;
    }
    if let Some((chain, prop)) = unwrap_belief_chain(goal) {
        let mut target = v.clone();
        for agent in chain {
            target = target.child(agent);
        }
        if let Ok((_, status, _)) = ascribe_on_demand(store, &target, AttitudeType::Belief, &prop)
        {
            return status == TriState::Holds;
        }
    }
    false
}

fn require_agent_context(v: &Viewpoint) -> Result<Symbol, StoreError> {
    if !v.is_belief_chain() || v.depth() == 0 {
        return Err(StoreError::InvalidViewpoint {
            viewpoint: v.clone(),
            reason: "simulation needs an agent's belief space".into(),
        });
    }
    Ok(v.innermost_agent().expect("non-root viewpoint").clone())
}

/// Operator set available inside a context: the physical operators plus
/// every act schema compiled for the acting agent, lexicographic by name.
fn context_operators(
    acts: &ActLibrary,
    operators: &[Operator],
    speaker: &str,
) -> Result<Vec<Operator>, PlanError> {
    let mut ops: Vec<Operator> = operators.to_vec();
    for name in acts.names() {
        ops.push(compile_act(acts, name, speaker)?);
    }
    for op in &ops {
        op.validate()?;
    }
    ops.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(ops)
}

/// Simulates the planning of the agent addressed by `v`: the initial state
/// is whatever is visible at that level, unknown preconditions trigger
/// on-demand ascription queries recorded as mental-act steps, and a
/// successful plan's actions and goals are ascribed back at `v`.
pub fn simulate(
    store: &BeliefStore,
    acts: &ActLibrary,
    operators: &[Operator],
    v: &Viewpoint,
    goals: &[Proposition],
    limits: &Limits,
) -> Result<SimulationOutcome, PlanError> {
    let agent = require_agent_context(v)?;
    let initial = flatten_viewpoint(store, v)?;
    let goal_lits: Vec<Literal> = goals
        .iter()
        .map(|g| Literal::pos(holder_relative(&agent, &g.to_term())))
        .collect();
    let ops = context_operators(acts, operators, &agent)?;
    if goal_lits.iter().any(|g| !goal_feasible(store, v, &initial, &ops, &g.term)) {
        return Ok(SimulationOutcome {
            store: store.clone(),
            plan: None,
            stats: SearchStats::default(),
            ascriptions: Vec::new(),
            exhausted: false,
        });
    }
    let root = Plan::root(initial, goal_lits);
    let hook = OnDemandHook { viewpoint: v };
    let (result, out_store, trace) =
        search_full(root, &ops, limits, Some(&hook), Some(store.clone()))?;
    match result.outcome {
        PlanSearch::Found(plan) => {
            let store = out_store.unwrap_or_else(|| store.clone());
            let store = ascribe_plan(&store, v, &plan)?;
            Ok(SimulationOutcome {
                store,
                plan: Some(plan),
                stats: result.stats,
                ascriptions: trace,
                exhausted: false,
            })
        }
        PlanSearch::NoPlan { complete } => Ok(SimulationOutcome {
            store: store.clone(),
            plan: None,
            stats: result.stats,
            ascriptions: Vec::new(),
            exhausted: !complete,
        }),
    }
}

/// Candidate goals for recognition at `v`: the goal entries stored there
/// plus the goal members of every stereotype the agent is believed (one
/// level up) to instantiate.
fn candidate_goals(store: &BeliefStore, v: &Viewpoint, agent: &str) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for entry in store.entries(v, AttitudeType::Goal) {
        let term = match entry {
            Entry::Fact(p) => p.to_term(),
            Entry::Formula(f) => f.to_term(),
            Entry::Action(t) => t,
        };
        out.push(holder_relative(agent, &term));
    }
    if let Some(parent) = v.parent() {
        for (name, members) in store.stereotypes() {
            let isa = Proposition::positive(Term::compound(
                "isa",
                vec![Term::constant(agent), Term::constant(name.clone())],
            ));
            if store.holds(&parent, AttitudeType::Belief, &isa) != TriState::Holds {
                continue;
            }
            for member in members {
                if member.space == AttitudeType::Goal {
                    out.push(holder_relative(agent, &member.prop.to_term()));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Explains an observed ground action: finds a plan containing it that
/// achieves as many candidate goals as possible (ties: fewer steps, then
/// enumeration order), ascribes those goals, and files the plan's actions
/// in the agent's intention space. `None` when no explanation exists
/// within limits.
pub fn recognize(
    store: &BeliefStore,
    acts: &ActLibrary,
    operators: &[Operator],
    v: &Viewpoint,
    observed: &Term,
    limits: &Limits,
) -> Result<(BeliefStore, Option<RecognitionResult>), PlanError> {
    let agent = require_agent_context(v)?;
    let ops = context_operators(acts, operators, &agent)?;
    let Term::Compound { functor, .. } = observed else {
        return Err(PlanError::UnknownObserved(observed.to_string()));
    };
    let observed_op = ops
        .iter()
        .find(|o| &o.name == functor)
        .cloned()
        .ok_or_else(|| PlanError::UnknownObserved(observed.to_string()))?;

    let candidates = candidate_goals(store, v, &agent);
    if candidates.is_empty() {
        return Ok((store.clone(), None));
    }
    let initial = flatten_viewpoint(store, v)?;
    let hook = OnDemandHook { viewpoint: v };

    let feasible: Vec<bool> = candidates
        .iter()
        .map(|g| goal_feasible(store, v, &initial, &ops, g))
        .collect();
    for size in (1..=candidates.len()).rev() {
        let mut best: Option<(usize, Plan, BeliefStore)> = None;
        for subset in combinations(candidates.len(), size) {
            if subset.iter().any(|&i| !feasible[i]) {
                continue;
            }
            let goal_lits: Vec<Literal> =
                subset.iter().map(|&i| Literal::pos(candidates[i].clone())).collect();
            let mut root = Plan::root(initial.clone(), goal_lits.clone());
            let Some(seeded) = seed_observed(&mut root, &observed_op, observed) else {
                // The observation cannot instantiate this agent's operator.
                continue;
            };
            debug_assert!(seeded != START && seeded != FINISH);
            let searched = search_full(root, &ops, limits, Some(&hook), Some(store.clone()));
            let (result, out_store, _trace) = match searched {
                Ok(r) => r,
                Err(PlanError::LimitExceeded { .. }) => continue,
                Err(e) => return Err(e),
            };
            let PlanSearch::Found(plan) = result.outcome else {
                continue;
            };
            if !goals_achieved_by_real_steps(&plan, &goal_lits) {
                continue;
            }
            let steps = plan.real_step_count();
            let better = match &best {
                None => true,
                Some((best_steps, _, _)) => steps < *best_steps,
            };
            if better {
                best = Some((steps, plan, out_store.unwrap_or_else(|| store.clone())));
            }
        }
        if let Some((_, plan, search_store)) = best {
            let ascribed: Vec<Proposition> = plan
                .links()
                .iter()
                .filter(|l| l.consumer == FINISH && is_real_producer(&plan, l.producer))
                .map(|l| Proposition::from_term(plan.substituted(&l.protected.term)))
                .collect();
            let final_store = ascribe_plan(&search_store, v, &plan)?;
            return Ok((
                final_store,
                Some(RecognitionResult {
                    plan,
                    ascribed_goals: ascribed,
                    observed: observed.clone(),
                }),
            ));
        }
    }
    Ok((store.clone(), None))
}

fn is_real_producer(plan: &Plan, id: StepId) -> bool {
    id != START && id != FINISH && !plan.step(id).mental
}

/// Every finish-goal must be produced by a real (non-mental) plan step: a
/// goal that was already true, or true only by the reasoner's own
/// maintenance, does not count as explained by the observation.
fn goals_achieved_by_real_steps(plan: &Plan, goals: &[Literal]) -> bool {
    goals.iter().all(|g| {
        plan.links()
            .iter()
            .any(|l| l.consumer == FINISH && l.protected == *g && is_real_producer(plan, l.producer))
    })
}

/// Inserts the observed ground instance as a committed plan step,
/// unifying it with the operator template and queueing its preconditions.
fn seed_observed(plan: &mut Plan, op: &Operator, observed: &Term) -> Option<StepId> {
    let id = plan.instantiate_step(op);
    let template = plan.step_instance(id);
    let bindings = crate::term::unify(&template, observed, plan.bindings())?;
    plan.set_bindings(bindings);
    if !plan.neqs_consistent() {
        return None;
    }
    let pres = plan.step(id).preconditions.clone();
    for pre in pres.iter().rev() {
        plan.push_agenda((id, pre.clone()));
    }
    Some(id)
}

/// Ascribes a finished plan at a viewpoint: non-mental steps into the
/// intention space, goals achieved by non-mental steps into the goal
/// space. Mental steps model the reasoner's own upkeep and stay out.
pub fn ascribe_plan(
    store: &BeliefStore,
    v: &Viewpoint,
    plan: &Plan,
) -> Result<BeliefStore, StoreError> {
    let mut current = store.clone();
    for id in plan.canonical_linearization() {
        if id == START || id == FINISH || plan.step(id).mental {
            continue;
        }
        let instance = plan.step_instance(id);
        if !instance.is_ground() {
            return Err(StoreError::NotGround { entry: instance.to_string() });
        }
        let (next, _) = crate::ascription::ascribe_entry(
            &current,
            v,
            AttitudeType::Intention,
            &Entry::Action(instance),
        )?;
        current = next;
    }
    for link in plan.links() {
        if link.consumer != FINISH || !is_real_producer(plan, link.producer) {
            continue;
        }
        let mut term = plan.substituted(&link.protected.term);
        if !link.protected.positive {
            term = Term::compound(crate::term::NOT_FUNCTOR, vec![term]);
        }
        let formula = AttitudeFormula::from_term(term);
        let (next, _, _) = ascribe_formula(&current, v, AttitudeType::Goal, &formula)?;
        current = next;
    }
    Ok(current)
}

/// Index combinations of `k` out of `n`, lexicographic.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            go(i + 1, n, k, current, out);
            current.pop();
        }
    }
    go(0, n, k, &mut current, &mut out);
    out
}
