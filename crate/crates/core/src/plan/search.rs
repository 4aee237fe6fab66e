//! Plan-space refinement search: LIFO agenda over open conditions, full
//! threat resolution before new commitments, iterative deepening on step
//! count, deterministic child ordering throughout.

use super::{
    CausalLink, Limits, Literal, Operator, Plan, PlanError, PlanResult, PlanSearch,
    SearchStats, Step, StepId, FINISH, START,
};
use crate::ascription::{AscriptionError, ChainedAscription};
use crate::store::BeliefStore;
use crate::term::{unify, Symbol, Term};

/// A step endangering a causal link it could fall inside of.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Threat {
    pub link_index: usize,
    pub step: StepId,
}

/// All current threats, in deterministic (link, step) order. A step
/// threatens a link when one of its effects can codesignate with the
/// negation of the protected literal and the step can fall between producer
/// and consumer.
pub fn threats(plan: &Plan) -> Vec<Threat> {
    let mut out = Vec::new();
    for (idx, link) in plan.links().iter().enumerate() {
        for step in plan.steps() {
            if step.id == link.producer
                || step.id == link.consumer
                || step.id == START
                || step.id == FINISH
            {
                continue;
            }
            if plan.precedes(step.id, link.producer) || plan.precedes(link.consumer, step.id) {
                continue;
            }
            // Deletes clobber a positive protected literal; adds clobber a
            // negative one.
            let effects = if link.protected.positive { &step.del } else { &step.add };
            let clobbers = effects.iter().any(|e| {
                match unify(e, &link.protected.term, plan.bindings()) {
                    Some(b) => {
                        // A unifier forced through a disequality is no threat.
                        let mut probe = plan.clone();
                        probe.set_bindings(b);
                        probe.neqs_consistent()
                    }
                    None => false,
                }
            });
            if clobbers {
                out.push(Threat { link_index: idx, step: step.id });
            }
        }
    }
    out
}

/// Children of a threatened plan: promotion (threat before the producer),
/// demotion (threat after the consumer), and separation (a disequality
/// preventing the codesignation). Inconsistent children are discarded; an
/// empty result is a dead end.
pub fn resolve_threat(plan: &Plan, threat: &Threat) -> Vec<Plan> {
    let link = plan.links()[threat.link_index].clone();
    let mut children = Vec::new();

    let mut promoted = plan.clone();
    if promoted.try_order(threat.step, link.producer) {
        children.push(promoted);
    }
    let mut demoted = plan.clone();
    if demoted.try_order(link.consumer, threat.step) {
        children.push(demoted);
    }

    // Separation: force apart one variable binding of the clobbering
    // unifier. Each new pair is its own child; together they cover every
    // way of preventing the codesignation.
    let step = plan.step(threat.step);
    let effects = if link.protected.positive { &step.del } else { &step.add };
    for effect in effects {
        let Some(unifier) = unify(effect, &link.protected.term, plan.bindings()) else {
            continue;
        };
        for (var, value) in unifier.iter() {
            if plan.bindings().get(var) == Some(value) {
                continue;
            }
            let mut separated = plan.clone();
            separated.add_neq(Term::variable(var.clone()), value.clone());
            if separated.neqs_consistent() {
                children.push(separated);
            }
        }
    }
    children
}

/// Chain of mental steps an ascription support contributes to the plan.
#[derive(Debug, Clone)]
pub(crate) struct MentalStepSpec {
    pub name: Symbol,
    pub args: Vec<Term>,
    /// Fact at the level the belief was pushed from, when that level is
    /// inside the planning context.
    pub pre: Option<Term>,
    pub effect: Term,
}

/// Result of an on-demand ascription attempt for an open condition.
pub(crate) struct AscriptionSupport {
    pub steps: Vec<MentalStepSpec>,
    pub store: BeliefStore,
    pub trace: Vec<ChainedAscription>,
}

/// Hook giving the search access to on-demand belief ascription.
pub(crate) trait SupportHook {
    fn try_support(
        &self,
        store: &BeliefStore,
        term: &Term,
    ) -> Result<Option<AscriptionSupport>, AscriptionError>;
}

#[derive(Clone)]
struct Node {
    plan: Plan,
    store: Option<BeliefStore>,
    trace: Vec<ChainedAscription>,
}

/// Search-tree enumeration record for the systematicity oracle.
pub struct ExhaustiveReport {
    pub visited_keys: Vec<String>,
    pub solutions: Vec<Plan>,
}

/// Searches for a refinement of `root`, iteratively deepening the step
/// bound. Returns the result plus the solution node's store and ascription
/// trace when an ascription hook is in play.
pub(crate) fn search_full(
    root: Plan,
    operators: &[Operator],
    limits: &Limits,
    hook: Option<&dyn SupportHook>,
    store: Option<BeliefStore>,
) -> Result<(PlanResult, Option<BeliefStore>, Vec<ChainedAscription>), PlanError> {
    let mut stats = SearchStats::default();
    for bound in 0..=limits.max_steps {
        let mut truncated_at_bound = false;
        let found = run_bounded(
            root.clone(),
            operators,
            bound,
            limits,
            hook,
            store.clone(),
            &mut stats,
            &mut truncated_at_bound,
            &mut None,
        )?;
        if let Some(node) = found {
            stats.truncated = stats.truncated || truncated_at_bound;
            return Ok((
                PlanResult { outcome: PlanSearch::Found(node.plan), stats },
                node.store,
                node.trace,
            ));
        }
        if !truncated_at_bound {
            // The whole space below this bound is exhausted and nothing was
            // pruned: deeper bounds cannot add solutions either.
            return Ok((
                PlanResult { outcome: PlanSearch::NoPlan { complete: true }, stats },
                store,
                Vec::new(),
            ));
        }
        stats.truncated = true;
    }
    Ok((
        PlanResult { outcome: PlanSearch::NoPlan { complete: false }, stats },
        store,
        Vec::new(),
    ))
}

/// Searches for a refinement of `root` over flat states, no ascription.
pub fn search(root: Plan, operators: &[Operator], limits: &Limits) -> Result<PlanResult, PlanError> {
    let (result, _, _) = search_full(root, operators, limits, None, None)?;
    Ok(result)
}

/// Runs one depth-first pass at a fixed step bound. When `collect` is
/// given, the search does not stop at solutions and records every visited
/// node instead.
#[allow(clippy::too_many_arguments)]
fn run_bounded(
    root: Plan,
    operators: &[Operator],
    bound: usize,
    limits: &Limits,
    hook: Option<&dyn SupportHook>,
    store: Option<BeliefStore>,
    stats: &mut SearchStats,
    truncated: &mut bool,
    collect: &mut Option<&mut ExhaustiveReport>,
) -> Result<Option<Node>, PlanError> {
    let mut stack = vec![Node { plan: root, store, trace: Vec::new() }];
    while let Some(mut node) = stack.pop() {
        stats.nodes_expanded += 1;
        if stats.nodes_expanded > limits.max_nodes {
            return Err(PlanError::LimitExceeded {
                explored: stats.nodes_expanded,
                frontier: stack.len(),
            });
        }
        if let Some(report) = collect.as_deref_mut() {
            report.visited_keys.push(node.plan.canonical_key());
        }

        // Threats are settled before any new commitment is made.
        let current_threats = threats(&node.plan);
        if let Some(threat) = current_threats.first() {
            let children = resolve_threat(&node.plan, threat);
            for child in children.into_iter().rev() {
                stack.push(Node {
                    plan: child,
                    store: node.store.clone(),
                    trace: node.trace.clone(),
                });
            }
            continue;
        }

        if node.plan.agenda().is_empty() {
            // No threats, nothing open: a solution, once leftover
            // effect-only variables are grounded (steps must name concrete
            // actions to be ascribable as intentions).
            if !node.plan.ground_remaining() {
                continue;
            }
            if let Some(report) = collect.as_deref_mut() {
                report.solutions.push(node.plan.clone());
                continue;
            }
            return Ok(Some(node));
        }
        let Some((consumer, lit)) = node.plan.pop_agenda() else {
            unreachable!("agenda checked non-empty");
        };

        let mut children: Vec<Node> = Vec::new();

        // Support from existing steps, in step-id order (start first).
        for producer in node.plan.steps().map(|s| s.id).collect::<Vec<_>>() {
            if producer == consumer || producer == FINISH {
                continue;
            }
            if node.plan.precedes(consumer, producer) {
                continue;
            }
            for child in existing_supports(&node.plan, producer, consumer, &lit) {
                children.push(Node {
                    plan: child,
                    store: node.store.clone(),
                    trace: node.trace.clone(),
                });
            }
        }

        // Support from a fresh operator instance, operators in listed
        // (lexicographic) order.
        for op in operators {
            let effect_count = if lit.positive { op.add.len() } else { op.del.len() };
            if effect_count == 0 {
                continue;
            }
            if node.plan.real_step_count() + 1 > bound {
                *truncated = true;
                continue;
            }
            for eff_index in 0..effect_count {
                if let Some(child) = new_step_support(&node.plan, op, eff_index, consumer, &lit) {
                    children.push(Node {
                        plan: child,
                        store: node.store.clone(),
                        trace: node.trace.clone(),
                    });
                }
            }
        }

        // On-demand ascription, when planning inside a viewpoint.
        if let (Some(hook), Some(node_store)) = (hook, node.store.as_ref()) {
            if lit.positive {
                let ground = node.plan.substituted(&lit.term);
                if ground.is_ground() {
                    if let Some(support) = hook.try_support(node_store, &ground)? {
                        if node.plan.real_step_count() + support.steps.len() > bound {
                            *truncated = true;
                        } else if let Some(child) =
                            apply_ascription(&node.plan, consumer, &lit, &support)
                        {
                            let mut trace = node.trace.clone();
                            trace.extend(support.trace.iter().cloned());
                            children.push(Node {
                                plan: child,
                                store: Some(support.store.clone()),
                                trace,
                            });
                        }
                    }
                }
            }
        }

        for child in children.into_iter().rev() {
            stack.push(child);
        }
    }
    Ok(None)
}

/// Link an open condition to an effect of a step already in the plan.
fn existing_supports(plan: &Plan, producer: StepId, consumer: StepId, lit: &Literal) -> Vec<Plan> {
    let step = plan.step(producer);
    let mut out = Vec::new();
    if lit.positive {
        for effect in &step.add {
            if let Some(b) = unify(effect, &lit.term, plan.bindings()) {
                let mut child = plan.clone();
                child.set_bindings(b);
                if !child.neqs_consistent() {
                    continue;
                }
                if producer != START && !child.try_order(producer, consumer) {
                    continue;
                }
                child.add_link(CausalLink { producer, protected: lit.clone(), consumer });
                out.push(child);
            }
        }
    } else if producer == START {
        // Closed-world support from the initial state: the fact is simply
        // absent there. Requires a ground literal.
        let term = plan.substituted(&lit.term);
        if term.is_ground() && !step.add.iter().any(|f| plan.substituted(f) == term) {
            let mut child = plan.clone();
            child.add_link(CausalLink { producer, protected: lit.clone(), consumer });
            out.push(child);
        }
    } else {
        for effect in &step.del {
            if let Some(b) = unify(effect, &lit.term, plan.bindings()) {
                let mut child = plan.clone();
                child.set_bindings(b);
                if !child.neqs_consistent() {
                    continue;
                }
                if !child.try_order(producer, consumer) {
                    continue;
                }
                child.add_link(CausalLink { producer, protected: lit.clone(), consumer });
                out.push(child);
            }
        }
    }
    out
}

/// Instantiate an operator to support an open condition.
fn new_step_support(
    plan: &Plan,
    op: &Operator,
    effect_index: usize,
    consumer: StepId,
    lit: &Literal,
) -> Option<Plan> {
    let mut child = plan.clone();
    let id = child.instantiate_step(op);
    let step = child.step(id).clone();
    let effect = if lit.positive { &step.add[effect_index] } else { &step.del[effect_index] };
    let b = unify(effect, &lit.term, child.bindings())?;
    child.set_bindings(b);
    if !child.neqs_consistent() {
        return None;
    }
    if !child.try_order(id, consumer) {
        return None;
    }
    child.add_link(CausalLink { producer: id, protected: lit.clone(), consumer });
    for pre in step.preconditions.iter().rev() {
        child.push_agenda((id, pre.clone()));
    }
    Some(child)
}

/// Splice a chain of mental-act steps supporting an open condition.
fn apply_ascription(
    plan: &Plan,
    consumer: StepId,
    lit: &Literal,
    support: &AscriptionSupport,
) -> Option<Plan> {
    if support.steps.is_empty() {
        return None;
    }
    let mut child = plan.clone();
    let mut prev: Option<StepId> = None;
    let mut last = START;
    for spec in &support.steps {
        let id = child.insert_raw_step(Step {
            id: START, // placeholder; replaced on insertion
            name: spec.name.clone(),
            args: spec.args.clone(),
            preconditions: spec.pre.iter().map(|t| Literal::pos(t.clone())).collect(),
            add: vec![spec.effect.clone()],
            del: vec![],
            mental: true,
        });
        if let Some(pre_term) = &spec.pre {
            match prev {
                Some(p) => {
                    if !child.try_order(p, id) {
                        return None;
                    }
                    child.add_link(CausalLink {
                        producer: p,
                        protected: Literal::pos(pre_term.clone()),
                        consumer: id,
                    });
                }
                None => {
                    // The source level's fact is part of the initial state.
                    if child.step(START).add.iter().any(|f| child.substituted(f) == *pre_term) {
                        child.add_link(CausalLink {
                            producer: START,
                            protected: Literal::pos(pre_term.clone()),
                            consumer: id,
                        });
                    } else {
                        child.push_agenda((id, Literal::pos(pre_term.clone())));
                    }
                }
            }
        }
        prev = Some(id);
        last = id;
    }
    let last_effect = child.step(last).add[0].clone();
    let b = unify(&last_effect, &lit.term, child.bindings())?;
    child.set_bindings(b);
    if !child.neqs_consistent() {
        return None;
    }
    if !child.try_order(last, consumer) {
        return None;
    }
    child.add_link(CausalLink { producer: last, protected: lit.clone(), consumer });
    Some(child)
}

/// Exhaustively enumerates the whole search tree at one fixed step bound
/// without stopping at solutions.
pub fn search_exhaustive(
    root: Plan,
    operators: &[Operator],
    bound: usize,
    max_nodes: u64,
) -> Result<ExhaustiveReport, PlanError> {
    let mut report = ExhaustiveReport { visited_keys: Vec::new(), solutions: Vec::new() };
    let mut stats = SearchStats::default();
    let mut truncated = false;
    let limits = Limits { max_steps: bound, max_nodes };
    run_bounded(
        root,
        operators,
        bound,
        &limits,
        None,
        None,
        &mut stats,
        &mut truncated,
        &mut Some(&mut report),
    )?;
    Ok(report)
}
