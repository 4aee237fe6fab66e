//! Systematic partial-order causal-link planning over STRIPS-style
//! operators, including the mental acts that move beliefs between nesting
//! levels.
//!
//! The planner core is attitude-agnostic: attitude formulas compile to
//! reserved-functor facts (`believe`/`goal`/`intend` over agent and body),
//! so the same machinery serves physical acts, speech acts and mental acts.

mod flatten;
mod nested;
mod search;
mod validate;

pub use flatten::{compile_act, flatten_viewpoint, unwrap_belief_chain};
pub use nested::{ascribe_plan, recognize, simulate, RecognitionResult, SimulationOutcome};
pub use search::{resolve_threat, search, search_exhaustive, threats, ExhaustiveReport, Threat};
pub use validate::{validate, ValidityError};

use crate::ascription::AscriptionError;
use crate::acts::ActError;
use crate::store::StoreError;
use crate::term::{substitute, Bindings, Proposition, Symbol, Term};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A precondition literal. Negative literals are closed-world absence
/// tests over the flat state; explicit negation stays inside the term as a
/// `not(...)` wrapper.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub positive: bool,
    pub term: Term,
}

impl Literal {
    pub fn pos(term: Term) -> Literal {
        Literal { positive: true, term }
    }

    pub fn neg(term: Term) -> Literal {
        Literal { positive: false, term }
    }

    /// Parses operator-file syntax: a top-level `not(...)` is an absence
    /// test, anything else an ordinary positive literal.
    pub fn from_term(term: Term) -> Literal {
        match term {
            Term::Compound { ref functor, ref args }
                if functor == crate::term::NOT_FUNCTOR && args.len() == 1 =>
            {
                Literal::neg(args[0].clone())
            }
            other => Literal::pos(other),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.term)
        } else {
            write!(f, "not({})", self.term)
        }
    }
}

/// A STRIPS-style operator with add/delete effects. `params` is the
/// argument template: variables (and fixed constants, for pre-bound roles).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operator {
    pub name: Symbol,
    pub params: Vec<Term>,
    pub preconditions: Vec<Literal>,
    pub add: Vec<Term>,
    pub del: Vec<Term>,
    /// Argument pairs that must never become equal.
    pub neq: Vec<(Term, Term)>,
    /// Mental acts model the reasoner's own maintenance, not the simulated
    /// agent's plan.
    pub mental: bool,
}

impl Operator {
    /// Effect variables must come from the parameter template.
    pub fn validate(&self) -> Result<(), PlanError> {
        let mut param_vars = Vec::new();
        for p in &self.params {
            for v in p.variables() {
                param_vars.push(v);
            }
        }
        for eff in self.add.iter().chain(&self.del) {
            for v in eff.variables() {
                if !param_vars.contains(&v) {
                    return Err(PlanError::BadOperator {
                        name: self.name.clone(),
                        reason: format!("effect variable {v} is not a parameter"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn head_term(&self) -> Term {
        Term::compound(self.name.clone(), self.params.clone())
    }
}

/// Name used for the belief-pushing mental act.
pub const DEFAULT_BELIEF_ASCRIPTION: &str = "default_belief_ascription";
/// Name used for the belief-adopting mental act.
pub const ACCEPT_BELIEF: &str = "accept_belief";

/// The two mental-act operators in their level-explicit form, for direct
/// planning over reified belief states. Nested simulation performs the
/// belief-pushing act through the on-demand ascription hook instead.
pub fn mental_operators() -> Vec<Operator> {
    let a1 = Term::variable("Agent1");
    let a2 = Term::variable("Agent2");
    let p = Term::variable("Proposition");
    let believe = |agent: &Term, body: Term| {
        Term::compound("believe", vec![agent.clone(), body])
    };
    let not = |t: Term| Term::compound("not", vec![t]);
    vec![
        Operator {
            name: ACCEPT_BELIEF.into(),
            params: vec![a1.clone(), a2.clone(), p.clone()],
            preconditions: vec![
                Literal::pos(believe(&a1, believe(&a2, p.clone()))),
                Literal::neg(believe(&a1, not(p.clone()))),
                Literal::pos(believe(&a1, Term::compound("trustworthy", vec![a2.clone()]))),
            ],
            add: vec![believe(&a1, p.clone())],
            del: vec![],
            neq: vec![(a1.clone(), a2.clone())],
            mental: true,
        },
        Operator {
            name: DEFAULT_BELIEF_ASCRIPTION.into(),
            params: vec![a1.clone(), a2.clone(), p.clone()],
            preconditions: vec![
                Literal::pos(believe(&a1, p.clone())),
                Literal::neg(believe(&a1, believe(&a2, not(p.clone())))),
            ],
            add: vec![believe(&a1, believe(&a2, p))],
            del: vec![],
            neq: vec![(a1, a2)],
            mental: true,
        },
    ]
}

/// Step identifier within one plan.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct StepId(pub usize);

pub const START: StepId = StepId(0);
pub const FINISH: StepId = StepId(1);

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// A plan step: an operator instance with renamed variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub id: StepId,
    pub name: Symbol,
    pub args: Vec<Term>,
    pub preconditions: Vec<Literal>,
    pub add: Vec<Term>,
    pub del: Vec<Term>,
    pub mental: bool,
}

impl Step {
    pub fn is_start(&self) -> bool {
        self.id == START
    }

    pub fn is_finish(&self) -> bool {
        self.id == FINISH
    }
}

/// A protected condition: `producer` achieves `protected` for `consumer`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CausalLink {
    pub producer: StepId,
    pub protected: Literal,
    pub consumer: StepId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("search limit exceeded after {explored} nodes (frontier size {frontier})")]
    LimitExceeded { explored: u64, frontier: usize },
    #[error("invalid operator {name}: {reason}")]
    BadOperator { name: Symbol, reason: String },
    #[error("observed instance {0} matches no known operator or act")]
    UnknownObserved(String),
    #[error(transparent)]
    Ascription(#[from] AscriptionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Act(#[from] ActError),
}

/// Search resource bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_steps: usize,
    pub max_nodes: u64,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { max_steps: 8, max_nodes: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    /// Some branch was cut by the step bound: a failed search is then not a
    /// proof of absence.
    pub truncated: bool,
}

/// Search verdict. `NoPlan { complete: true }` is a proven absence: the
/// space was exhausted without any limit pruning a branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanSearch {
    Found(Plan),
    NoPlan { complete: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanResult {
    pub outcome: PlanSearch,
    pub stats: SearchStats,
}

impl PlanResult {
    pub fn found(&self) -> Option<&Plan> {
        match &self.outcome {
            PlanSearch::Found(p) => Some(p),
            PlanSearch::NoPlan { .. } => None,
        }
    }
}

/// A partially ordered causal-link plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    steps: BTreeMap<StepId, Step>,
    orderings: BTreeSet<(StepId, StepId)>,
    links: Vec<CausalLink>,
    bindings: Bindings,
    neqs: BTreeSet<(Term, Term)>,
    agenda: Vec<(StepId, Literal)>,
    next_step: usize,
    next_var: usize,
}

impl Plan {
    /// The empty refinement root: start (producing the initial facts),
    /// finish (requiring the goals), and the goals on the agenda.
    pub fn root(initial: Vec<Term>, goals: Vec<Literal>) -> Plan {
        let start = Step {
            id: START,
            name: "start".into(),
            args: vec![],
            preconditions: vec![],
            add: initial,
            del: vec![],
            mental: false,
        };
        let finish = Step {
            id: FINISH,
            name: "finish".into(),
            args: vec![],
            preconditions: goals.clone(),
            add: vec![],
            del: vec![],
            mental: false,
        };
        let mut steps = BTreeMap::new();
        steps.insert(START, start);
        steps.insert(FINISH, finish);
        let mut agenda: Vec<(StepId, Literal)> = goals.into_iter().map(|g| (FINISH, g)).collect();
        agenda.reverse();
        Plan {
            steps,
            orderings: BTreeSet::from([(START, FINISH)]),
            links: Vec::new(),
            bindings: Bindings::new(),
            neqs: BTreeSet::new(),
            agenda,
            next_step: 2,
            next_var: 0,
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.steps.values()
    }

    pub fn step(&self, id: StepId) -> &Step {
        &self.steps[&id]
    }

    /// Steps other than start and finish.
    pub fn real_steps(&self) -> impl Iterator<Item = &Step> {
        self.steps.values().filter(|s| !s.is_start() && !s.is_finish())
    }

    pub fn real_step_count(&self) -> usize {
        self.steps.len() - 2
    }

    pub fn links(&self) -> &[CausalLink] {
        &self.links
    }

    pub fn bindings(&self) -> &Bindings {
        &self.bindings
    }

    pub fn agenda(&self) -> &[(StepId, Literal)] {
        &self.agenda
    }

    pub fn orderings(&self) -> &BTreeSet<(StepId, StepId)> {
        &self.orderings
    }

    pub fn substituted(&self, term: &Term) -> Term {
        substitute(&self.bindings, term)
    }

    /// Ground argument list of a step under current bindings.
    pub fn step_instance(&self, id: StepId) -> Term {
        let step = &self.steps[&id];
        if step.args.is_empty() {
            Term::constant(step.name.clone())
        } else {
            Term::compound(
                step.name.clone(),
                step.args.iter().map(|a| self.substituted(a)).collect(),
            )
        }
    }

    /// Transitive ordering query.
    pub fn precedes(&self, a: StepId, b: StepId) -> bool {
        if a == b {
            return false;
        }
        let mut stack = vec![a];
        let mut seen = BTreeSet::new();
        while let Some(x) = stack.pop() {
            for (f, t) in self.orderings.range((x, StepId(0))..=(x, StepId(usize::MAX))) {
                debug_assert_eq!(*f, x);
                if *t == b {
                    return true;
                }
                if seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        false
    }

    /// Adds an ordering edge; `false` when it would create a cycle.
    pub fn try_order(&mut self, before: StepId, after: StepId) -> bool {
        if before == after || self.precedes(after, before) {
            return false;
        }
        self.orderings.insert((before, after));
        true
    }

    /// All disequality constraints still satisfiable under the bindings.
    pub(crate) fn neqs_consistent(&self) -> bool {
        self.neqs.iter().all(|(a, b)| self.substituted(a) != self.substituted(b))
    }

    pub(crate) fn set_bindings(&mut self, bindings: Bindings) {
        self.bindings = bindings;
    }

    pub(crate) fn add_neq(&mut self, a: Term, b: Term) {
        let pair = if a <= b { (a, b) } else { (b, a) };
        self.neqs.insert(pair);
    }

    pub(crate) fn push_agenda(&mut self, item: (StepId, Literal)) {
        self.agenda.push(item);
    }

    pub(crate) fn pop_agenda(&mut self) -> Option<(StepId, Literal)> {
        self.agenda.pop()
    }

    pub fn add_link(&mut self, link: CausalLink) {
        self.links.push(link);
    }

    /// Instantiates an operator as a fresh step (variables renamed apart),
    /// recording its instantiation disequalities. Does not queue
    /// preconditions; the caller decides how they are discharged.
    pub fn instantiate_step(&mut self, op: &Operator) -> StepId {
        let id = StepId(self.next_step);
        self.next_step += 1;
        let mut renaming = Bindings::new();
        let mut all_vars = Vec::new();
        for t in op
            .params
            .iter()
            .chain(op.add.iter())
            .chain(op.del.iter())
        {
            all_vars.extend(t.variables());
        }
        for l in &op.preconditions {
            all_vars.extend(l.term.variables());
        }
        for (a, b) in &op.neq {
            all_vars.extend(a.variables());
            all_vars.extend(b.variables());
        }
        all_vars.dedup();
        for v in &all_vars {
            if renaming.get(v).is_none() {
                let fresh = Term::variable(format!("{v}_{}", self.next_var));
                self.next_var += 1;
                renaming.bind(v, &fresh).expect("fresh variables cannot clash");
            }
        }
        let rn = |t: &Term| substitute(&renaming, t);
        let step = Step {
            id,
            name: op.name.clone(),
            args: op.params.iter().map(rn).collect(),
            preconditions: op
                .preconditions
                .iter()
                .map(|l| Literal { positive: l.positive, term: rn(&l.term) })
                .collect(),
            add: op.add.iter().map(rn).collect(),
            del: op.del.iter().map(rn).collect(),
            mental: op.mental,
        };
        for (a, b) in &op.neq {
            self.add_neq(rn(a), rn(b));
        }
        self.steps.insert(id, step);
        self.orderings.insert((START, id));
        self.orderings.insert((id, FINISH));
        id
    }

    pub(crate) fn insert_raw_step(&mut self, step_without_id: Step) -> StepId {
        let id = StepId(self.next_step);
        self.next_step += 1;
        let mut step = step_without_id;
        step.id = id;
        self.steps.insert(id, step);
        self.orderings.insert((START, id));
        self.orderings.insert((id, FINISH));
        id
    }

    /// Grounds variables left unbound at solution time (effect-only
    /// parameters nothing constrained) against the plan's own constant
    /// pool, lowest constant first, honoring disequalities. Returns false
    /// when some variable admits no consistent constant. Safe at solution
    /// time: possibly-codesignating threats were already resolved, so any
    /// consistent grounding preserves validity.
    pub fn ground_remaining(&mut self) -> bool {
        let mut pool: BTreeSet<Symbol> = BTreeSet::new();
        for step in self.steps.values() {
            for t in step.args.iter().chain(&step.add).chain(&step.del) {
                collect_constants(&self.substituted(t), &mut pool);
            }
        }
        loop {
            let mut unbound: Vec<Symbol> = Vec::new();
            for step in self.steps.values() {
                for t in step.args.iter().chain(&step.add).chain(&step.del) {
                    for v in self.substituted(t).variables() {
                        if !unbound.contains(&v) {
                            unbound.push(v);
                        }
                    }
                }
            }
            let Some(var) = unbound.first() else {
                return true;
            };
            let mut bound = false;
            for c in &pool {
                let mut candidate = self.bindings.clone();
                if candidate.bind(var, &Term::constant(c.clone())).is_err() {
                    continue;
                }
                let saved = std::mem::replace(&mut self.bindings, candidate);
                if self.neqs_consistent() {
                    bound = true;
                    break;
                }
                self.bindings = saved;
            }
            if !bound {
                return false;
            }
        }
    }

    /// Deterministic linearization: topological order with lexicographic
    /// tie-breaking on the displayed instance.
    pub fn canonical_linearization(&self) -> Vec<StepId> {
        let ids: Vec<StepId> = self.steps.keys().copied().collect();
        let mut remaining: BTreeSet<StepId> = ids.iter().copied().collect();
        let mut out = Vec::new();
        while !remaining.is_empty() {
            let mut ready: Vec<StepId> = remaining
                .iter()
                .copied()
                .filter(|&s| {
                    !remaining.iter().any(|&o| o != s && self.precedes(o, s))
                })
                .collect();
            ready.sort_by_key(|&s| (self.step_instance(s).to_string(), s));
            let chosen = ready[0];
            remaining.remove(&chosen);
            out.push(chosen);
        }
        out
    }

    /// Stable identity of the plan's structure: steps, links, ordering and
    /// bindings, with step ids relabeled canonically. Two search leaves
    /// denote the same plan exactly when their keys match.
    pub fn canonical_key(&self) -> String {
        let order = self.canonical_linearization();
        let rank: BTreeMap<StepId, usize> =
            order.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut parts: Vec<String> = Vec::new();
        let mut steps: Vec<String> = self
            .steps
            .keys()
            .map(|&id| format!("{}:{}", rank[&id], self.step_instance(id)))
            .collect();
        steps.sort();
        parts.push(format!("steps[{}]", steps.join(";")));
        let mut links: Vec<String> = self
            .links
            .iter()
            .map(|l| {
                format!(
                    "{}-{}-{}",
                    rank[&l.producer],
                    Literal {
                        positive: l.protected.positive,
                        term: self.substituted(&l.protected.term)
                    },
                    rank[&l.consumer]
                )
            })
            .collect();
        links.sort();
        parts.push(format!("links[{}]", links.join(";")));
        let mut ords: Vec<String> = Vec::new();
        for &a in self.steps.keys() {
            for &b in self.steps.keys() {
                if a != b && self.precedes(a, b) {
                    ords.push(format!("{}<{}", rank[&a], rank[&b]));
                }
            }
        }
        ords.sort();
        parts.push(format!("ord[{}]", ords.join(";")));
        let mut neqs: Vec<String> = self
            .neqs
            .iter()
            .map(|(a, b)| format!("{}!={}", self.substituted(a), self.substituted(b)))
            .collect();
        neqs.sort();
        parts.push(format!("neq[{}]", neqs.join(";")));
        parts.join(" ")
    }
}

fn collect_constants(term: &Term, out: &mut BTreeSet<Symbol>) {
    match term {
        Term::Constant(c) => {
            out.insert(c.clone());
        }
        Term::Variable(_) => {}
        Term::Compound { args, .. } => {
            for a in args {
                collect_constants(a, out);
            }
        }
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = self.canonical_linearization();
        let mut first = true;
        write!(f, "[")?;
        for id in order {
            if id == START || id == FINISH {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}", self.step_instance(id))?;
        }
        write!(f, "]")
    }
}

/// Plans over flat proposition states. Negated propositions appear in the
/// state as explicit `not(...)` facts.
pub fn plan(
    initial: &[Proposition],
    goals: &[Proposition],
    library: &[Operator],
    limits: &Limits,
) -> Result<PlanResult, PlanError> {
    for op in library {
        op.validate()?;
    }
    let init_terms: Vec<Term> = initial.iter().map(|p| p.to_term()).collect();
    let goal_lits: Vec<Literal> = goals.iter().map(|g| Literal::pos(g.to_term())).collect();
    // A goal absent from the initial state that unifies with no operator
    // effect has no possible producer: absence is proven without search.
    let hopeless = goal_lits.iter().any(|g| {
        !init_terms.contains(&g.term)
            && !library
                .iter()
                .any(|op| op.add.iter().any(|e| crate::term::unify(e, &g.term, &Bindings::new()).is_some()))
    });
    if hopeless {
        return Ok(PlanResult {
            outcome: PlanSearch::NoPlan { complete: true },
            stats: SearchStats::default(),
        });
    }
    let root = Plan::root(init_terms, goal_lits);
    search(root, library, limits)
}
