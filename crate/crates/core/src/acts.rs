//! Speech acts: the four-class taxonomy, schema inheritance, felicity
//! checking, and the speaker/hearer update rules that turn a performed act
//! into ascriptions.
//!
//! Schema preconditions are attitude formulas over the role variables
//! `Speaker`, `Hearer` and `Proposition`. More specific acts inherit their
//! parent's preconditions and may only add conditions, never weaken them.

use crate::ascription::{ascribe_formula, AscriptionOutcome};
use crate::formula::{AttitudeFormula, AttitudeKind};
use crate::store::{AttitudeType, BeliefStore, LeafWrite, StoreError, TriState, Viewpoint};
use crate::term::{Bindings, Proposition, Symbol, Term};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

pub const ROLE_SPEAKER: &str = "Speaker";
pub const ROLE_HEARER: &str = "Hearer";
pub const ROLE_PROPOSITION: &str = "Proposition";

/// The four act classes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum ActClass {
    Question,
    Answer,
    Request,
    Inform,
}

impl ActClass {
    pub fn keyword(self) -> &'static str {
        match self {
            ActClass::Question => "question",
            ActClass::Answer => "answer",
            ActClass::Request => "request",
            ActClass::Inform => "inform",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ActClass> {
        match word {
            "question" => Some(ActClass::Question),
            "answer" => Some(ActClass::Answer),
            "request" => Some(ActClass::Request),
            "inform" => Some(ActClass::Inform),
            _ => None,
        }
    }
}

impl fmt::Display for ActClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActError {
    #[error("unknown act: {0}")]
    UnknownAct(Symbol),
    #[error("inheritance cycle through act {0}")]
    Cycle(Symbol),
    #[error("act {act}: condition {condition} uses variables outside the role set")]
    ForeignVariables { act: Symbol, condition: String },
    #[error("speaker and hearer must differ in {0}")]
    ReflexiveAct(String),
    #[error("malformed act instance term: {0}")]
    MalformedInstance(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// A speech-act type: class, optional parent, and its own preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActSchema {
    pub name: Symbol,
    pub class: ActClass,
    pub parent: Option<Symbol>,
    pub own_preconditions: Vec<AttitudeFormula>,
}

/// Immutable-after-load act collection with inheritance resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActLibrary {
    acts: BTreeMap<Symbol, ActSchema>,
}

impl ActLibrary {
    pub fn new() -> ActLibrary {
        ActLibrary::default()
    }

    /// Adds or replaces a schema. Condition variables must stay within the
    /// role set; parent links are checked lazily at resolution time, so
    /// libraries may reference acts loaded earlier or later.
    pub fn define(&mut self, schema: ActSchema) -> Result<(), ActError> {
        for cond in &schema.own_preconditions {
            let vars = cond.to_term().variables();
            if vars.iter().any(|v| {
                v != ROLE_SPEAKER && v != ROLE_HEARER && v != ROLE_PROPOSITION
            }) {
                return Err(ActError::ForeignVariables {
                    act: schema.name.clone(),
                    condition: cond.to_string(),
                });
            }
        }
        self.acts.insert(schema.name.clone(), schema);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ActSchema> {
        self.acts.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &Symbol> {
        self.acts.keys()
    }

    pub fn len(&self) -> usize {
        self.acts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActSchema> {
        self.acts.values()
    }

    fn walk_parents(&self, name: &str) -> Result<Vec<&ActSchema>, ActError> {
        let mut chain = Vec::new();
        let mut seen = Vec::new();
        let mut cursor = Some(name.to_string());
        while let Some(n) = cursor {
            if seen.contains(&n) {
                return Err(ActError::Cycle(n));
            }
            let schema = self.acts.get(&n).ok_or_else(|| ActError::UnknownAct(n.clone()))?;
            seen.push(n);
            chain.push(schema);
            cursor = schema.parent.clone();
        }
        chain.reverse();
        Ok(chain)
    }

    /// Full precondition list of an act: the parent's resolved list followed
    /// by the act's own conditions, deduplicated, ancestors first.
    pub fn resolve_preconditions(&self, name: &str) -> Result<Vec<AttitudeFormula>, ActError> {
        let chain = self.walk_parents(name)?;
        let mut out: Vec<AttitudeFormula> = Vec::new();
        for schema in chain {
            for cond in &schema.own_preconditions {
                if !out.contains(cond) {
                    out.push(cond.clone());
                }
            }
        }
        Ok(out)
    }

    /// The built-in 20-act library.
    pub fn standard() -> &'static ActLibrary {
        static STANDARD: OnceLock<ActLibrary> = OnceLock::new();
        STANDARD.get_or_init(|| {
            let parsed = crate::scenario::parse_library(STANDARD_ACTS_SOURCE)
                .expect("built-in act library must parse");
            debug_assert!(parsed.operators.is_empty());
            parsed.acts
        })
    }
}

/// Source text of the built-in act library.
pub const STANDARD_ACTS_SOURCE: &str = include_str!("../assets/standard.acts");

/// A ground performance of a speech act.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActInstance {
    pub schema: Symbol,
    pub speaker: Symbol,
    pub hearer: Symbol,
    pub content: Proposition,
}

impl ActInstance {
    pub fn new(
        schema: impl Into<Symbol>,
        speaker: impl Into<Symbol>,
        hearer: impl Into<Symbol>,
        content: Proposition,
    ) -> Result<ActInstance, ActError> {
        let schema = schema.into();
        let speaker = speaker.into();
        let hearer = hearer.into();
        if speaker == hearer {
            return Err(ActError::ReflexiveAct(schema));
        }
        Ok(ActInstance { schema, speaker, hearer, content })
    }

    /// Reads `name(speaker, hearer, content)` back into an instance.
    pub fn from_term(term: &Term) -> Result<ActInstance, ActError> {
        let Term::Compound { functor, args } = term else {
            return Err(ActError::MalformedInstance(term.to_string()));
        };
        let [Term::Constant(speaker), Term::Constant(hearer), content] = args.as_slice() else {
            return Err(ActError::MalformedInstance(term.to_string()));
        };
        ActInstance::new(
            functor.clone(),
            speaker.clone(),
            hearer.clone(),
            Proposition::from_term(content.clone()),
        )
    }

    pub fn to_term(&self) -> Term {
        Term::compound(
            self.schema.clone(),
            vec![
                Term::constant(self.speaker.clone()),
                Term::constant(self.hearer.clone()),
                self.content.to_term(),
            ],
        )
    }

    /// Bindings resolving the role variables to this performance.
    pub fn role_bindings(&self) -> Bindings {
        Bindings::from_pairs([
            (ROLE_SPEAKER, Term::constant(self.speaker.clone())),
            (ROLE_HEARER, Term::constant(self.hearer.clone())),
            (ROLE_PROPOSITION, self.content.to_term()),
        ])
        .expect("role bindings are ground and distinct")
    }

    /// The act's resolved preconditions with roles bound.
    pub fn bound_preconditions(&self, lib: &ActLibrary) -> Result<Vec<AttitudeFormula>, ActError> {
        let bindings = self.role_bindings();
        Ok(lib
            .resolve_preconditions(&self.schema)?
            .iter()
            .map(|c| c.instantiate(&bindings))
            .collect())
    }
}

impl fmt::Display for ActInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Felicity verdict: every precondition held, or the unmet ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Felicity {
    Felicitous,
    Missing(Vec<AttitudeFormula>),
}

/// Checks the act's resolved preconditions from the speaker's own viewpoint
/// (`store` is the speaker's store). A condition counts as met only when it
/// holds outright.
pub fn check_felicity(
    store: &BeliefStore,
    lib: &ActLibrary,
    act: &ActInstance,
) -> Result<Felicity, ActError> {
    let mut missing = Vec::new();
    for cond in act.bound_preconditions(lib)? {
        if store.query_formula(&Viewpoint::root(), AttitudeType::Belief, &cond) != TriState::Holds
        {
            missing.push(cond);
        }
    }
    if missing.is_empty() {
        Ok(Felicity::Felicitous)
    } else {
        Ok(Felicity::Missing(missing))
    }
}

/// One condition's worth of update bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionWrite {
    /// The role-bound precondition the rule processed.
    pub condition: AttitudeFormula,
    /// The formula actually pushed into the store.
    pub written: AttitudeFormula,
    /// The resolved leaf environment write.
    pub leaf: LeafWrite,
    pub outcome: AscriptionOutcome,
}

/// What an update rule did: per-condition ascriptions, plus the dropped
/// intention on the speaker side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub writes: Vec<ConditionWrite>,
    pub intention_dropped: Option<Term>,
}

/// Speaker-side update: after performing the act, the speaker ascribes to
/// the hearer the belief that each precondition was met — `believe(Hearer,
/// C)` for every condition `C` — then drops the intention to perform the
/// act. Goals are left untouched. Blocked ascriptions are skipped and
/// reported, not fatal.
pub fn speaker_update(
    store: &BeliefStore,
    lib: &ActLibrary,
    act: &ActInstance,
) -> Result<(BeliefStore, UpdateReport), ActError> {
    let mut current = store.clone();
    let mut writes = Vec::new();
    for condition in act.bound_preconditions(lib)? {
        let written = AttitudeFormula::att(
            AttitudeKind::Believe,
            Term::constant(act.hearer.clone()),
            condition.clone(),
        );
        let (next, leaf, outcome) =
            ascribe_formula(&current, &Viewpoint::root(), AttitudeType::Belief, &written)?;
        current = next;
        writes.push(ConditionWrite { condition, written, leaf, outcome });
    }
    let act_term = act.to_term();
    let had_intention = current.holds(
        &Viewpoint::root(),
        AttitudeType::Intention,
        &Proposition::positive(act_term.clone()),
    ) == TriState::Holds;
    let current = current.retract_attitude(
        &Viewpoint::root(),
        AttitudeType::Intention,
        &Proposition::positive(act_term.clone()),
    );
    let report =
        UpdateReport { writes, intention_dropped: had_intention.then_some(act_term) };
    Ok((current, report))
}

/// Hearer-side update: the hearer ascribes each precondition `C` itself to
/// the speaker — one nesting level shallower than the speaker's rule. The
/// content proposition is not adopted; that takes an accept-belief mental
/// act.
pub fn hearer_update(
    store: &BeliefStore,
    lib: &ActLibrary,
    act: &ActInstance,
) -> Result<(BeliefStore, UpdateReport), ActError> {
    let mut current = store.clone();
    let mut writes = Vec::new();
    for condition in act.bound_preconditions(lib)? {
        let (next, leaf, outcome) =
            ascribe_formula(&current, &Viewpoint::root(), AttitudeType::Belief, &condition)?;
        current = next;
        writes.push(ConditionWrite {
            condition: condition.clone(),
            written: condition,
            leaf,
            outcome,
        });
    }
    Ok((current, UpdateReport { writes, intention_dropped: None }))
}
