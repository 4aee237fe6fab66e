//! Nested attitude environments: the store of beliefs, goals and intentions
//! an agent holds, including environments attributed to other agents at
//! arbitrary depth.
//!
//! A store is an immutable value; every mutator returns a new store. The
//! environments live in a map keyed by (belief-chain, attitude space); a
//! viewpoint with no stored entries is valid and empty rather than an error,
//! so nestings materialize lazily.

use crate::formula::{AttitudeFormula, AttitudeKind};
use crate::term::{negate, Proposition, Symbol, Term};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Default bound on belief-nesting depth.
pub const DEFAULT_MAX_DEPTH: usize = 5;

/// Which attitude space an environment holds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum AttitudeType {
    Belief,
    Goal,
    Intention,
}

impl AttitudeType {
    pub fn label(self) -> &'static str {
        match self {
            AttitudeType::Belief => "Belief",
            AttitudeType::Goal => "Goal",
            AttitudeType::Intention => "Intention",
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            AttitudeType::Belief => "believe",
            AttitudeType::Goal => "goal",
            AttitudeType::Intention => "intend",
        }
    }

    pub fn from_keyword(word: &str) -> Option<AttitudeType> {
        match word {
            "believe" => Some(AttitudeType::Belief),
            "goal" => Some(AttitudeType::Goal),
            "intend" => Some(AttitudeType::Intention),
            _ => None,
        }
    }
}

impl From<AttitudeKind> for AttitudeType {
    fn from(kind: AttitudeKind) -> AttitudeType {
        match kind {
            AttitudeKind::Believe => AttitudeType::Belief,
            AttitudeKind::Goal => AttitudeType::Goal,
            AttitudeKind::Intend => AttitudeType::Intention,
        }
    }
}

/// One nesting hop: entering `agent`'s attitude space of the given type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hop {
    pub agent: Symbol,
    pub space: AttitudeType,
}

/// A path of nesting hops addressing one environment context. The empty
/// viewpoint is the store owner's own level. Only belief spaces nest, so
/// every non-final hop must be a Belief hop; operations that pair a
/// viewpoint with a separate attitude argument require a pure belief chain.
#[derive(
    Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Viewpoint {
    hops: Vec<Hop>,
}

impl Viewpoint {
    /// The store owner's own top-level environment.
    pub fn root() -> Viewpoint {
        Viewpoint::default()
    }

    /// A chain of belief hops through the given agents.
    pub fn beliefs<I, S>(agents: I) -> Viewpoint
    where
        I: IntoIterator<Item = S>,
        S: Into<Symbol>,
    {
        Viewpoint {
            hops: agents
                .into_iter()
                .map(|a| Hop { agent: a.into(), space: AttitudeType::Belief })
                .collect(),
        }
    }

    /// Extends the viewpoint with a hop. Fails when the current final hop is
    /// not a belief space (goals and intentions are leaves).
    pub fn push(&self, agent: impl Into<Symbol>, space: AttitudeType) -> Result<Viewpoint, StoreError> {
        if let Some(last) = self.hops.last() {
            if last.space != AttitudeType::Belief {
                return Err(StoreError::InvalidViewpoint {
                    viewpoint: self.clone(),
                    reason: "only belief spaces nest further viewpoints".into(),
                });
            }
        }
        let mut hops = self.hops.clone();
        hops.push(Hop { agent: agent.into(), space });
        Ok(Viewpoint { hops })
    }

    pub fn child(&self, agent: impl Into<Symbol>) -> Viewpoint {
        let mut hops = self.hops.clone();
        hops.push(Hop { agent: agent.into(), space: AttitudeType::Belief });
        Viewpoint { hops }
    }

    /// The parent context (one hop shallower), or `None` at the root.
    pub fn parent(&self) -> Option<Viewpoint> {
        if self.hops.is_empty() {
            return None;
        }
        Some(Viewpoint { hops: self.hops[..self.hops.len() - 1].to_vec() })
    }

    pub fn prefix(&self, len: usize) -> Viewpoint {
        Viewpoint { hops: self.hops[..len].to_vec() }
    }

    pub fn depth(&self) -> usize {
        self.hops.len()
    }

    pub fn is_root(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }

    /// Agent holding the environment this viewpoint addresses: the innermost
    /// hop's agent, or the store owner at the root (hence `None` here).
    pub fn innermost_agent(&self) -> Option<&Symbol> {
        self.hops.last().map(|h| &h.agent)
    }

    /// True when every hop is a belief hop.
    pub fn is_belief_chain(&self) -> bool {
        self.hops.iter().all(|h| h.space == AttitudeType::Belief)
    }

    /// The agent chain of a pure belief viewpoint.
    pub fn agents(&self) -> Vec<Symbol> {
        self.hops.iter().map(|h| h.agent.clone()).collect()
    }

    pub fn starts_with(&self, prefix: &Viewpoint) -> bool {
        self.hops.len() >= prefix.hops.len() && self.hops[..prefix.hops.len()] == prefix.hops[..]
    }
}

impl fmt::Display for Viewpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hops.is_empty() {
            return write!(f, "<root>");
        }
        for (i, hop) in self.hops.iter().enumerate() {
            if i > 0 {
                write!(f, " > ")?;
            }
            write!(f, "{}", hop.agent)?;
            if hop.space != AttitudeType::Belief {
                write!(f, "[{}]", hop.space.label())?;
            }
        }
        Ok(())
    }
}

/// One environment entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Entry {
    /// A ground proposition (belief and goal spaces).
    Fact(Proposition),
    /// A nested attitude formula (goal spaces only: a goal *about* another
    /// agent's attitudes, kept as a value since nothing nests under a goal).
    Formula(AttitudeFormula),
    /// A ground action instance (intention spaces).
    Action(Term),
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Fact(p) => write!(f, "{p}"),
            Entry::Formula(af) => write!(f, "{af}"),
            Entry::Action(t) => write!(f, "{t}"),
        }
    }
}

/// A box of attitudes held by one agent under one attitude type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub entries: BTreeSet<Entry>,
    /// Inert grouping label shown at the top-left of rendered boxes.
    pub topic: Option<Symbol>,
}

impl Environment {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.topic.is_none()
    }
}

/// Result of a pure lookup: present, contradicted, or simply not recorded.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum TriState {
    Holds,
    Contrary,
    Unknown,
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TriState::Holds => "holds",
            TriState::Contrary => "contrary",
            TriState::Unknown => "unknown",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("consistency violation at {viewpoint} [{space}]: {entry} contradicts stored {evidence}")]
    Consistency { viewpoint: Viewpoint, space: &'static str, entry: String, evidence: String },
    #[error("nesting depth {depth} exceeds the configured maximum {max}")]
    Depth { depth: usize, max: usize },
    #[error("invalid viewpoint {viewpoint}: {reason}")]
    InvalidViewpoint { viewpoint: Viewpoint, reason: String },
    #[error("entry must be ground: {entry}")]
    NotGround { entry: String },
    #[error("{space} space cannot hold {entry}")]
    WrongEntryKind { space: &'static str, entry: String },
}

/// Storage address: a belief chain plus the attitude space at its end.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
struct Address {
    chain: Vec<Symbol>,
    space: AttitudeType,
}

/// A member of a stereotype bundle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StereotypeMember {
    pub space: AttitudeType,
    pub prop: Proposition,
}

/// The complete attitude state of one agent (the store owner), including
/// the environments it attributes to other agents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefStore {
    owner: Symbol,
    max_depth: usize,
    #[serde(with = "env_map_as_pairs")]
    environments: BTreeMap<Address, Environment>,
    stereotypes: BTreeMap<Symbol, Vec<StereotypeMember>>,
}

/// JSON cannot key objects by structs; the environment map travels as a
/// pair list.
mod env_map_as_pairs {
    use super::{Address, Environment};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Address, Environment>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(&Address, &Environment)> = map.iter().collect();
        pairs.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<Address, Environment>, D::Error> {
        let pairs: Vec<(Address, Environment)> = Vec::deserialize(de)?;
        Ok(pairs.into_iter().collect())
    }
}

impl BeliefStore {
    pub fn new(owner: impl Into<Symbol>) -> BeliefStore {
        BeliefStore {
            owner: owner.into(),
            max_depth: DEFAULT_MAX_DEPTH,
            environments: BTreeMap::new(),
            stereotypes: BTreeMap::new(),
        }
    }

    pub fn with_max_depth(owner: impl Into<Symbol>, max_depth: usize) -> BeliefStore {
        let mut s = BeliefStore::new(owner);
        s.max_depth = max_depth;
        s
    }

    pub fn owner(&self) -> &Symbol {
        &self.owner
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn with_depth_limit(&self, max_depth: usize) -> BeliefStore {
        let mut next = self.clone();
        next.max_depth = max_depth;
        next
    }

    /// Agent whose perspective `v` addresses: innermost hop agent, or the
    /// store owner at the root.
    pub fn holder_at<'a>(&'a self, v: &'a Viewpoint) -> &'a Symbol {
        v.innermost_agent().unwrap_or(&self.owner)
    }

    fn address(&self, v: &Viewpoint, at: AttitudeType) -> Result<Address, StoreError> {
        if !v.is_belief_chain() {
            return Err(StoreError::InvalidViewpoint {
                viewpoint: v.clone(),
                reason: "goal/intention hops cannot be nested through".into(),
            });
        }
        if v.depth() > self.max_depth {
            return Err(StoreError::Depth { depth: v.depth(), max: self.max_depth });
        }
        Ok(Address { chain: v.agents(), space: at })
    }

    fn env(&self, addr: &Address) -> Option<&Environment> {
        self.environments.get(addr)
    }

    /// All non-empty environment addresses, as (viewpoint, space) pairs in
    /// deterministic order.
    pub fn addresses(&self) -> Vec<(Viewpoint, AttitudeType)> {
        self.environments
            .iter()
            .filter(|(_, env)| !env.is_empty())
            .map(|(a, _)| (Viewpoint::beliefs(a.chain.iter().cloned()), a.space))
            .collect()
    }

    /// Entries of the environment at (v, at); empty slice view when the
    /// environment was never materialized.
    pub fn entries(&self, v: &Viewpoint, at: AttitudeType) -> Vec<Entry> {
        match self.address(v, at).ok().and_then(|a| self.env(&a)) {
            Some(env) => env.entries.iter().cloned().collect(),
            None => Vec::new(),
        }
    }

    pub fn topic(&self, v: &Viewpoint, at: AttitudeType) -> Option<Symbol> {
        self.address(v, at).ok().and_then(|a| self.env(&a)).and_then(|e| e.topic.clone())
    }

    pub fn set_topic(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        topic: Option<Symbol>,
    ) -> Result<BeliefStore, StoreError> {
        let addr = self.address(v, at)?;
        let mut next = self.clone();
        next.environments.entry(addr).or_default().topic = topic;
        Ok(next)
    }

    fn check_entry_kind(at: AttitudeType, entry: &Entry) -> Result<(), StoreError> {
        let ok = matches!(
            (at, entry),
            (AttitudeType::Belief, Entry::Fact(_))
                | (AttitudeType::Goal, Entry::Fact(_) | Entry::Formula(_))
                | (AttitudeType::Intention, Entry::Action(_))
        );
        if ok {
            Ok(())
        } else {
            Err(StoreError::WrongEntryKind { space: at.label(), entry: entry.to_string() })
        }
    }

    fn check_ground(entry: &Entry) -> Result<(), StoreError> {
        let ground = match entry {
            Entry::Fact(p) => p.is_ground(),
            Entry::Formula(f) => f.is_ground(),
            Entry::Action(t) => t.is_ground(),
        };
        if ground {
            Ok(())
        } else {
            Err(StoreError::NotGround { entry: entry.to_string() })
        }
    }

    /// Adds an entry at (v, at). Idempotent on repeats; contradicting a
    /// stored fact is an error so misconceptions stay visible instead of
    /// being silently overwritten.
    pub fn assert_entry(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        entry: Entry,
    ) -> Result<BeliefStore, StoreError> {
        let addr = self.address(v, at)?;
        Self::check_entry_kind(at, &entry)?;
        Self::check_ground(&entry)?;
        if let Entry::Fact(p) = &entry {
            let contrary = Entry::Fact(negate(p));
            if self.env(&addr).is_some_and(|e| e.entries.contains(&contrary)) {
                return Err(StoreError::Consistency {
                    viewpoint: v.clone(),
                    space: at.label(),
                    entry: entry.to_string(),
                    evidence: contrary.to_string(),
                });
            }
        }
        if self.env(&addr).is_some_and(|e| e.entries.contains(&entry)) {
            return Ok(self.clone());
        }
        let mut next = self.clone();
        next.environments.entry(addr).or_default().entries.insert(entry);
        Ok(next)
    }

    /// Removes an entry; removing an absent entry is a no-op.
    pub fn retract_entry(&self, v: &Viewpoint, at: AttitudeType, entry: &Entry) -> BeliefStore {
        let Ok(addr) = self.address(v, at) else {
            return self.clone();
        };
        if !self.env(&addr).is_some_and(|e| e.entries.contains(entry)) {
            return self.clone();
        }
        let mut next = self.clone();
        if let Some(env) = next.environments.get_mut(&addr) {
            env.entries.remove(entry);
            if env.is_empty() {
                next.environments.remove(&addr);
            }
        }
        next
    }

    /// Asserts a ground proposition attitude. Belief/Goal spaces take
    /// propositions; for Intention the positive body is stored as an action.
    pub fn assert_attitude(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        p: &Proposition,
    ) -> Result<BeliefStore, StoreError> {
        let entry = match at {
            AttitudeType::Intention => {
                if !p.is_positive() {
                    return Err(StoreError::WrongEntryKind {
                        space: at.label(),
                        entry: p.to_string(),
                    });
                }
                Entry::Action(p.body().clone())
            }
            _ => Entry::Fact(p.clone()),
        };
        self.assert_entry(v, at, entry)
    }

    pub fn retract_attitude(&self, v: &Viewpoint, at: AttitudeType, p: &Proposition) -> BeliefStore {
        let entry = match at {
            AttitudeType::Intention => Entry::Action(p.body().clone()),
            _ => Entry::Fact(p.clone()),
        };
        self.retract_entry(v, at, &entry)
    }

    /// Pure lookup of a ground proposition at (v, at). Performs no
    /// ascription; see the ascription module for the ascending variant.
    pub fn holds(&self, v: &Viewpoint, at: AttitudeType, p: &Proposition) -> TriState {
        let Ok(addr) = self.address(v, at) else {
            return TriState::Unknown;
        };
        let Some(env) = self.env(&addr) else {
            return TriState::Unknown;
        };
        match at {
            AttitudeType::Intention => {
                if p.is_positive() && env.entries.contains(&Entry::Action(p.body().clone())) {
                    TriState::Holds
                } else {
                    TriState::Unknown
                }
            }
            _ => {
                if env.entries.contains(&Entry::Fact(p.clone())) {
                    TriState::Holds
                } else if env.entries.contains(&Entry::Fact(negate(p))) {
                    TriState::Contrary
                } else {
                    TriState::Unknown
                }
            }
        }
    }

    /// Asserts an attitude formula at (v, at), decomposing nested attitudes
    /// into deeper environments: `believe(a, F)` in a belief space recurses
    /// into `a`'s viewpoint, `goal(a, F)`/`intend(a, F)` land in `a`'s leaf
    /// spaces, and in the leaf spaces themselves formulas are stored as
    /// values. Returns the new store plus the leaf writes performed.
    pub fn assert_formula(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        formula: &AttitudeFormula,
    ) -> Result<(BeliefStore, Vec<LeafWrite>), StoreError> {
        let mut writes = Vec::new();
        let store = self.assert_formula_inner(v, at, formula, &mut writes)?;
        Ok((store, writes))
    }

    fn assert_formula_inner(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        formula: &AttitudeFormula,
        writes: &mut Vec<LeafWrite>,
    ) -> Result<BeliefStore, StoreError> {
        let target = self.resolve_formula(v, at, formula)?;
        let store = self.assert_entry(&target.viewpoint, target.space, target.entry.clone())?;
        writes.push(target);
        Ok(store)
    }

    /// Retracts whatever `assert_formula` would have written.
    pub fn retract_formula(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        formula: &AttitudeFormula,
    ) -> Result<BeliefStore, StoreError> {
        let target = self.resolve_formula(v, at, formula)?;
        Ok(self.retract_entry(&target.viewpoint, target.space, &target.entry))
    }

    /// Evaluates an attitude formula at (v, at) by the same decomposition as
    /// `assert_formula`, ending in a pure lookup.
    pub fn query_formula(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        formula: &AttitudeFormula,
    ) -> TriState {
        match self.resolve_formula(v, at, formula) {
            Ok(target) => match &target.entry {
                Entry::Fact(p) => self.holds(&target.viewpoint, target.space, p),
                Entry::Action(t) => {
                    self.holds(&target.viewpoint, target.space, &Proposition::positive(t.clone()))
                }
                Entry::Formula(_) => {
                    let present = self
                        .address(&target.viewpoint, target.space)
                        .ok()
                        .and_then(|a| self.env(&a))
                        .is_some_and(|e| e.entries.contains(&target.entry));
                    if present {
                        TriState::Holds
                    } else {
                        TriState::Unknown
                    }
                }
            },
            Err(_) => TriState::Unknown,
        }
    }

    /// Maps (v, at, formula) to the leaf environment and entry it denotes.
    pub(crate) fn resolve_formula(
        &self,
        v: &Viewpoint,
        at: AttitudeType,
        formula: &AttitudeFormula,
    ) -> Result<LeafWrite, StoreError> {
        if !formula.is_ground() {
            return Err(StoreError::NotGround { entry: formula.to_string() });
        }
        match at {
            AttitudeType::Belief => match formula {
                AttitudeFormula::Fact(p) => Ok(LeafWrite {
                    viewpoint: v.clone(),
                    space: at,
                    entry: Entry::Fact(p.clone()),
                }),
                AttitudeFormula::Att { kind, agent, body } => {
                    let Term::Constant(agent) = agent else {
                        return Err(StoreError::NotGround { entry: formula.to_string() });
                    };
                    // An attitude of the agent already holding this level
                    // stays at this level (solipsist collapse); anyone else
                    // gets a nested environment.
                    let target = if agent == self.holder_at(v) {
                        v.clone()
                    } else {
                        let deeper = v.child(agent.clone());
                        if deeper.depth() > self.max_depth {
                            return Err(StoreError::Depth {
                                depth: deeper.depth(),
                                max: self.max_depth,
                            });
                        }
                        deeper
                    };
                    match kind {
                        AttitudeKind::Believe => {
                            self.resolve_formula(&target, AttitudeType::Belief, body)
                        }
                        AttitudeKind::Goal => self.resolve_leaf(target, AttitudeType::Goal, body),
                        AttitudeKind::Intend => {
                            self.resolve_leaf(target, AttitudeType::Intention, body)
                        }
                    }
                }
            },
            AttitudeType::Goal | AttitudeType::Intention => self.resolve_leaf(v.clone(), at, formula),
        }
    }

    fn resolve_leaf(
        &self,
        v: Viewpoint,
        at: AttitudeType,
        body: &AttitudeFormula,
    ) -> Result<LeafWrite, StoreError> {
        let entry = match (at, body) {
            (AttitudeType::Goal, AttitudeFormula::Fact(p)) => Entry::Fact(p.clone()),
            (AttitudeType::Goal, f @ AttitudeFormula::Att { .. }) => Entry::Formula(f.clone()),
            (AttitudeType::Intention, AttitudeFormula::Fact(p)) if p.is_positive() => {
                Entry::Action(p.body().clone())
            }
            (at, f) => {
                return Err(StoreError::WrongEntryKind { space: at.label(), entry: f.to_string() })
            }
        };
        Ok(LeafWrite { viewpoint: v, space: at, entry })
    }

    pub fn stereotypes(&self) -> &BTreeMap<Symbol, Vec<StereotypeMember>> {
        &self.stereotypes
    }

    /// Defines (or replaces) a stereotype bundle.
    pub fn define_stereotype(
        &self,
        name: impl Into<Symbol>,
        members: Vec<StereotypeMember>,
    ) -> Result<BeliefStore, StoreError> {
        for m in &members {
            if !m.prop.is_ground() {
                return Err(StoreError::NotGround { entry: m.prop.to_string() });
            }
            if m.space == AttitudeType::Intention {
                return Err(StoreError::WrongEntryKind {
                    space: m.space.label(),
                    entry: m.prop.to_string(),
                });
            }
        }
        let mut next = self.clone();
        next.stereotypes.insert(name.into(), members);
        Ok(next)
    }

    /// Marks `agent` trustworthy at `v` by asserting the belief
    /// `trustworthy(agent)`; trust is an ordinary belief so it can be
    /// ascribed, blocked and inspected like any other.
    pub fn mark_trustworthy(
        &self,
        v: &Viewpoint,
        agent: impl Into<Symbol>,
    ) -> Result<BeliefStore, StoreError> {
        self.assert_attitude(v, AttitudeType::Belief, &trustworthy_prop(agent))
    }

    pub fn trusts(&self, v: &Viewpoint, agent: impl Into<Symbol>) -> bool {
        self.holds(v, AttitudeType::Belief, &trustworthy_prop(agent)) == TriState::Holds
    }
}

pub fn trustworthy_prop(agent: impl Into<Symbol>) -> Proposition {
    Proposition::positive(Term::compound("trustworthy", vec![Term::constant(agent)]))
}

/// One concrete environment write produced by decomposing a formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeafWrite {
    pub viewpoint: Viewpoint,
    pub space: AttitudeType,
    pub entry: Entry,
}
