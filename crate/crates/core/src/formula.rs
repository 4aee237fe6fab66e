//! Attitude formulas: propositions wrapped in `believe`/`goal`/`intend`
//! layers.
//!
//! Attitudes are meta-level constructors, not object-language functors: the
//! textual forms `believe(X, F)`, `goal(X, F)` and `intend(X, F)` parse into
//! [`AttitudeFormula`] values, and everything else stays a plain
//! proposition. Schema conditions leave agents and content as variables
//! (`believe(Speaker, Proposition)`); instantiation is ordinary
//! substitution.

use crate::term::{
    substitute, substitute_prop, Bindings, Proposition, Symbol, Term, TermError,
};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The three attitude spaces an agent can hold.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum AttitudeKind {
    Believe,
    Goal,
    Intend,
}

impl AttitudeKind {
    pub fn functor(self) -> &'static str {
        match self {
            AttitudeKind::Believe => "believe",
            AttitudeKind::Goal => "goal",
            AttitudeKind::Intend => "intend",
        }
    }

    pub fn from_functor(name: &str) -> Option<AttitudeKind> {
        match name {
            "believe" => Some(AttitudeKind::Believe),
            "goal" => Some(AttitudeKind::Goal),
            "intend" => Some(AttitudeKind::Intend),
            _ => None,
        }
    }
}

/// A proposition or a nested attitude about one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttitudeFormula {
    Fact(Proposition),
    Att {
        kind: AttitudeKind,
        /// Constant agent symbol, or a variable in schema conditions.
        agent: Term,
        body: Box<AttitudeFormula>,
    },
}

impl AttitudeFormula {
    pub fn fact(p: Proposition) -> AttitudeFormula {
        AttitudeFormula::Fact(p)
    }

    pub fn att(kind: AttitudeKind, agent: Term, body: AttitudeFormula) -> AttitudeFormula {
        AttitudeFormula::Att { kind, agent, body: Box::new(body) }
    }

    pub fn believe(agent: impl Into<Symbol>, body: AttitudeFormula) -> AttitudeFormula {
        AttitudeFormula::att(AttitudeKind::Believe, Term::constant(agent), body)
    }

    pub fn goal(agent: impl Into<Symbol>, body: AttitudeFormula) -> AttitudeFormula {
        AttitudeFormula::att(AttitudeKind::Goal, Term::constant(agent), body)
    }

    /// Number of attitude wrappers around the innermost proposition.
    pub fn depth(&self) -> usize {
        match self {
            AttitudeFormula::Fact(_) => 0,
            AttitudeFormula::Att { body, .. } => 1 + body.depth(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            AttitudeFormula::Fact(p) => p.is_ground(),
            AttitudeFormula::Att { agent, body, .. } => {
                matches!(agent, Term::Constant(_)) && body.is_ground()
            }
        }
    }

    /// Reads a formula out of a term: `believe/goal/intend` with exactly two
    /// arguments become attitude layers, anything else is a fact.
    pub fn from_term(term: Term) -> AttitudeFormula {
        if let Term::Compound { functor, args } = &term {
            if args.len() == 2 {
                if let Some(kind) = AttitudeKind::from_functor(functor) {
                    let agent = args[0].clone();
                    let body = AttitudeFormula::from_term(args[1].clone());
                    return AttitudeFormula::Att { kind, agent, body: Box::new(body) };
                }
            }
        }
        AttitudeFormula::Fact(Proposition::from_term(term))
    }

    pub fn parse(text: &str) -> Result<AttitudeFormula, TermError> {
        Ok(AttitudeFormula::from_term(Term::parse(text)?))
    }

    /// Flattens back into a term with reserved attitude functors. Inverse of
    /// [`AttitudeFormula::from_term`] on well-formed input.
    pub fn to_term(&self) -> Term {
        match self {
            AttitudeFormula::Fact(p) => p.to_term(),
            AttitudeFormula::Att { kind, agent, body } => {
                Term::compound(kind.functor(), vec![agent.clone(), body.to_term()])
            }
        }
    }

    /// Applies bindings to agent slots and the innermost proposition.
    pub fn instantiate(&self, bindings: &Bindings) -> AttitudeFormula {
        match self {
            AttitudeFormula::Fact(p) => AttitudeFormula::Fact(substitute_prop(bindings, p)),
            AttitudeFormula::Att { kind, agent, body } => AttitudeFormula::Att {
                kind: *kind,
                agent: substitute(bindings, agent),
                body: Box::new(body.instantiate(bindings)),
            },
        }
    }
}

impl fmt::Display for AttitudeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}
