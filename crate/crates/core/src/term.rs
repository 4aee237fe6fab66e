//! First-order terms, explicit-negation propositions, substitutions and
//! unification.
//!
//! The term language is deliberately small: constants, variables and
//! compound terms, no arithmetic and no clauses. Lowercase-initial symbols
//! are constants/functors, uppercase-initial symbols are variables, and
//! `not(...)` is the negation wrapper handled by [`Proposition`].

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Interned-enough symbol type. Plain strings keep values trivially
/// shareable across threads.
pub type Symbol = String;

/// Reserved functor used to spell negation in textual form.
pub const NOT_FUNCTOR: &str = "not";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },
    #[error("empty functor name")]
    EmptyFunctor,
}

/// A first-order term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Constant(Symbol),
    Variable(Symbol),
    Compound { functor: Symbol, args: Vec<Term> },
}

impl Term {
    pub fn constant(name: impl Into<Symbol>) -> Term {
        Term::Constant(name.into())
    }

    pub fn variable(name: impl Into<Symbol>) -> Term {
        Term::Variable(name.into())
    }

    pub fn compound(functor: impl Into<Symbol>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        debug_assert!(!functor.is_empty());
        Term::Compound { functor, args }
    }

    /// True when the term contains no variables.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Constant(_) => true,
            Term::Variable(_) => false,
            Term::Compound { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// Whether `var` occurs anywhere in this term.
    pub fn contains_var(&self, var: &str) -> bool {
        match self {
            Term::Constant(_) => false,
            Term::Variable(v) => v == var,
            Term::Compound { args, .. } => args.iter().any(|a| a.contains_var(var)),
        }
    }

    /// Collects variable names in first-occurrence order.
    pub fn variables(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<Symbol>) {
        match self {
            Term::Constant(_) => {}
            Term::Variable(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::Compound { args, .. } => {
                for a in args {
                    a.collect_variables(out);
                }
            }
        }
    }

    /// Parses the textual term syntax. Lowercase-initial symbols are
    /// constants/functors, uppercase-initial are variables.
    pub fn parse(text: &str) -> Result<Term, TermError> {
        let mut p = Parser::new(text);
        let t = p.term()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(p.err("end of input"));
        }
        Ok(t)
    }

    /// Parses a term off the front of `text`, returning it together with
    /// the number of bytes consumed.
    pub fn parse_prefix(text: &str) -> Result<(Term, usize), TermError> {
        let mut p = Parser::new(text);
        let t = p.term()?;
        Ok((t, p.pos))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(s) | Term::Variable(s) => write!(f, "{s}"),
            Term::Compound { functor, args } => {
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Polarity of a proposition: plain or explicitly negated.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Polarity {
    Positive,
    Negated,
}

/// An atom with explicit negation. Normalized so the body never carries an
/// outer `not` functor: `not(not(p))` collapses to positive `p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Proposition {
    polarity: Polarity,
    body: Term,
}

impl Proposition {
    /// Builds a proposition from a raw term, stripping any stack of outer
    /// `not(...)` wrappers into the polarity flag.
    pub fn from_term(term: Term) -> Proposition {
        let mut polarity = Polarity::Positive;
        let mut body = term;
        loop {
            match body {
                Term::Compound { ref functor, ref args }
                    if functor == NOT_FUNCTOR && args.len() == 1 =>
                {
                    polarity = match polarity {
                        Polarity::Positive => Polarity::Negated,
                        Polarity::Negated => Polarity::Positive,
                    };
                    let inner = args[0].clone();
                    body = inner;
                }
                _ => break,
            }
        }
        Proposition { polarity, body }
    }

    pub fn positive(body: Term) -> Proposition {
        Proposition::from_term(body)
    }

    pub fn parse(text: &str) -> Result<Proposition, TermError> {
        Ok(Proposition::from_term(Term::parse(text)?))
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }

    /// The atom under the polarity flag; never `not`-headed.
    pub fn body(&self) -> &Term {
        &self.body
    }

    pub fn is_ground(&self) -> bool {
        self.body.is_ground()
    }

    /// Renders back to a term, re-wrapping negated propositions in `not`.
    pub fn to_term(&self) -> Term {
        match self.polarity {
            Polarity::Positive => self.body.clone(),
            Polarity::Negated => Term::compound(NOT_FUNCTOR, vec![self.body.clone()]),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Flips a proposition's polarity. An involution.
pub fn negate(p: &Proposition) -> Proposition {
    Proposition {
        polarity: match p.polarity {
            Polarity::Positive => Polarity::Negated,
            Polarity::Negated => Polarity::Positive,
        },
        body: p.body.clone(),
    }
}

/// An idempotent substitution from variables to terms.
///
/// Invariants: no bound variable occurs in any right-hand side (so applying
/// the substitution twice equals applying it once), and the occurs-check
/// holds by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings {
    map: BTreeMap<Symbol, Term>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> {
        self.map.iter()
    }

    /// Binds `var` to `term`, keeping the substitution idempotent. Fails on
    /// an occurs-check violation. Binding a variable to itself is a no-op.
    pub fn bind(&mut self, var: &str, term: &Term) -> Result<(), BindFailure> {
        let resolved = substitute(self, term);
        if let Term::Variable(v) = &resolved {
            if v == var {
                return Ok(());
            }
        }
        if resolved.contains_var(var) {
            return Err(BindFailure::OccursCheck);
        }
        if let Some(existing) = self.map.get(var) {
            // Already bound: the new value must agree with the old one.
            let existing = existing.clone();
            return match unify(&existing, &resolved, self) {
                Some(b) => {
                    *self = b;
                    Ok(())
                }
                None => Err(BindFailure::Clash),
            };
        }
        // Keep right-hand sides fully resolved.
        let mut single = Bindings::new();
        single.map.insert(var.to_string(), resolved.clone());
        for value in self.map.values_mut() {
            *value = substitute(&single, value);
        }
        self.map.insert(var.to_string(), resolved);
        Ok(())
    }

    /// Builds normalized bindings from raw pairs, resolving chains such as
    /// `{X -> Y, Y -> a}` to `{X -> a, Y -> a}`.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Bindings, BindFailure>
    where
        I: IntoIterator<Item = (&'a str, Term)>,
    {
        let mut b = Bindings::new();
        for (var, term) in pairs {
            b.bind(var, &term)?;
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindFailure {
    OccursCheck,
    Clash,
}

/// Applies a substitution. Bound variables are replaced, unbound ones left
/// untouched; idempotent for normalized [`Bindings`].
pub fn substitute(bindings: &Bindings, term: &Term) -> Term {
    match term {
        Term::Constant(_) => term.clone(),
        Term::Variable(v) => match bindings.get(v) {
            Some(t) => t.clone(),
            None => term.clone(),
        },
        Term::Compound { functor, args } => Term::Compound {
            functor: functor.clone(),
            args: args.iter().map(|a| substitute(bindings, a)).collect(),
        },
    }
}

/// Applies a substitution to a proposition body, re-normalizing (a variable
/// body may resolve to a `not(...)` term).
pub fn substitute_prop(bindings: &Bindings, prop: &Proposition) -> Proposition {
    let body = substitute(bindings, prop.body());
    let inner = Proposition::from_term(body);
    match (prop.polarity(), inner.polarity()) {
        (Polarity::Positive, _) => inner,
        (Polarity::Negated, _) => negate(&inner),
    }
}

/// Most-general unifier of `a` and `b` extending `start`, or `None` when no
/// unifier exists (including occurs-check violations).
pub fn unify(a: &Term, b: &Term, start: &Bindings) -> Option<Bindings> {
    let mut out = start.clone();
    if unify_into(a, b, &mut out) {
        Some(out)
    } else {
        None
    }
}

fn unify_into(a: &Term, b: &Term, bindings: &mut Bindings) -> bool {
    let a = substitute(bindings, a);
    let b = substitute(bindings, b);
    match (&a, &b) {
        (Term::Constant(x), Term::Constant(y)) => x == y,
        (Term::Variable(x), Term::Variable(y)) if x == y => true,
        (Term::Variable(x), t) | (t, Term::Variable(x)) => bindings.bind(x, t).is_ok(),
        (
            Term::Compound { functor: f, args: xs },
            Term::Compound { functor: g, args: ys },
        ) => {
            if f != g || xs.len() != ys.len() {
                return false;
            }
            xs.iter().zip(ys).all(|(x, y)| unify_into(x, y, bindings))
        }
        _ => false,
    }
}

/// Unifies two propositions: polarities must agree and bodies must unify.
pub fn unify_props(a: &Proposition, b: &Proposition, start: &Bindings) -> Option<Bindings> {
    if a.polarity() != b.polarity() {
        return None;
    }
    unify(a.body(), b.body(), start)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        Parser { text, pos: 0 }
    }

    fn err(&self, expected: &str) -> TermError {
        TermError::Parse { offset: self.pos, expected: expected.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn symbol(&mut self) -> Result<Symbol, TermError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => self.pos += 1,
            _ => return Err(self.err("symbol")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn term(&mut self) -> Result<Term, TermError> {
        let name = self.symbol()?;
        let is_var = name.chars().next().is_some_and(|c| c.is_ascii_uppercase());
        self.skip_ws();
        if self.peek() == Some('(') {
            if is_var {
                return Err(self.err("constant functor (lowercase-initial)"));
            }
            self.pos += 1;
            let mut args = Vec::new();
            self.skip_ws();
            if self.peek() == Some(')') {
                return Err(self.err("at least one argument"));
            }
            loop {
                args.push(self.term()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("',' or ')'")),
                }
            }
            Ok(Term::Compound { functor: name, args })
        } else if is_var {
            Ok(Term::Variable(name))
        } else {
            Ok(Term::Constant(name))
        }
    }
}
