//! Shared test machinery: operator builders, the ground BFS oracle, the
//! random micro-domain generator at the heart of the planner equivalence
//! checks, and the systematicity assertion.

#![allow(dead_code)]

use beliefbox::plan::{search_exhaustive, Literal, Operator, Plan};
use beliefbox::term::{substitute, Bindings, Term};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn term(s: &str) -> Term {
    Term::parse(s).unwrap()
}

pub fn op(name: &str, params: &[&str], pre: &[&str], add: &[&str], del: &[&str]) -> Operator {
    Operator {
        name: name.into(),
        params: params.iter().map(|p| term(p)).collect(),
        preconditions: pre.iter().map(|p| Literal::from_term(term(p))).collect(),
        add: add.iter().map(|p| term(p)).collect(),
        del: del.iter().map(|p| term(p)).collect(),
        neq: vec![],
        mental: false,
    }
}

pub fn blocks_ops() -> Vec<Operator> {
    vec![
        op(
            "pickup",
            &["X"],
            &["clear(X)", "handempty"],
            &["holding(X)"],
            &["handempty", "clear(X)"],
        ),
        op(
            "puton",
            &["X", "Y"],
            &["holding(X)", "clear(Y)"],
            &["on(X,Y)", "handempty"],
            &["holding(X)", "clear(Y)"],
        ),
    ]
}

/// All ground instances of an operator over the constant universe,
/// honoring its disequality constraints.
pub fn ground_instances(operator: &Operator, constants: &[Term]) -> Vec<Operator> {
    let mut vars = Vec::new();
    for p in &operator.params {
        for v in p.variables() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    let mut out = Vec::new();
    let mut assignment = vec![0usize; vars.len()];
    loop {
        let mut b = Bindings::new();
        for (v, &ci) in vars.iter().zip(&assignment) {
            b.bind(v, &constants[ci]).unwrap();
        }
        let distinct_ok = operator
            .neq
            .iter()
            .all(|(x, y)| substitute(&b, x) != substitute(&b, y));
        if distinct_ok {
            out.push(Operator {
                name: operator.name.clone(),
                params: operator.params.iter().map(|p| substitute(&b, p)).collect(),
                preconditions: operator
                    .preconditions
                    .iter()
                    .map(|l| Literal { positive: l.positive, term: substitute(&b, &l.term) })
                    .collect(),
                add: operator.add.iter().map(|t| substitute(&b, t)).collect(),
                del: operator.del.iter().map(|t| substitute(&b, t)).collect(),
                neq: vec![],
                mental: false,
            });
        }
        if vars.is_empty() {
            return out;
        }
        let mut i = 0;
        loop {
            if i == assignment.len() {
                return out;
            }
            assignment[i] += 1;
            if assignment[i] < constants.len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn applicable(state: &BTreeSet<Term>, op: &Operator) -> bool {
    op.preconditions.iter().all(|l| {
        if l.positive {
            state.contains(&l.term)
        } else {
            !state.contains(&l.term)
        }
    })
}

fn apply(state: &BTreeSet<Term>, op: &Operator) -> BTreeSet<Term> {
    let mut next = state.clone();
    for d in &op.del {
        next.remove(d);
    }
    for a in &op.add {
        next.insert(a.clone());
    }
    next
}

/// Breadth-first search over ground action sequences: does any sequence of
/// length at most `depth` reach the goals?
pub fn bfs_solvable(
    initial: &BTreeSet<Term>,
    goals: &[Term],
    operators: &[Operator],
    constants: &[Term],
    depth: usize,
) -> bool {
    let ground: Vec<Operator> =
        operators.iter().flat_map(|o| ground_instances(o, constants)).collect();
    let satisfied = |state: &BTreeSet<Term>| goals.iter().all(|g| state.contains(g));
    let mut frontier = vec![initial.clone()];
    let mut seen: BTreeSet<BTreeSet<Term>> = frontier.iter().cloned().collect();
    for _ in 0..=depth {
        if frontier.iter().any(&satisfied) {
            return true;
        }
        let mut next = Vec::new();
        for state in &frontier {
            for g in &ground {
                if applicable(state, g) {
                    let s2 = apply(state, g);
                    if seen.insert(s2.clone()) {
                        next.push(s2);
                    }
                }
            }
        }
        frontier = next;
    }
    false
}

pub struct Domain {
    pub operators: Vec<Operator>,
    pub initial: Vec<Term>,
    pub goals: Vec<Term>,
    pub constants: Vec<Term>,
}

/// Small random STRIPS domain: up to 4 operators over up to 6 ground facts,
/// positive preconditions, roughly half the operators lifted over one
/// variable.
pub fn random_domain(rng: &mut ChaCha8Rng) -> Domain {
    let constants: Vec<Term> = ["a", "b", "c"].iter().map(|c| term(c)).collect();
    let n_facts = rng.gen_range(3..=6);
    let mut facts: Vec<Term> = Vec::new();
    while facts.len() < n_facts {
        let pred = format!("f{}", rng.gen_range(0..4));
        let arity = rng.gen_range(0..=2);
        let args: Vec<Term> =
            (0..arity).map(|_| constants[rng.gen_range(0..constants.len())].clone()).collect();
        let fact = if args.is_empty() { term(&pred) } else { Term::compound(pred, args) };
        if !facts.contains(&fact) {
            facts.push(fact);
        }
    }
    let n_ops = rng.gen_range(1..=4);
    let mut operators = Vec::new();
    for i in 0..n_ops {
        let pick = |rng: &mut ChaCha8Rng, facts: &[Term], n: usize| -> Vec<Term> {
            let mut out = Vec::new();
            for _ in 0..n {
                let f = facts[rng.gen_range(0..facts.len())].clone();
                if !out.contains(&f) {
                    out.push(f);
                }
            }
            out
        };
        let n_pre = rng.gen_range(0..=2);
        let pre = pick(rng, &facts, n_pre);
        let n_add = rng.gen_range(1..=2);
        let add = pick(rng, &facts, n_add);
        let n_del = rng.gen_range(0..=2);
        let del: Vec<Term> =
            pick(rng, &facts, n_del).into_iter().filter(|d| !add.contains(d)).collect();
        let mut o = Operator {
            name: format!("op{i}"),
            params: vec![],
            preconditions: pre.into_iter().map(Literal::pos).collect(),
            add,
            del,
            neq: vec![],
            mental: false,
        };
        if rng.gen_bool(0.5) {
            let c = constants[rng.gen_range(0..constants.len())].clone();
            let v = Term::variable("X");
            let lift = |t: &Term| lift_constant(t, &c, &v);
            let uses_c = o.preconditions.iter().any(|l| contains_const(&l.term, &c))
                || o.add.iter().any(|t| contains_const(t, &c))
                || o.del.iter().any(|t| contains_const(t, &c));
            if uses_c {
                o.preconditions = o
                    .preconditions
                    .iter()
                    .map(|l| Literal { positive: l.positive, term: lift(&l.term) })
                    .collect();
                o.add = o.add.iter().map(&lift).collect();
                o.del = o.del.iter().map(&lift).collect();
                o.params = vec![v];
            }
        }
        operators.push(o);
    }
    operators.sort_by(|a, b| a.name.cmp(&b.name));
    let initial: Vec<Term> = facts.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
    let mut goals: Vec<Term> = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let g = facts[rng.gen_range(0..facts.len())].clone();
        if !goals.contains(&g) {
            goals.push(g);
        }
    }
    Domain { operators, initial, goals, constants }
}

fn lift_constant(t: &Term, c: &Term, v: &Term) -> Term {
    if t == c {
        return v.clone();
    }
    match t {
        Term::Compound { functor, args } => Term::Compound {
            functor: functor.clone(),
            args: args.iter().map(|a| lift_constant(a, c, v)).collect(),
        },
        other => other.clone(),
    }
}

fn contains_const(t: &Term, c: &Term) -> bool {
    if t == c {
        return true;
    }
    match t {
        Term::Compound { args, .. } => args.iter().any(|a| contains_const(a, c)),
        _ => false,
    }
}

/// Exhaustively enumerates the search tree at a fixed bound and asserts no
/// two visited nodes denote the same plan. Returns the solution count.
pub fn assert_systematic(
    initial: &[Term],
    goals: &[Term],
    ops: &[Operator],
    bound: usize,
) -> usize {
    let root =
        Plan::root(initial.to_vec(), goals.iter().cloned().map(Literal::pos).collect());
    let report = search_exhaustive(root, ops, bound, 3_000_000).unwrap();
    let mut seen = BTreeSet::new();
    let mut duplicates = Vec::new();
    for key in &report.visited_keys {
        if !seen.insert(key.clone()) {
            duplicates.push(key.clone());
        }
    }
    assert!(
        duplicates.is_empty(),
        "{} duplicate nodes among {} visited; first: {}",
        duplicates.len(),
        report.visited_keys.len(),
        duplicates[0]
    );
    assert!(!report.solutions.is_empty(), "fixture should be solvable");
    report.solutions.len()
}

/// Name, initial facts, goals, operators and enumeration bound.
pub type Fixture = (&'static str, Vec<Term>, Vec<Term>, Vec<Operator>, usize);

/// The two systematicity fixtures.
pub fn systematicity_fixtures() -> Vec<Fixture> {
    vec![
        (
            "blocks",
            vec![term("clear(a)"), term("clear(b)"), term("handempty")],
            vec![term("on(a,b)")],
            blocks_ops(),
            3,
        ),
        (
            "interference",
            vec![],
            vec![term("p"), term("q")],
            vec![
                op("mk-both", &[], &[], &["p", "q"], &[]),
                op("mk-p", &[], &[], &["p"], &["q"]),
                op("mk-q", &[], &[], &["q"], &["p"]),
            ],
            3,
        ),
    ]
}
