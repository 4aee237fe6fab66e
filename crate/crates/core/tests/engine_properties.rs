//! Randomized engine hygiene: local consistency under arbitrary operation
//! sequences, ascription monotonicity/idempotence/blocking soundness,
//! leaf-space protection of the on-demand ascent, store round-trips, and
//! run determinism.

use beliefbox::ascription::{
    ascribe_on_demand, default_ascribe, stereotype_ascribe, AscriptionResult,
};
use beliefbox::formula::AttitudeFormula;
use beliefbox::scenario::{load_store, run, save_store, RunConfig, ScenarioCommand};
use beliefbox::store::{
    AttitudeType, BeliefStore, Entry, StereotypeMember, TriState, Viewpoint,
};
use beliefbox::term::{negate, Proposition, Term};
use proptest::prelude::*;

const AGENTS: [&str; 4] = ["ann", "bob", "cyd", "dan"];

fn arb_agent() -> impl Strategy<Value = String> {
    prop_oneof![Just("ann"), Just("bob"), Just("cyd"), Just("dan")]
        .prop_map(|s: &str| s.to_string())
}

/// Ground atoms over a small pool.
fn arb_atom() -> impl Strategy<Value = Term> {
    (
        prop_oneof![Just("p"), Just("q"), Just("r")],
        prop::collection::vec(prop_oneof![Just("x"), Just("y"), Just("z")], 0..2),
    )
        .prop_map(|(pred, args)| {
            if args.is_empty() {
                Term::constant(pred)
            } else {
                Term::compound(pred, args.into_iter().map(Term::constant).collect())
            }
        })
}

fn arb_ground_prop() -> impl Strategy<Value = Proposition> {
    (arb_atom(), any::<bool>()).prop_map(|(t, neg)| {
        let p = Proposition::positive(t);
        if neg {
            negate(&p)
        } else {
            p
        }
    })
}

fn arb_viewpoint() -> impl Strategy<Value = Viewpoint> {
    prop::collection::vec(arb_agent(), 0..3).prop_map(Viewpoint::beliefs)
}

#[derive(Debug, Clone)]
enum StoreOp {
    Assert(Viewpoint, AttitudeType, Proposition),
    Retract(Viewpoint, AttitudeType, Proposition),
    Default(Viewpoint, String, Proposition),
    Stereotype(Viewpoint, String),
    OnDemand(Viewpoint, Proposition),
}

fn arb_space() -> impl Strategy<Value = AttitudeType> {
    prop_oneof![Just(AttitudeType::Belief), Just(AttitudeType::Goal)]
}

fn arb_op() -> impl Strategy<Value = StoreOp> {
    prop_oneof![
        (arb_viewpoint(), arb_space(), arb_ground_prop())
            .prop_map(|(v, at, p)| StoreOp::Assert(v, at, p)),
        (arb_viewpoint(), arb_space(), arb_ground_prop())
            .prop_map(|(v, at, p)| StoreOp::Retract(v, at, p)),
        (arb_viewpoint(), arb_agent(), arb_ground_prop())
            .prop_map(|(v, a, p)| StoreOp::Default(v, a, p)),
        (arb_viewpoint(), arb_agent()).prop_map(|(v, a)| StoreOp::Stereotype(v, a)),
        (arb_viewpoint(), arb_ground_prop()).prop_map(|(v, p)| StoreOp::OnDemand(v, p)),
    ]
}

/// Builds a store by applying operations, ignoring rejected ones (errors
/// are part of the contract: consistency violations are refused, not
/// absorbed).
fn apply_ops(ops: &[StoreOp]) -> BeliefStore {
    let mut store = BeliefStore::new("system")
        .define_stereotype(
            "doctor",
            vec![
                StereotypeMember {
                    space: AttitudeType::Belief,
                    prop: Proposition::parse("isa(pneumonia,bacteria)").unwrap(),
                },
                StereotypeMember {
                    space: AttitudeType::Goal,
                    prop: Proposition::parse("cured(patients)").unwrap(),
                },
            ],
        )
        .unwrap();
    for op in ops {
        match op {
            StoreOp::Assert(v, at, p) => {
                if let Ok(next) = store.assert_attitude(v, *at, p) {
                    store = next;
                }
            }
            StoreOp::Retract(v, at, p) => {
                store = store.retract_attitude(v, *at, p);
            }
            StoreOp::Default(v, a, p) => {
                if let Ok((next, _)) = default_ascribe(&store, v, a, p) {
                    store = next;
                }
            }
            StoreOp::Stereotype(v, a) => {
                if let Ok((next, _)) = stereotype_ascribe(&store, v, a) {
                    store = next;
                }
            }
            StoreOp::OnDemand(v, p) => {
                if let Ok((next, _, _)) = ascribe_on_demand(&store, v, AttitudeType::Belief, p) {
                    store = next;
                }
            }
        }
    }
    store
}

fn locally_consistent(store: &BeliefStore) -> bool {
    store.addresses().iter().all(|(v, at)| {
        let entries = store.entries(v, *at);
        entries.iter().all(|e| match e {
            Entry::Fact(p) => !entries.contains(&Entry::Fact(negate(p))),
            _ => true,
        })
    })
}

fn all_entries(store: &BeliefStore) -> Vec<(Viewpoint, AttitudeType, Entry)> {
    let mut out = Vec::new();
    for (v, at) in store.addresses() {
        for e in store.entries(&v, at) {
            out.push((v.clone(), at, e));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    /// Every store reachable through module operations is locally
    /// consistent at every viewpoint.
    #[test]
    fn reachable_stores_stay_locally_consistent(ops in prop::collection::vec(arb_op(), 0..25)) {
        let store = apply_ops(&ops);
        prop_assert!(locally_consistent(&store));
    }

    /// Assert and retract are exact inverses on previously absent entries.
    #[test]
    fn assert_retract_inverse(
        ops in prop::collection::vec(arb_op(), 0..10),
        v in arb_viewpoint(),
        at in arb_space(),
        p in arb_ground_prop(),
    ) {
        let store = apply_ops(&ops);
        if store.holds(&v, at, &p) == TriState::Unknown {
            if let Ok(with) = store.assert_attitude(&v, at, &p) {
                let without = with.retract_attitude(&v, at, &p);
                prop_assert_eq!(without, store);
            }
        }
    }

    /// Default ascription never removes or alters entries, repeats are
    /// no-ops, and blocking implies the store is untouched.
    #[test]
    fn default_ascription_laws(
        ops in prop::collection::vec(arb_op(), 0..15),
        v in arb_viewpoint(),
        target in arb_agent(),
        p in arb_ground_prop(),
    ) {
        let store = apply_ops(&ops);
        let before = all_entries(&store);
        if let Ok((after, outcome)) = default_ascribe(&store, &v, &target, &p) {
            // Monotone: everything present before is present after.
            let after_entries = all_entries(&after);
            for e in &before {
                prop_assert!(after_entries.contains(e));
            }
            match outcome.result {
                AscriptionResult::Blocked => {
                    prop_assert_eq!(&after, &store);
                    prop_assert!(outcome.blocking_evidence == Some(negate(&p)));
                }
                AscriptionResult::Ascribed => {
                    // Blocking soundness: no contrary evidence existed.
                    prop_assert!(
                        store.holds(&v.child(target.clone()), AttitudeType::Belief, &p)
                            != TriState::Contrary
                    );
                }
                AscriptionResult::AlreadyHeld => prop_assert_eq!(&after, &store),
            }
            // Idempotence: repeating yields AlreadyHeld or Blocked, never a
            // second write.
            if let Ok((again, second)) = default_ascribe(&after, &v, &target, &p) {
                prop_assert_eq!(&again, &after);
                prop_assert!(second.result != AscriptionResult::Ascribed
                    || outcome.result == AscriptionResult::Blocked);
            }
        }
    }

    /// Stereotype ascription is monotone and a second pass writes nothing
    /// new.
    #[test]
    fn stereotype_ascription_laws(
        ops in prop::collection::vec(arb_op(), 0..15),
        v in arb_viewpoint(),
        target in arb_agent(),
    ) {
        let store = apply_ops(&ops);
        let before = all_entries(&store);
        if let Ok((after, _)) = stereotype_ascribe(&store, &v, &target) {
            let entries = all_entries(&after);
            for e in &before {
                prop_assert!(entries.contains(e));
            }
            if let Ok((again, outcomes)) = stereotype_ascribe(&after, &v, &target) {
                prop_assert_eq!(again, after);
                prop_assert!(outcomes
                    .iter()
                    .all(|o| o.outcome.result != AscriptionResult::Ascribed));
            }
        }
    }

    /// The on-demand ascent touches only belief spaces: goal and intention
    /// environments are bit-identical before and after.
    #[test]
    fn on_demand_never_writes_leaf_spaces(
        ops in prop::collection::vec(arb_op(), 0..15),
        v in arb_viewpoint(),
        p in arb_ground_prop(),
    ) {
        let store = apply_ops(&ops);
        if let Ok((after, _, _)) = ascribe_on_demand(&store, &v, AttitudeType::Belief, &p) {
            let leaves = |s: &BeliefStore| {
                all_entries(s)
                    .into_iter()
                    .filter(|(_, at, _)| *at != AttitudeType::Belief)
                    .collect::<Vec<_>>()
            };
            prop_assert_eq!(leaves(&store), leaves(&after));
        }
        // Goal-space requests are refused outright.
        prop_assert!(ascribe_on_demand(&store, &v, AttitudeType::Goal, &p).is_err());
        prop_assert!(ascribe_on_demand(&store, &v, AttitudeType::Intention, &p).is_err());
    }

    /// Stores reachable through operations round-trip through the DSL.
    #[test]
    fn store_save_load_round_trip(ops in prop::collection::vec(arb_op(), 0..20)) {
        let store = apply_ops(&ops);
        let text = save_store(&store);
        let reloaded = load_store(&text).unwrap();
        prop_assert_eq!(&reloaded, &store);
        // Deterministic save: the reloaded store prints identically.
        prop_assert_eq!(save_store(&reloaded), text);
    }
}

// --- Run determinism -------------------------------------------------------

fn arb_formula() -> impl Strategy<Value = AttitudeFormula> {
    let fact = arb_ground_prop().prop_map(AttitudeFormula::Fact);
    fact.prop_recursive(2, 8, 1, |inner| {
        (
            prop_oneof![
                Just(beliefbox::formula::AttitudeKind::Believe),
                Just(beliefbox::formula::AttitudeKind::Goal),
            ],
            arb_agent(),
            inner,
        )
            .prop_map(|(kind, agent, body)| {
                AttitudeFormula::att(kind, Term::constant(agent), body)
            })
    })
}

fn arb_path() -> impl Strategy<Value = beliefbox::scenario::Path> {
    (arb_agent(), prop::collection::vec(arb_agent(), 0..2))
        .prop_map(|(owner, hops)| beliefbox::scenario::Path { owner, hops })
}

fn arb_command() -> impl Strategy<Value = ScenarioCommand> {
    prop_oneof![
        (arb_path(), arb_space(), arb_formula())
            .prop_map(|(path, at, formula)| ScenarioCommand::Assert { path, at, formula }),
        (arb_path(), arb_agent())
            .prop_map(|(path, agent)| ScenarioCommand::Trust { path, agent }),
        (arb_path(), arb_agent())
            .prop_map(|(path, target)| ScenarioCommand::AscribeStereotypes { path, target }),
        (arb_path(), arb_agent(), arb_ground_prop())
            .prop_map(|(path, target, prop)| ScenarioCommand::AscribeDefault { path, target, prop }),
        (arb_path(), arb_ground_prop())
            .prop_map(|(path, prop)| ScenarioCommand::AscribeOnDemand { path, prop }),
        (arb_path(), arb_space(), arb_formula(), prop_oneof![
            Just(TriState::Holds), Just(TriState::Contrary), Just(TriState::Unknown)
        ])
            .prop_map(|(path, at, formula, expected)| ScenarioCommand::Expect {
                path, at, formula, expected
            }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    /// Running the same command list twice produces byte-identical traces
    /// and equal stores; commands also survive their own line syntax.
    #[test]
    fn runs_are_deterministic_and_lines_round_trip(
        tail in prop::collection::vec(arb_command(), 0..12),
    ) {
        let mut commands: Vec<ScenarioCommand> = AGENTS
            .iter()
            .map(|a| ScenarioCommand::DeclareAgent { name: a.to_string() })
            .collect();
        commands.extend(tail);

        // Line round-trip: printing then parsing is the identity.
        let text: String =
            commands.iter().map(|c| format!("{c}\n")).collect();
        let reparsed = beliefbox::scenario::parse_scenario(&text).unwrap();
        prop_assert_eq!(&reparsed, &commands);

        let config = RunConfig::default();
        let first = run(&commands, &config);
        let second = run(&commands, &config);
        prop_assert_eq!(first.trace.to_json_pretty(), second.trace.to_json_pretty());
        prop_assert_eq!(first.stores, second.stores);
        prop_assert_eq!(first.exit, second.exit);
    }
}
