//! Property tests for the store, matcher, and engine invariants, plus a
//! replay check against a reference set implementation.

use std::collections::BTreeSet;

use proptest::prelude::*;

use cwp::fixture;
use cwp::pattern::{match_pattern, Binding, Clock};
use cwp::rules::{check_constraints, run_to_fixpoint, DEFAULT_MAX_ITERATIONS};
use cwp::scenario::simulate;
use cwp::schema::{materialized, translate};
use cwp::syntax::parse_triples;
use cwp::{DateTime, Diagnostics, GraphPattern, Name, Term, Triple, TripleStore};

fn clock() -> Clock {
    Clock::new(DateTime::parse("2016-06-01T00:00:00").unwrap())
}

fn arb_object() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..6u8).prop_map(|i| Term::name(format!("x:n{}", i))),
        any::<i64>().prop_map(Term::int),
        "[a-c]{0,3}".prop_map(Term::str),
        any::<bool>().prop_map(Term::bool),
        (0..240u16).prop_map(|h| {
            Term::datetime(DateTime::parse("2016-01-01T00:00:00").unwrap().plus_days(h as i64))
        }),
    ]
}

fn arb_triple() -> impl Strategy<Value = Triple> {
    ((0..6u8), (0..4u8), arb_object()).prop_map(|(s, p, o)| {
        Triple::new(
            Term::name(format!("x:s{}", s)),
            Term::name(format!("x:p{}", p)),
            o,
        )
    })
}

fn arb_store() -> impl Strategy<Value = TripleStore> {
    prop::collection::vec(arb_triple(), 0..25).prop_map(|ts| ts.into_iter().collect())
}

proptest! {
    /// Serialization is canonical: parsing its output reproduces the
    /// store exactly, and serializing again is a fixed point.
    #[test]
    fn serialize_round_trips(store in arb_store()) {
        let text = store.serialize();
        let parsed = parse_triples(&text).unwrap();
        prop_assert_eq!(&parsed, &store);
        prop_assert_eq!(parsed.serialize(), text);
    }

    /// Digests depend on content only: any permutation of the same
    /// triples digests identically, and removing one triple does not.
    #[test]
    fn digest_tracks_content(store in arb_store(), seed in any::<u64>()) {
        let mut triples: Vec<Triple> = store.iter().cloned().collect();
        // Cheap deterministic shuffle.
        let n = triples.len();
        if n > 1 {
            for i in 0..n {
                let j = (seed as usize + i * 7) % n;
                triples.swap(i, j);
            }
        }
        let reordered: TripleStore = triples.into_iter().collect();
        prop_assert_eq!(store.digest(), reordered.digest());
        if let Some(first) = store.iter().next().cloned() {
            let mut smaller = store.clone();
            smaller.remove(&first);
            prop_assert_ne!(store.digest(), smaller.digest());
        }
    }

    /// Adding a previously absent triple and removing it restores the
    /// original store.
    #[test]
    fn add_then_remove_restores(store in arb_store(), t in arb_triple()) {
        prop_assume!(!store.contains(&t));
        let mut mutated = store.clone();
        prop_assert!(mutated.add(t.clone()).unwrap());
        prop_assert!(mutated.remove(&t));
        prop_assert_eq!(mutated, store);
    }

    /// The store agrees with a plain BTreeSet under any add/remove
    /// sequence, and its revision counts exactly the effective changes.
    #[test]
    fn replay_against_reference_set(ops in prop::collection::vec((any::<bool>(), arb_triple()), 0..60)) {
        let mut store = TripleStore::new();
        let mut reference: BTreeSet<Triple> = BTreeSet::new();
        let mut changes = 0u64;
        for (insert, t) in ops {
            if insert {
                let changed = store.add(t.clone()).unwrap();
                prop_assert_eq!(changed, reference.insert(t));
                if changed { changes += 1; }
            } else {
                let changed = store.remove(&t);
                prop_assert_eq!(changed, reference.remove(&t));
                if changed { changes += 1; }
            }
        }
        prop_assert_eq!(store.len(), reference.len());
        prop_assert_eq!(store.revision(), changes);
        let from_reference: TripleStore = reference.into_iter().collect();
        prop_assert_eq!(store, from_reference);
    }

    /// An empty pattern matches exactly the seed binding.
    #[test]
    fn empty_pattern_returns_seed(store in arb_store()) {
        let seed = Binding::singleton("this", Term::name("x:s0"));
        let mut diags = Diagnostics::new();
        let got = match_pattern(&store, &GraphPattern::default(), &seed, &clock(), &mut diags).unwrap();
        prop_assert_eq!(got, vec![seed]);
    }

    /// Filter- and group-free patterns are monotone: adding triples
    /// never removes a match.
    #[test]
    fn bgp_matching_is_monotone(store in arb_store(), extra in prop::collection::vec(arb_triple(), 0..8)) {
        let pattern = GraphPattern {
            atoms: vec![
                Triple::new(Term::var("s"), Term::name("x:p0"), Term::var("o")),
                Triple::new(Term::var("s"), Term::name("x:p1"), Term::var("o2")),
            ],
            ..Default::default()
        };
        let mut diags = Diagnostics::new();
        let before = match_pattern(&store, &pattern, &Binding::new(), &clock(), &mut diags).unwrap();
        let mut larger = store.clone();
        for t in extra {
            larger.add(t).unwrap();
        }
        let after = match_pattern(&larger, &pattern, &Binding::new(), &clock(), &mut diags).unwrap();
        let after_set: BTreeSet<Binding> = after.into_iter().collect();
        for b in before {
            prop_assert!(after_set.contains(&b));
        }
    }
}

fn lab_population(n: u8) -> TripleStore {
    let mut store = TripleStore::new();
    for i in 0..n {
        let order = Term::name(format!("casemanager:o{}", i));
        let t = Term::name(format!("casemanager:t{}", i));
        for triple in [
            Triple::new(order.clone(), Term::name("a"), Term::name("casemanager:LabTest")),
            Triple::new(order.clone(), Term::name("a"), Term::name("casemanager:Order")),
            Triple::new(order.clone(), Term::name("casemanager:state"), Term::str("Initial")),
            Triple::new(
                order.clone(),
                Term::name("casemanager:dateAdded"),
                Term::datetime(DateTime::parse("2016-01-05T09:00:00").unwrap()),
            ),
            Triple::new(
                order.clone(),
                Term::name("casemanager:dateExpected"),
                Term::datetime(DateTime::parse("2016-02-05T09:00:00").unwrap()),
            ),
            Triple::new(order.clone(), Term::name("casemanager:approvedBy"), Term::str("Dr. Moss")),
            Triple::new(order.clone(), Term::name("casemanager:needsAppointment"), Term::bool(false)),
            Triple::new(order.clone(), Term::name("casemanager:status"), Term::str("done")),
            Triple::new(order.clone(), Term::name("casemanager:reportreleased"), Term::bool(false)),
            Triple::new(t.clone(), Term::name("a"), Term::name("casemanager:OrderTransition")),
            Triple::new(t.clone(), Term::name("casemanager:changeState"), order.clone()),
            Triple::new(t.clone(), Term::name("casemanager:conditionVerified"), Term::str("none")),
        ] {
            store.add(triple).unwrap();
        }
    }
    store
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Running the engine on its own output changes nothing.
    #[test]
    fn fixpoint_is_idempotent(n in 1..6u8) {
        let model = fixture::load_fixture();
        let mut store = lab_population(n);
        let mut diags = Diagnostics::new();
        let first = run_to_fixpoint(&mut store, &model.rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        prop_assert_eq!(first.status, cwp::RunStatus::FixedPoint);
        let snapshot = store.clone();
        let second = run_to_fixpoint(&mut store, &model.rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        prop_assert!(second.firings.iter().all(|f| f.deleted.is_empty() && f.inserted.is_empty()));
        prop_assert_eq!(store, snapshot);
    }

    /// Frame property: the difference between the stores before and
    /// after a run is exactly what the trace records.
    #[test]
    fn trace_is_the_exact_frame(n in 1..6u8) {
        let model = fixture::load_fixture();
        let initial = lab_population(n);
        let mut store = initial.clone();
        let mut diags = Diagnostics::new();
        let trace = run_to_fixpoint(&mut store, &model.rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        prop_assert_eq!(trace.replay(&initial), store.clone());

        let before: BTreeSet<Triple> = initial.iter().cloned().collect();
        let after: BTreeSet<Triple> = store.iter().cloned().collect();
        let added: BTreeSet<&Triple> = after.difference(&before).collect();
        let removed: BTreeSet<&Triple> = before.difference(&after).collect();
        let mut traced_added = BTreeSet::new();
        let mut traced_removed = BTreeSet::new();
        for firing in &trace.firings {
            for t in &firing.inserted {
                if !traced_removed.remove(t) || before.contains(t) {
                    traced_added.insert(t);
                }
                traced_added.insert(t);
            }
            for t in &firing.deleted {
                traced_added.remove(t);
                traced_removed.insert(t);
            }
        }
        // Net effect of the trace equals the store difference.
        let net_added: BTreeSet<&Triple> = after.iter().filter(|t| traced_added.contains(*t) && !before.contains(*t)).collect();
        prop_assert_eq!(&net_added, &added);
        for t in &removed {
            prop_assert!(traced_removed.contains(*t));
        }
    }
}

/// Over one order in state "Approved" that needs an appointment and
/// already has one: the scheduling rule's EXISTS guard yields exactly
/// one binding, while the waiting rule's NOT EXISTS guard yields none.
#[test]
fn appointment_guards_are_mutually_exclusive() {
    let model = fixture::load_fixture();
    let store: TripleStore = [
        Triple::new(Term::name("casemanager:t1"), Term::name("a"), Term::name("casemanager:OrderTransition")),
        Triple::new(Term::name("casemanager:t1"), Term::name("casemanager:changeState"), Term::name("casemanager:o1")),
        Triple::new(Term::name("casemanager:t1"), Term::name("casemanager:conditionVerified"), Term::str("none")),
        Triple::new(Term::name("casemanager:o1"), Term::name("a"), Term::name("casemanager:Consult")),
        Triple::new(Term::name("casemanager:o1"), Term::name("casemanager:state"), Term::str("Approved")),
        Triple::new(Term::name("casemanager:o1"), Term::name("casemanager:needsAppointment"), Term::bool(true)),
        Triple::new(
            Term::name("casemanager:o1"),
            Term::name("casemanager:patientAppointmentDateTime"),
            Term::datetime(DateTime::parse("2016-02-01T10:00:00").unwrap()),
        ),
    ]
    .into_iter()
    .collect();
    let seed = Binding::singleton("this", Term::name("casemanager:t1"));
    let mut diags = Diagnostics::new();
    let t2 = model.rule("T2").unwrap();
    let t1 = model.rule("T1").unwrap();
    assert_eq!(match_pattern(&store, &t2.where_, &seed, &clock(), &mut diags).unwrap().len(), 1);
    assert_eq!(match_pattern(&store, &t1.where_, &seed, &clock(), &mut diags).unwrap().len(), 0);
}

/// Constraint checking is a pure function of (store, constraints,
/// clock): two sweeps agree, and the store is untouched.
#[test]
fn constraint_checking_is_pure() {
    let model = fixture::load_fixture();
    let schema = translate(&model.class_model, &model.options).unwrap();
    for (_, text) in fixture::DEFECT_POPULATIONS {
        let store = materialized(&fixture::load_population(text), &schema);
        let digest = store.digest();
        let mut diags = Diagnostics::new();
        let first = check_constraints(&store, &model.constraints, &schema, &clock(), &mut diags).unwrap();
        let second = check_constraints(&store, &model.constraints, &schema, &clock(), &mut diags).unwrap();
        assert_eq!(first, second);
        assert_eq!(store.digest(), digest);
    }
}

/// Every state change observed in a simulated run is an edge of the
/// extracted graph for the object's type.
#[test]
fn simulated_transitions_follow_the_graph() {
    use cwp::machine::extract_state_graph;
    let model = fixture::load_fixture();
    let schema = translate(&model.class_model, &model.options).unwrap();
    let machine = &model.machines[0];
    let graph = extract_state_graph(&model.rules, machine, &schema).unwrap();
    let initial = DateTime::parse("2016-01-01T00:00:00").unwrap();

    for (ty, text, object) in [
        ("casemanager:LabTest", fixture::SCENARIO_LABTEST, "casemanager:lab1"),
        ("casemanager:Imaging", fixture::SCENARIO_IMAGING, "casemanager:img1"),
        ("casemanager:Consult", fixture::SCENARIO_CONSULT, "casemanager:con1"),
    ] {
        let scenario = fixture::load_scenario(text);
        let trace = simulate(&model, &scenario, initial, DEFAULT_MAX_ITERATIONS).unwrap();
        assert!(trace.ok);
        let states = trace.states_of(&Name::new(object), &machine.state_property);
        let edges = &graph.per_type[&Name::new(ty)];
        for pair in states.windows(2) {
            assert!(
                edges.iter().any(|e| e.source == pair[0] && e.target == pair[1]),
                "{}: observed {} -> {} has no edge",
                ty,
                pair[0],
                pair[1]
            );
        }
    }
}

/// Identical scenarios produce byte-identical traces and equal digests
/// across runs.
#[test]
fn simulation_is_deterministic() {
    let model = fixture::load_fixture();
    let initial = DateTime::parse("2016-01-01T00:00:00").unwrap();
    for text in [fixture::SCENARIO_LABTEST, fixture::SCENARIO_IMAGING, fixture::SCENARIO_CONSULT] {
        let scenario = fixture::load_scenario(text);
        let a = simulate(&model, &scenario, initial, DEFAULT_MAX_ITERATIONS).unwrap();
        let b = simulate(&model, &scenario, initial, DEFAULT_MAX_ITERATIONS).unwrap();
        assert_eq!(a.render(), b.render());
        assert_eq!(a.final_store.digest(), b.final_store.digest());
    }
}

/// Materialization is idempotent and monotone on fixture populations.
#[test]
fn materialization_is_idempotent() {
    let model = fixture::load_fixture();
    let schema = translate(&model.class_model, &model.options).unwrap();
    for text in [fixture::POPULATION_VALID]
        .into_iter()
        .chain(fixture::DEFECT_POPULATIONS.iter().map(|(_, t)| *t))
    {
        let raw = fixture::load_population(text);
        let once = materialized(&raw, &schema);
        let twice = materialized(&once, &schema);
        assert_eq!(once, twice);
        for t in raw.iter() {
            assert!(once.contains(t));
        }
    }
}
