//! Transition rules run to a fixed point: chained firings inside one
//! run, the fire trace, and cycle detection on a two-rule oscillator.
//!
//!     cargo run --example rule_fixpoint

use cwp::pattern::Clock;
use cwp::rules::{run_to_fixpoint, RunStatus, TransitionRule, DEFAULT_MAX_ITERATIONS};
use cwp::{DateTime, Diagnostics, GraphPattern, Term, Triple, TripleStore};

fn atom(s: Term, p: &str, o: Term) -> Triple {
    Triple::new(s, Term::name(p), o)
}

/// DELETE state `from` / INSERT state `to` when the guard property holds.
fn step(id: &str, from: &str, to: &str, guard: Option<(&str, Term)>) -> TransitionRule {
    let mut atoms = vec![
        atom(Term::var("this"), "m:changeState", Term::var("o")),
        atom(Term::var("o"), "m:state", Term::str(from)),
    ];
    if let Some((p, v)) = guard {
        atoms.push(atom(Term::var("o"), p, v));
    }
    TransitionRule {
        id: id.into(),
        attached_class: "m:OrderTransition".into(),
        delete: vec![atom(Term::var("o"), "m:state", Term::str(from))],
        insert: vec![atom(Term::var("o"), "m:state", Term::str(to))],
        where_: GraphPattern { atoms, ..Default::default() },
    }
}

fn harness(state: &str) -> TripleStore {
    [
        atom(Term::name("m:t1"), "a", Term::name("m:OrderTransition")),
        atom(Term::name("m:t1"), "m:changeState", Term::name("m:o1")),
        atom(Term::name("m:o1"), "a", Term::name("m:Order")),
        atom(Term::name("m:o1"), "m:state", Term::str(state)),
        atom(Term::name("m:o1"), "m:done", Term::bool(true)),
    ]
    .into_iter()
    .collect()
}

fn main() {
    let clock = Clock::new(DateTime::parse("2016-01-01T00:00:00").unwrap());
    let mut diags = Diagnostics::new();

    // Two rules chain within a single run: Initial -> Approved -> Done.
    let rules = vec![
        step("T0", "Initial", "Approved", None),
        step("T1", "Approved", "Done", Some(("m:done", Term::bool(true)))),
    ];
    let mut store = harness("Initial");
    let trace =
        run_to_fixpoint(&mut store, &rules, &clock, DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
    println!("status {:?} after {} passes", trace.status, trace.passes);
    for firing in &trace.firings {
        println!("  pass {} fire {} [{}]", firing.iteration, firing.rule, firing.binding);
        for t in &firing.deleted {
            println!("    - {}", t);
        }
        for t in &firing.inserted {
            println!("    + {}", t);
        }
    }

    // An adversarial pair that rewrites a state back and forth never
    // terminates; the engine reports the repeated store digest instead
    // of looping.
    let oscillator = vec![step("flip", "A", "B", None), step("flop", "B", "A", None)];
    let mut store = harness("A");
    let trace =
        run_to_fixpoint(&mut store, &oscillator, &clock, DEFAULT_MAX_ITERATIONS, &mut diags)
            .unwrap();
    assert_eq!(trace.status, RunStatus::CycleDetected);
    println!("oscillator: {:?} after {} passes", trace.status, trace.passes);
}
