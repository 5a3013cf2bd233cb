//! Graph patterns over a small store: variable binding, FILTER
//! expressions with `now()`, and EXISTS / NOT EXISTS groups.
//!
//!     cargo run --example pattern_queries

use cwp::pattern::{
    eval_ask, match_pattern, CompareOp, FilterExpr, FilterOperand, GroupKind,
};
use cwp::{Binding, Clock, DateTime, Diagnostics, GraphPattern, Term, Triple, TripleStore};

fn atom(s: Term, p: &str, o: Term) -> Triple {
    Triple::new(s, Term::name(p), o)
}

fn main() {
    let store: TripleStore = [
        atom(Term::name("casemanager:o1"), "a", Term::name("casemanager:Order")),
        atom(Term::name("casemanager:o1"), "casemanager:state", Term::str("Approved")),
        atom(Term::name("casemanager:o1"), "casemanager:gender", Term::str("other")),
        atom(Term::name("casemanager:o2"), "a", Term::name("casemanager:Order")),
        atom(Term::name("casemanager:o2"), "casemanager:state", Term::str("Approved")),
        atom(
            Term::name("casemanager:o2"),
            "casemanager:patientAppointmentDateTime",
            Term::datetime(DateTime::parse("2016-02-01T10:00:00").unwrap()),
        ),
    ]
    .into_iter()
    .collect();

    let clock = Clock::new(DateTime::parse("2016-02-02T00:00:00").unwrap());
    let mut diags = Diagnostics::new();

    // All approved orders.
    let approved = GraphPattern {
        atoms: vec![atom(Term::var("o"), "casemanager:state", Term::str("Approved"))],
        ..Default::default()
    };
    for binding in match_pattern(&store, &approved, &Binding::new(), &clock, &mut diags).unwrap() {
        println!("approved: {}", binding);
    }

    // The gender counterexample filter from the constraint catalogue.
    let bad_gender = GraphPattern {
        atoms: vec![atom(Term::var("o"), "casemanager:gender", Term::var("g"))],
        filters: vec![FilterExpr::And(
            Box::new(FilterExpr::Compare(
                CompareOp::Ne,
                FilterOperand::Term(Term::var("g")),
                FilterOperand::Term(Term::str("male")),
            )),
            Box::new(FilterExpr::Compare(
                CompareOp::Ne,
                FilterOperand::Term(Term::var("g")),
                FilterOperand::Term(Term::str("female")),
            )),
        )],
        ..Default::default()
    };
    let hits = match_pattern(&store, &bad_gender, &Binding::new(), &clock, &mut diags).unwrap();
    println!("gender violations: {}", hits.len());

    // Approved orders with no appointment yet (NOT EXISTS), and those
    // whose appointment is already in the past (FILTER with now()).
    let unscheduled = GraphPattern {
        atoms: vec![atom(Term::var("o"), "casemanager:state", Term::str("Approved"))],
        groups: vec![(
            GroupKind::NotExists,
            GraphPattern {
                atoms: vec![atom(
                    Term::var("o"),
                    "casemanager:patientAppointmentDateTime",
                    Term::var("dt"),
                )],
                ..Default::default()
            },
        )],
        ..Default::default()
    };
    for binding in match_pattern(&store, &unscheduled, &Binding::new(), &clock, &mut diags).unwrap() {
        println!("no appointment: {}", binding);
    }

    let overdue = GraphPattern {
        atoms: vec![atom(
            Term::var("o"),
            "casemanager:patientAppointmentDateTime",
            Term::var("dt"),
        )],
        filters: vec![FilterExpr::Compare(
            CompareOp::Lt,
            FilterOperand::Term(Term::var("dt")),
            FilterOperand::Now,
        )],
        ..Default::default()
    };
    println!(
        "appointment before the clock: {}",
        eval_ask(&store, &overdue, &Binding::new(), &clock, &mut diags).unwrap()
    );
}
