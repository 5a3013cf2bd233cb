//! Solvability verification: per-type transition graphs, reachability,
//! deadlock and coverage analysis over the bounded environment model,
//! and what happens when the final transition is deleted.
//!
//!     cargo run --example solvability_verification

use cwp::fixture;
use cwp::machine::{check_cohesion, check_deadlock, check_reachability, extract_state_graph};
use cwp::pattern::Clock;
use cwp::schema::translate;
use cwp::DateTime;

fn main() {
    let model = fixture::load_fixture();
    let schema = translate(&model.class_model, &model.options).unwrap();
    let machine = &model.machines[0];
    let clock = Clock::new(DateTime::parse("2016-01-01T00:00:00").unwrap());

    let cohesion = check_cohesion(
        &model.rules,
        &model.constraints,
        &model.constructors,
        machine,
        &schema,
        &model.mutability,
    );
    println!("cohesion errors: {}", cohesion.len());

    let graph = extract_state_graph(&model.rules, machine, &schema).unwrap();
    for (ty, edges) in &graph.per_type {
        println!("{}: {} edges", ty, edges.len());
    }
    for (ty, (reachable, unreachable)) in check_reachability(&graph, machine) {
        println!("{}: {} reachable, unreachable {:?}", ty, reachable.len(), unreachable);
    }

    let analysis =
        check_deadlock(&graph, machine, &model.rules, &schema, &model.mutability, &clock).unwrap();
    for (ty, a) in &analysis {
        println!("{}: deadlocks {:?}", ty, a.deadlocks);
        for gap in &a.gaps {
            println!("  coverage gap: {}", gap.describe(&model.mutability));
        }
    }

    // Delete the final transition: every type is stuck one step short.
    let mut broken = model.clone();
    broken.rules.retain(|r| r.id != "T12");
    broken.machines[0].transitions.retain(|t| t.id != "T12");
    let machine = &broken.machines[0];
    let graph = extract_state_graph(&broken.rules, machine, &schema).unwrap();
    let analysis =
        check_deadlock(&graph, machine, &broken.rules, &schema, &broken.mutability, &clock)
            .unwrap();
    println!("without T12:");
    for (ty, a) in &analysis {
        println!("  {}: deadlocks {:?}", ty, a.deadlocks);
    }
}
