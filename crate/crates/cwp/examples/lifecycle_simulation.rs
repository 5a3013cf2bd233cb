//! Scenario simulation: the bundled lab-test lifecycle from creation to
//! the released report, with the full deterministic trace.
//!
//!     cargo run --example lifecycle_simulation

use cwp::fixture;
use cwp::rules::DEFAULT_MAX_ITERATIONS;
use cwp::scenario::simulate;
use cwp::{DateTime, Name};

fn main() {
    let model = fixture::load_fixture();
    let scenario = fixture::load_scenario(fixture::SCENARIO_LABTEST);
    let clock = DateTime::parse("2016-01-01T00:00:00").unwrap();
    let trace = simulate(&model, &scenario, clock, DEFAULT_MAX_ITERATIONS).unwrap();

    print!("{}", trace.render());

    assert!(trace.ok);
    println!();
    println!("fired: {}", trace.fired_rules().join(", "));
    let states = trace.states_of(&Name::new("casemanager:lab1"), &Name::new("casemanager:state"));
    println!("states: {}", states.join(" -> "));
}
