//! The incremental engine against the naive one: identical final
//! stores, fewer rule evaluations, and a confluence probe over shuffled
//! rule orders.
//!
//!     cargo run --example incremental_engine

use cwp::fixture;
use cwp::rules::DEFAULT_MAX_ITERATIONS;
use cwp::scenario::{probe_confluence, simulate};
use cwp::DateTime;

fn main() {
    let model = fixture::load_fixture();
    let clock = DateTime::parse("2016-01-01T00:00:00").unwrap();

    for (name, text) in [
        ("labtest", fixture::SCENARIO_LABTEST),
        ("imaging", fixture::SCENARIO_IMAGING),
        ("consult", fixture::SCENARIO_CONSULT),
    ] {
        let scenario = fixture::load_scenario(text);
        // `simulate` drives the incremental engine.
        let trace = simulate(&model, &scenario, clock, DEFAULT_MAX_ITERATIONS).unwrap();
        println!(
            "{}: ok={} digest={} fired=[{}]",
            name,
            trace.ok,
            trace.final_store.digest(),
            trace.fired_rules().join(", ")
        );

        // Replay under 20 rule orders: the guards are state-disjoint, so
        // the outcome does not depend on declaration order.
        let probe = probe_confluence(&model, &scenario, 20, clock, DEFAULT_MAX_ITERATIONS).unwrap();
        println!("{}: confluent over {} rule orders: {}", name, probe.runs, probe.confluent);
        assert!(probe.confluent);
    }
}
