//! ASK constraints over instance populations: the bundled model's seven
//! order constraints against a valid population and each seeded defect.
//! A constraint body matches counterexamples, so a non-empty ASK is a
//! violation.
//!
//!     cargo run --example constraint_checking

use cwp::fixture;
use cwp::pattern::Clock;
use cwp::rules::check_constraints;
use cwp::schema::{materialized, translate};
use cwp::{DateTime, Diagnostics};

fn main() {
    let model = fixture::load_fixture();
    let schema = translate(&model.class_model, &model.options).unwrap();
    let clock = Clock::new(DateTime::parse("2016-01-01T00:00:00").unwrap());
    let mut diags = Diagnostics::new();

    let valid = materialized(&fixture::load_population(fixture::POPULATION_VALID), &schema);
    let violations =
        check_constraints(&valid, &model.constraints, &schema, &clock, &mut diags).unwrap();
    println!("valid population: {} violations", violations.len());

    for (expected, text) in fixture::DEFECT_POPULATIONS {
        let store = materialized(&fixture::load_population(text), &schema);
        let violations =
            check_constraints(&store, &model.constraints, &schema, &clock, &mut diags).unwrap();
        for v in &violations {
            println!("{:<16} -> {} on {}: {}", expected, v.constraint, v.instance, v.message);
        }
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].constraint, expected);
    }
}
