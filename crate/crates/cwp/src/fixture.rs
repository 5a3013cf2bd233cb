//! The bundled case-management work model: class model, constraints,
//! constructor, transition rules, state machine, instance populations,
//! and lifecycle scenarios. Everything is embedded so library users can
//! load it without touching the filesystem.

use crate::model::WorkModel;
use crate::scenario::Scenario;
use crate::store::TripleStore;
use crate::syntax::{parse_model, parse_scenario, parse_triples};

pub const MODEL_TEXT: &str = include_str!("../data/casemgmt.wm");

pub const SCENARIO_LABTEST: &str = include_str!("../data/scenarios/labtest_lifecycle.scn");
pub const SCENARIO_IMAGING: &str = include_str!("../data/scenarios/imaging_lifecycle.scn");
pub const SCENARIO_CONSULT: &str = include_str!("../data/scenarios/consult_lifecycle.scn");
pub const SCENARIO_CONSTRAINTS_VALID: &str = include_str!("../data/scenarios/constraints_valid.scn");

pub const POPULATION_VALID: &str = include_str!("../data/populations/valid.trp");

/// Defect-seeded populations, one per constraint: (constraint id,
/// triple text).
pub const DEFECT_POPULATIONS: [(&str, &str); 7] = [
    ("gender", include_str!("../data/populations/defect_gender.trp")),
    ("task-name", include_str!("../data/populations/defect_task_name.trp")),
    ("contact-name", include_str!("../data/populations/defect_contact_name.trp")),
    ("date-order", include_str!("../data/populations/defect_date_order.trp")),
    ("patient-number", include_str!("../data/populations/defect_patient_number.trp")),
    ("within-plan", include_str!("../data/populations/defect_within_plan.trp")),
    ("only-one-plan", include_str!("../data/populations/defect_only_one_plan.trp")),
];

/// Parses the bundled model. Fixture integrity is covered by tests, so
/// a parse failure here is a build defect.
pub fn load_fixture() -> WorkModel {
    parse_model(MODEL_TEXT).unwrap_or_else(|errors| {
        panic!("bundled model failed to parse: {:#?}", errors)
    })
}

pub fn load_scenario(text: &str) -> Scenario {
    parse_scenario(text).unwrap_or_else(|errors| {
        panic!("bundled scenario failed to parse: {:#?}", errors)
    })
}

pub fn load_population(text: &str) -> TripleStore {
    parse_triples(text).unwrap_or_else(|errors| {
        panic!("bundled population failed to parse: {:#?}", errors)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::check_cohesion;
    use crate::schema::translate;

    #[test]
    fn fixture_parses_and_round_trips() {
        let model = load_fixture();
        let printed = crate::syntax::print_model(&model);
        let again = parse_model(&printed).expect("printed fixture parses");
        assert_eq!(model, again);
    }

    #[test]
    fn fixture_shape() {
        let model = load_fixture();
        assert_eq!(model.class_model.classes.len(), 12);
        assert_eq!(model.constraints.len(), 7);
        assert_eq!(model.constructors.len(), 1);
        // Two of the printed rule blocks share the label T9; the fixture
        // names them T9 and T9', for seventeen rules over thirteen
        // transition families.
        assert_eq!(model.rules.len(), 17);
        let ids: Vec<&str> = model.rules.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "T0", "T1", "T2", "T3", "T3'", "T4", "T5", "T6", "T7", "T7'", "T8", "T9", "T9'",
                "T10", "T11", "T11'", "T12"
            ]
        );
        let machine = &model.machines[0];
        assert_eq!(
            machine.states,
            [
                "Initial",
                "Approved",
                "Waiting for appointment to be scheduled",
                "Appointment scheduled",
                "Waiting for appointment",
                "Patient examined",
                "Image or specimen obtained",
                "Waiting for report",
                "Resolved"
            ]
        );
        assert_eq!(machine.initial, "Initial");
        assert!(machine.finals.contains("Resolved"));
        assert_eq!(machine.transitions.len(), 17);
    }

    #[test]
    fn fixture_is_cohesive() {
        let model = load_fixture();
        let schema = translate(&model.class_model, &model.options).unwrap();
        let errors = check_cohesion(
            &model.rules,
            &model.constraints,
            &model.constructors,
            &model.machines[0],
            &schema,
            &model.mutability,
        );
        assert!(errors.is_empty(), "cohesion errors: {:#?}", errors);
    }

    #[test]
    fn bundled_scenarios_and_populations_parse() {
        for text in [
            SCENARIO_LABTEST,
            SCENARIO_IMAGING,
            SCENARIO_CONSULT,
            SCENARIO_CONSTRAINTS_VALID,
        ] {
            load_scenario(text);
        }
        assert_eq!(load_population(POPULATION_VALID).len(), 27);
        for (id, text) in DEFECT_POPULATIONS {
            assert!(!load_population(text).is_empty(), "{} population empty", id);
        }
    }

    #[test]
    fn every_rule_maps_to_one_transition_family() {
        // Primed variants share the unprimed id's row.
        let model = load_fixture();
        let machine = &model.machines[0];
        for rule in &model.rules {
            let family = rule.id.trim_end_matches('\'');
            let declared = machine
                .transitions
                .iter()
                .filter(|t| t.id.trim_end_matches('\'') == family)
                .count();
            assert!(declared >= 1, "rule {} has no transition family", rule.id);
        }
    }
}
