//! Class-model translation under the two part-whole strategies and the
//! two value-partition strategies, with the axiom-vocabulary export.
//!
//!     cargo run --example translate_schema

use cwp::fixture;
use cwp::schema::{
    schema_to_triples, translate, Characteristic, PartWholeStrategy, TranslationOptions,
    ValuePartitionStrategy,
};

fn main() {
    let model = fixture::load_fixture();

    // Per-association: each composition keeps its own property pair; the
    // part side carries an exactly-one cardinality, and two-step
    // part-whole paths become property chains.
    let schema = translate(&model.class_model, &TranslationOptions::default()).unwrap();
    let exact_one: Vec<String> = schema
        .object_props
        .iter()
        .filter(|(_, p)| p.min_card == 1 && p.max_card == Some(1))
        .map(|(n, _)| n.to_string())
        .collect();
    println!("exactly-one inverses: {:?}", exact_one);
    println!("property chains:");
    for chain in &schema.chains {
        println!("  {} o {} -> {}", chain.first, chain.second, chain.target);
    }
    let export = schema_to_triples(&schema).serialize();
    println!("per-association export: {} axiom triples", export.lines().count());

    // Single hasPart: one transitive partOf for every part-whole
    // association; cardinality restrictions cannot ride on a transitive
    // property, so each composition's request raises a warning.
    let single = translate(
        &model.class_model,
        &TranslationOptions {
            part_whole: PartWholeStrategy::SingleHasPart,
            ..Default::default()
        },
    )
    .unwrap();
    let transitive: Vec<String> = single
        .object_props
        .iter()
        .filter(|(_, p)| p.characteristics.contains(&Characteristic::Transitive))
        .map(|(n, _)| n.to_string())
        .collect();
    println!("transitive properties: {:?}", transitive);
    for w in &single.warnings {
        println!("  warning: {}", w);
    }

    // The treatment-plan state partition under both strategies.
    let individuals = translate(&model.class_model, &TranslationOptions::default()).unwrap();
    println!(
        "disjoint-individuals: allowed values {:?}",
        individuals.enumerations[&"casemanager:treatmentPlanState".into()]
            .iter()
            .map(|l| l.canonical())
            .collect::<Vec<_>>()
    );
    let subclasses = translate(
        &model.class_model,
        &TranslationOptions {
            value_partition: ValuePartitionStrategy::DisjointSubclasses,
            ..Default::default()
        },
    )
    .unwrap();
    let partition_classes: Vec<String> = subclasses
        .classes
        .keys()
        .filter(|c| c.local().starts_with("TreatmentPlanState") || subclasses.classes[*c].supers.iter().any(|s| s.local() == "TreatmentPlanState"))
        .map(|c| c.to_string())
        .collect();
    println!("disjoint-subclasses: {:?}", partition_classes);
}
