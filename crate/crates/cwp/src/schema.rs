//! Translation of a class model (classes, attributes, associations,
//! generalizations, value partitions, part-whole relations) into a
//! semantic schema of axioms, plus deterministic closure
//! (materialization) and structural consistency checking over instance
//! data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::store::TripleStore;
use crate::term::{Literal, Name, Term, Triple};

/// Datatype tags available to attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RangeTag {
    String,
    Integer,
    Boolean,
    DateTime,
}

impl RangeTag {
    pub fn parse(text: &str) -> Option<RangeTag> {
        match text {
            "string" => Some(RangeTag::String),
            "integer" => Some(RangeTag::Integer),
            "boolean" => Some(RangeTag::Boolean),
            "dateTime" => Some(RangeTag::DateTime),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RangeTag::String => "string",
            RangeTag::Integer => "integer",
            RangeTag::Boolean => "boolean",
            RangeTag::DateTime => "dateTime",
        }
    }

    pub fn matches(&self, lit: &Literal) -> bool {
        lit.tag() == self.as_str()
    }
}

impl fmt::Display for RangeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[min..max]`; `max == None` means unbounded (`*`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Multiplicity {
    pub min: u32,
    pub max: Option<u32>,
}

impl Multiplicity {
    pub const OPTIONAL: Multiplicity = Multiplicity { min: 0, max: Some(1) };
    pub const ONE: Multiplicity = Multiplicity { min: 1, max: Some(1) };
    pub const MANY: Multiplicity = Multiplicity { min: 0, max: None };

    pub fn is_valid(&self) -> bool {
        match self.max {
            Some(max) => self.min <= max,
            None => true,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) if max == self.min => write!(f, "[{}]", self.min),
            Some(max) => write!(f, "[{}..{}]", self.min, max),
            None => write!(f, "[{}..*]", self.min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssociationKind {
    Plain,
    Aggregation,
    Composition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: Name,
    pub is_abstract: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDecl {
    pub owner: Name,
    pub name: Name,
    pub datatype: RangeTag,
    pub multiplicity: Multiplicity,
    pub default: Option<Literal>,
}

/// A binary association. `target_mult` bounds targets per source (the
/// forward property); `source_mult` bounds sources per target (the
/// inverse property).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationDecl {
    pub name: Name,
    pub source: Name,
    pub target: Name,
    pub kind: AssociationKind,
    pub source_mult: Multiplicity,
    pub target_mult: Multiplicity,
    pub ordered: bool,
    pub unique: bool,
    pub inverse: Option<Name>,
    pub extends: Option<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionValue {
    pub text: String,
    pub children: Vec<PartitionValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuePartition {
    pub owner: Name,
    pub attribute: Name,
    pub values: Vec<PartitionValue>,
}

/// The parsed class-model half of a work model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UmlClassModel {
    pub classes: Vec<ClassDecl>,
    pub attributes: Vec<AttributeDecl>,
    pub associations: Vec<AssociationDecl>,
    pub class_generalizations: Vec<(Name, Name)>,
    pub value_partitions: Vec<ValuePartition>,
}

impl UmlClassModel {
    pub fn class(&self, name: &Name) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| &c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValuePartitionStrategy {
    DisjointIndividuals,
    DisjointSubclasses,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartWholeStrategy {
    PerAssociation,
    SingleHasPart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslationOptions {
    pub value_partition: ValuePartitionStrategy,
    pub part_whole: PartWholeStrategy,
}

impl Default for TranslationOptions {
    fn default() -> Self {
        TranslationOptions {
            value_partition: ValuePartitionStrategy::DisjointIndividuals,
            part_whole: PartWholeStrategy::PerAssociation,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("unknown datatype `{datatype}` on attribute {attribute}")]
    UnknownDatatype { attribute: Name, datatype: String },
    #[error("property {0} is declared more than once")]
    DuplicateProperty(Name),
    #[error("class {0} is declared more than once")]
    DuplicateClass(Name),
    #[error("reference to undeclared class {0}")]
    UnknownClass(Name),
    #[error("reference to undeclared property {0}")]
    UnknownProperty(Name),
    #[error("generalization cycle involving {0}")]
    CyclicGeneralization(Name),
    #[error("value partition on {0} has no values")]
    EmptyPartition(Name),
    #[error("value partition on {0} repeats value \"{1}\"")]
    DuplicatePartitionValue(Name, String),
    #[error("sub-partitioning of \"{1}\" on {0} requires the disjoint-subclasses strategy")]
    SubPartitionNotAllowed(Name, String),
    #[error("value partition on {0} requires a string attribute")]
    PartitionAttributeNotString(Name),
    #[error("invalid multiplicity {1} on {0}")]
    InvalidMultiplicity(Name, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Characteristic {
    Functional,
    InverseFunctional,
    Irreflexive,
    Transitive,
}

impl Characteristic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Characteristic::Functional => "Functional",
            Characteristic::InverseFunctional => "InverseFunctional",
            Characteristic::Irreflexive => "Irreflexive",
            Characteristic::Transitive => "Transitive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAxiom {
    pub is_abstract: bool,
    /// Direct superclasses.
    pub supers: BTreeSet<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatatypeProperty {
    pub domain: Name,
    pub range: RangeTag,
    pub min_card: u32,
    pub max_card: Option<u32>,
    pub default: Option<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectProperty {
    pub domain: Option<Name>,
    pub range: Option<Name>,
    pub inverse: Option<Name>,
    pub characteristics: BTreeSet<Characteristic>,
    pub min_card: u32,
    pub max_card: Option<u32>,
    pub ordered: bool,
    /// Whole-to-part direction of an aggregation or composition.
    pub part_whole_forward: bool,
    /// Part side of a composition; each part needs exactly one whole.
    pub composition_part_side: bool,
}

impl ObjectProperty {
    fn plain() -> Self {
        ObjectProperty {
            domain: None,
            range: None,
            inverse: None,
            characteristics: BTreeSet::new(),
            min_card: 0,
            max_card: None,
            ordered: false,
            part_whole_forward: false,
            composition_part_side: false,
        }
    }
}

/// A length-two property chain axiom: `first ∘ second ⊑ target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PropertyChain {
    pub first: Name,
    pub second: Name,
    pub target: Name,
}

/// An allValuesFrom-style class restriction. Recorded and exported,
/// not enforced by the structural checker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AllValuesFrom {
    pub class: Name,
    pub property: Name,
    pub filler: Name,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TranslationWarning {
    /// A transitive property cannot carry the cardinality restriction the
    /// association asked for; the restriction was dropped.
    TransitiveCardinalityConflict { property: Name, association: Name },
}

impl fmt::Display for TranslationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslationWarning::TransitiveCardinalityConflict { property, association } => write!(
                f,
                "TransitiveCardinalityConflict: {} is transitive, the cardinality restriction requested by {} was dropped",
                property, association
            ),
        }
    }
}

/// The translated axiom set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SemanticSchema {
    pub classes: BTreeMap<Name, ClassAxiom>,
    pub disjoint_sets: Vec<BTreeSet<Name>>,
    pub datatype_props: BTreeMap<Name, DatatypeProperty>,
    pub object_props: BTreeMap<Name, ObjectProperty>,
    /// Direct (sub, super) property pairs.
    pub sub_properties: Vec<(Name, Name)>,
    pub enumerations: BTreeMap<Name, BTreeSet<Literal>>,
    pub chains: Vec<PropertyChain>,
    pub restrictions: Vec<AllValuesFrom>,
    pub warnings: Vec<TranslationWarning>,
}

impl SemanticSchema {
    pub fn has_class(&self, name: &Name) -> bool {
        self.classes.contains_key(name)
    }

    /// Reflexive-transitive superclass closure.
    pub fn supers_closure(&self, class: &Name) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut stack = vec![class.clone()];
        while let Some(c) = stack.pop() {
            if !out.insert(c.clone()) {
                continue;
            }
            if let Some(axiom) = self.classes.get(&c) {
                stack.extend(axiom.supers.iter().cloned());
            }
        }
        out
    }

    pub fn is_subclass(&self, sub: &Name, sup: &Name) -> bool {
        self.supers_closure(sub).contains(sup)
    }

    pub fn concrete_subclasses(&self, class: &Name) -> Vec<Name> {
        self.classes
            .iter()
            .filter(|(name, ax)| !ax.is_abstract && self.is_subclass(name, class))
            .map(|(name, _)| name.clone())
            .collect()
    }

    pub fn is_declared_property(&self, name: &Name) -> bool {
        self.datatype_props.contains_key(name)
            || self.object_props.contains_key(name)
            || self.ordered_index_base(name).is_some()
    }

    /// Resolves `base_N` to `base` when `base` is an ordered object
    /// property and `N` is a positive integer.
    pub fn ordered_index_base(&self, name: &Name) -> Option<(Name, u32)> {
        let text = name.as_str();
        let (base, idx) = text.rsplit_once('_')?;
        let idx: u32 = idx.parse().ok()?;
        if idx == 0 {
            return None;
        }
        let base = Name::new(base);
        match self.object_props.get(&base) {
            Some(p) if p.ordered => Some((base, idx)),
            _ => None,
        }
    }

    pub fn range_tag(&self, prop: &Name) -> Option<RangeTag> {
        self.datatype_props.get(prop).map(|p| p.range)
    }

    /// Max-cardinality-one properties, whose `set` semantics is replace.
    pub fn is_functional(&self, prop: &Name) -> bool {
        if let Some(p) = self.datatype_props.get(prop) {
            return p.max_card == Some(1);
        }
        if let Some(p) = self.object_props.get(prop) {
            return p.max_card == Some(1) || p.characteristics.contains(&Characteristic::Functional);
        }
        false
    }

    pub fn inverse_of(&self, prop: &Name) -> Option<&Name> {
        self.object_props.get(prop).and_then(|p| p.inverse.as_ref())
    }
}

fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// `"slowly progressing"` becomes `SlowlyProgressing`.
fn value_class_local(value: &str) -> String {
    value
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(capitalize)
        .collect()
}

fn prefixed(like: &Name, local: &str) -> Name {
    match like.prefix() {
        Some(p) => Name::new(format!("{}:{}", p, local)),
        None => Name::new(local),
    }
}

/// Translates a class model into a semantic schema under the selected
/// strategies. Total and deterministic: the same model translates to the
/// same schema.
pub fn translate(model: &UmlClassModel, options: &TranslationOptions) -> Result<SemanticSchema, TranslateError> {
    let mut schema = SemanticSchema::default();

    for class in &model.classes {
        let prev = schema.classes.insert(
            class.name.clone(),
            ClassAxiom {
                is_abstract: class.is_abstract,
                supers: BTreeSet::new(),
            },
        );
        if prev.is_some() {
            return Err(TranslateError::DuplicateClass(class.name.clone()));
        }
    }

    for (sub, sup) in &model.class_generalizations {
        if !schema.classes.contains_key(sup) {
            return Err(TranslateError::UnknownClass(sup.clone()));
        }
        match schema.classes.get_mut(sub) {
            Some(axiom) => {
                axiom.supers.insert(sup.clone());
            }
            None => return Err(TranslateError::UnknownClass(sub.clone())),
        }
    }
    check_acyclic_generalizations(&schema)?;

    let mut taken: BTreeSet<Name> = BTreeSet::new();
    let claim = |name: &Name, taken: &mut BTreeSet<Name>| -> Result<(), TranslateError> {
        if !taken.insert(name.clone()) {
            return Err(TranslateError::DuplicateProperty(name.clone()));
        }
        Ok(())
    };

    for attr in &model.attributes {
        if !schema.classes.contains_key(&attr.owner) {
            return Err(TranslateError::UnknownClass(attr.owner.clone()));
        }
        if !attr.multiplicity.is_valid() {
            return Err(TranslateError::InvalidMultiplicity(
                attr.name.clone(),
                attr.multiplicity.to_string(),
            ));
        }
        claim(&attr.name, &mut taken)?;
        schema.datatype_props.insert(
            attr.name.clone(),
            DatatypeProperty {
                domain: attr.owner.clone(),
                range: attr.datatype,
                min_card: attr.multiplicity.min,
                max_card: attr.multiplicity.max,
                default: attr.default.clone(),
            },
        );
    }

    // Associations. Part-whole associations collapse into one hasPart /
    // partOf pair under the SingleHasPart strategy.
    let mut single_pair: Option<(Name, Name)> = None;
    for assoc in &model.associations {
        for end in [&assoc.source, &assoc.target] {
            if !schema.classes.contains_key(end) {
                return Err(TranslateError::UnknownClass(end.clone()));
            }
        }
        for mult in [&assoc.source_mult, &assoc.target_mult] {
            if !mult.is_valid() {
                return Err(TranslateError::InvalidMultiplicity(
                    assoc.name.clone(),
                    mult.to_string(),
                ));
            }
        }
        let part_whole = !matches!(assoc.kind, AssociationKind::Plain);

        if part_whole && options.part_whole == PartWholeStrategy::SingleHasPart {
            let (has_part, part_of) = single_pair
                .get_or_insert_with(|| (prefixed(&assoc.name, "hasPart"), prefixed(&assoc.name, "partOf")))
                .clone();
            if !schema.object_props.contains_key(&has_part) {
                claim(&has_part, &mut taken)?;
                claim(&part_of, &mut taken)?;
                schema.object_props.insert(
                    has_part.clone(),
                    ObjectProperty {
                        inverse: Some(part_of.clone()),
                        part_whole_forward: true,
                        ..ObjectProperty::plain()
                    },
                );
                schema.object_props.insert(
                    part_of.clone(),
                    ObjectProperty {
                        inverse: Some(has_part.clone()),
                        characteristics: [Characteristic::Transitive].into(),
                        ..ObjectProperty::plain()
                    },
                );
            }
            schema.restrictions.push(AllValuesFrom {
                class: assoc.target.clone(),
                property: part_of.clone(),
                filler: assoc.source.clone(),
            });
            schema.restrictions.push(AllValuesFrom {
                class: assoc.source.clone(),
                property: has_part.clone(),
                filler: assoc.target.clone(),
            });
            // Aggregation and composition both ask to bound the owner side
            // to one; a transitive property cannot carry that restriction.
            schema.warnings.push(TranslationWarning::TransitiveCardinalityConflict {
                property: part_of.clone(),
                association: assoc.name.clone(),
            });
            continue;
        }

        let inverse_name = assoc
            .inverse
            .clone()
            .unwrap_or_else(|| Name::new(format!("{}_inv", assoc.name)));
        claim(&assoc.name, &mut taken)?;
        claim(&inverse_name, &mut taken)?;

        let mut forward = ObjectProperty {
            domain: Some(assoc.source.clone()),
            range: Some(assoc.target.clone()),
            inverse: Some(inverse_name.clone()),
            ordered: assoc.ordered,
            part_whole_forward: part_whole,
            ..ObjectProperty::plain()
        };
        let mut inverse = ObjectProperty {
            domain: Some(assoc.target.clone()),
            range: Some(assoc.source.clone()),
            inverse: Some(assoc.name.clone()),
            ..ObjectProperty::plain()
        };

        if assoc.unique {
            forward.min_card = assoc.target_mult.min;
            forward.max_card = assoc.target_mult.max;
            inverse.min_card = assoc.source_mult.min;
            inverse.max_card = assoc.source_mult.max;
        }
        match assoc.kind {
            AssociationKind::Plain => {}
            AssociationKind::Aggregation => {
                forward.characteristics.insert(Characteristic::Irreflexive);
                forward.characteristics.insert(Characteristic::InverseFunctional);
                inverse.max_card = Some(1);
            }
            AssociationKind::Composition => {
                forward.characteristics.insert(Characteristic::Irreflexive);
                forward.characteristics.insert(Characteristic::InverseFunctional);
                inverse.min_card = 1;
                inverse.max_card = Some(1);
                inverse.composition_part_side = true;
            }
        }
        if forward.max_card == Some(1) {
            forward.characteristics.insert(Characteristic::Functional);
        }
        if inverse.max_card == Some(1) {
            inverse.characteristics.insert(Characteristic::Functional);
        }

        schema.object_props.insert(assoc.name.clone(), forward);
        schema.object_props.insert(inverse_name, inverse);
    }

    // Association generalization: both sides must survive the strategy.
    for assoc in &model.associations {
        if let Some(sup) = &assoc.extends {
            if !schema.object_props.contains_key(sup) {
                return Err(TranslateError::UnknownProperty(sup.clone()));
            }
            if schema.object_props.contains_key(&assoc.name) {
                schema.sub_properties.push((assoc.name.clone(), sup.clone()));
            }
        }
    }
    schema.sub_properties.sort();
    schema.sub_properties.dedup();

    for partition in &model.value_partitions {
        let fragment = translate_value_partition(
            &partition.owner,
            &partition.attribute,
            &partition.values,
            options.value_partition,
            &schema,
        )?;
        merge_partition_fragment(&mut schema, fragment)?;
    }

    if options.part_whole == PartWholeStrategy::PerAssociation {
        let chains = build_property_chains(model, &schema);
        if !chains.is_empty() {
            let target = chains[0].target.clone();
            schema
                .object_props
                .entry(target)
                .or_insert_with(ObjectProperty::plain);
            schema.chains = chains;
        }
    }

    schema.restrictions.sort();
    schema.warnings.sort();
    Ok(schema)
}

fn check_acyclic_generalizations(schema: &SemanticSchema) -> Result<(), TranslateError> {
    for class in schema.classes.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<Name> = schema.classes[class].supers.iter().cloned().collect();
        while let Some(c) = stack.pop() {
            if &c == class {
                return Err(TranslateError::CyclicGeneralization(class.clone()));
            }
            if seen.insert(c.clone()) {
                if let Some(ax) = schema.classes.get(&c) {
                    stack.extend(ax.supers.iter().cloned());
                }
            }
        }
    }
    Ok(())
}

/// The schema fragment a value partition contributes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartitionFragment {
    /// DisjointIndividuals: the enumeration of allowed values.
    pub enumeration: Option<(Name, BTreeSet<Literal>)>,
    /// DisjointSubclasses: (class, direct super) pairs, root listed under
    /// the generated partition class.
    pub classes: Vec<(Name, Name)>,
    pub partition_class: Option<Name>,
    pub disjoint_sets: Vec<BTreeSet<Name>>,
}

/// Translates one value partition under the selected strategy.
pub fn translate_value_partition(
    owner: &Name,
    attribute: &Name,
    values: &[PartitionValue],
    strategy: ValuePartitionStrategy,
    schema: &SemanticSchema,
) -> Result<PartitionFragment, TranslateError> {
    if values.is_empty() {
        return Err(TranslateError::EmptyPartition(attribute.clone()));
    }
    let mut seen = BTreeSet::new();
    let mut flat = Vec::new();
    collect_values(values, &mut flat);
    for v in &flat {
        if !seen.insert(v.clone()) {
            return Err(TranslateError::DuplicatePartitionValue(attribute.clone(), v.clone()));
        }
    }
    match schema.datatype_props.get(attribute) {
        Some(p) if p.range == RangeTag::String && &p.domain == owner => {}
        Some(_) => return Err(TranslateError::PartitionAttributeNotString(attribute.clone())),
        None => return Err(TranslateError::UnknownProperty(attribute.clone())),
    }

    let mut fragment = PartitionFragment::default();
    match strategy {
        ValuePartitionStrategy::DisjointIndividuals => {
            if let Some(v) = values.iter().find(|v| !v.children.is_empty()) {
                return Err(TranslateError::SubPartitionNotAllowed(
                    attribute.clone(),
                    v.text.clone(),
                ));
            }
            fragment.enumeration = Some((
                attribute.clone(),
                values.iter().map(|v| Literal::str(&v.text)).collect(),
            ));
        }
        ValuePartitionStrategy::DisjointSubclasses => {
            let partition_class = prefixed(owner, &capitalize(attribute.local()));
            fragment.partition_class = Some(partition_class.clone());
            push_value_classes(attribute, &partition_class, values, &mut fragment);
        }
    }
    Ok(fragment)
}

fn collect_values(values: &[PartitionValue], out: &mut Vec<String>) {
    for v in values {
        out.push(v.text.clone());
        collect_values(&v.children, out);
    }
}

fn push_value_classes(
    attribute: &Name,
    parent: &Name,
    values: &[PartitionValue],
    fragment: &mut PartitionFragment,
) {
    let mut siblings = BTreeSet::new();
    for v in values {
        let class = prefixed(attribute, &value_class_local(&v.text));
        siblings.insert(class.clone());
        fragment.classes.push((class.clone(), parent.clone()));
        push_value_classes(attribute, &class, &v.children, fragment);
    }
    if siblings.len() > 1 {
        fragment.disjoint_sets.push(siblings);
    }
}

fn merge_partition_fragment(
    schema: &mut SemanticSchema,
    fragment: PartitionFragment,
) -> Result<(), TranslateError> {
    if let Some((prop, values)) = fragment.enumeration {
        schema.enumerations.insert(prop, values);
    }
    if let Some(partition_class) = fragment.partition_class {
        if schema.classes.contains_key(&partition_class) {
            return Err(TranslateError::DuplicateClass(partition_class));
        }
        schema.classes.insert(
            partition_class,
            ClassAxiom {
                is_abstract: true,
                supers: BTreeSet::new(),
            },
        );
    }
    for (class, sup) in fragment.classes {
        if schema.classes.contains_key(&class) {
            return Err(TranslateError::DuplicateClass(class));
        }
        schema.classes.insert(
            class,
            ClassAxiom {
                is_abstract: false,
                supers: [sup].into(),
            },
        );
    }
    schema.disjoint_sets.extend(fragment.disjoint_sets);
    Ok(())
}

/// For each two-step part-whole path `A -p-> B -q-> C`, a chain axiom
/// `p ∘ q ⊑ hasPart_generated`. Only meaningful under the PerAssociation
/// strategy.
pub fn build_property_chains(model: &UmlClassModel, schema: &SemanticSchema) -> Vec<PropertyChain> {
    let part_whole: Vec<&AssociationDecl> = model
        .associations
        .iter()
        .filter(|a| !matches!(a.kind, AssociationKind::Plain))
        .collect();
    let mut chains = Vec::new();
    for first in &part_whole {
        for second in &part_whole {
            if first.name == second.name {
                continue;
            }
            if second.source == first.target || schema.is_subclass(&second.source, &first.target) {
                let target = prefixed(&first.name, "hasPart_generated");
                chains.push(PropertyChain {
                    first: first.name.clone(),
                    second: second.name.clone(),
                    target,
                });
            }
        }
    }
    chains.sort();
    chains.dedup();
    chains
}

/// Closes the store under subclass typing, sub-properties (including
/// ordered index properties), inverse symmetry, transitive properties,
/// and property chains. Idempotent and terminating: every rule is
/// monotone over a finite term universe.
pub fn materialize(store: &mut TripleStore, schema: &SemanticSchema) {
    let worklist: Vec<Triple> = store.iter().cloned().collect();
    materialize_from(store, schema, worklist);
}

/// Worklist closure seeded from the given triples; the rest of the
/// store is assumed already closed. Returns the triples actually added.
pub fn materialize_from(
    store: &mut TripleStore,
    schema: &SemanticSchema,
    mut worklist: Vec<Triple>,
) -> Vec<Triple> {
    // Strict superclass and superproperty closures, precomputed so one
    // derivation step reaches every ancestor.
    let mut supers: BTreeMap<Name, Vec<Name>> = BTreeMap::new();
    for class in schema.classes.keys() {
        let mut cl: Vec<Name> = schema
            .supers_closure(class)
            .into_iter()
            .filter(|c| c != class)
            .collect();
        cl.sort();
        supers.insert(class.clone(), cl);
    }
    let mut sub_props: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
    for (sub, sup) in &schema.sub_properties {
        sub_props.entry(sub.clone()).or_default().insert(sup.clone());
    }

    let mut added = Vec::new();
    while let Some(t) = worklist.pop() {
        let mut consequences: Vec<Triple> = Vec::new();
        let pred = match t.predicate.as_name() {
            Some(p) => p.clone(),
            None => continue,
        };
        if pred.is_type_pred() {
            if let Term::Name(class) = &t.object {
                if let Some(ups) = supers.get(class) {
                    for up in ups {
                        consequences.push(Triple::new(
                            t.subject.clone(),
                            Term::Name(Name::type_pred()),
                            Term::Name(up.clone()),
                        ));
                    }
                }
            }
        } else {
            if let Some(sups) = sub_props.get(&pred) {
                for sup in sups {
                    consequences.push(Triple::new(
                        t.subject.clone(),
                        Term::Name(sup.clone()),
                        t.object.clone(),
                    ));
                }
            }
            if let Some((base, _)) = schema.ordered_index_base(&pred) {
                consequences.push(Triple::new(
                    t.subject.clone(),
                    Term::Name(base),
                    t.object.clone(),
                ));
            }
            if let Some(prop) = schema.object_props.get(&pred) {
                if let (Some(inv), Term::Name(obj)) = (&prop.inverse, &t.object) {
                    consequences.push(Triple::new(
                        Term::Name(obj.clone()),
                        Term::Name(inv.clone()),
                        t.subject.clone(),
                    ));
                }
                if prop.characteristics.contains(&Characteristic::Transitive) {
                    if let (Some(subj), Some(obj)) = (t.subject.as_name(), t.object.as_name()) {
                        for next in store.matching(Some(obj), Some(&pred), None) {
                            consequences.push(Triple::new(
                                t.subject.clone(),
                                t.predicate.clone(),
                                next.object.clone(),
                            ));
                        }
                        for prev in store.matching(None, Some(&pred), Some(&Term::Name(subj.clone()))) {
                            consequences.push(Triple::new(
                                prev.subject.clone(),
                                t.predicate.clone(),
                                t.object.clone(),
                            ));
                        }
                    }
                }
            }
            for chain in &schema.chains {
                if pred == chain.first {
                    if let Some(mid) = t.object.as_name() {
                        for second in store.matching(Some(mid), Some(&chain.second), None) {
                            consequences.push(Triple::new(
                                t.subject.clone(),
                                Term::Name(chain.target.clone()),
                                second.object.clone(),
                            ));
                        }
                    }
                }
                if pred == chain.second {
                    if let Some(mid) = t.subject.as_name() {
                        for first in
                            store.matching(None, Some(&chain.first), Some(&Term::Name(mid.clone())))
                        {
                            consequences.push(Triple::new(
                                first.subject.clone(),
                                Term::Name(chain.target.clone()),
                                t.object.clone(),
                            ));
                        }
                    }
                }
            }
        }
        for c in consequences {
            // Derivations of well-formed triples are well-formed.
            if store.add(c.clone()).unwrap_or(false) {
                worklist.push(c.clone());
                added.push(c);
            }
        }
    }
    added.sort();
    added
}

/// `materialize` on a copy.
pub fn materialized(store: &TripleStore, schema: &SemanticSchema) -> TripleStore {
    let mut out = store.clone();
    materialize(&mut out, schema);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StructuralViolationKind {
    DomainRange,
    Cardinality,
    CompositionMultiOwner,
    PartWholeCycle,
    Disjointness,
    Enumeration,
    OrderIndex,
}

impl StructuralViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StructuralViolationKind::DomainRange => "DomainRange",
            StructuralViolationKind::Cardinality => "Cardinality",
            StructuralViolationKind::CompositionMultiOwner => "CompositionMultiOwner",
            StructuralViolationKind::PartWholeCycle => "PartWholeCycle",
            StructuralViolationKind::Disjointness => "Disjointness",
            StructuralViolationKind::Enumeration => "Enumeration",
            StructuralViolationKind::OrderIndex => "OrderIndex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StructuralViolation {
    pub kind: StructuralViolationKind,
    pub subject: Name,
    pub detail: String,
    pub witness: Triple,
}

impl fmt::Display for StructuralViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {} [{}]", self.kind.as_str(), self.subject, self.detail, self.witness)
    }
}

/// Checks a materialized store against the schema. Violations are
/// returned in a deterministic order and each cites a witness triple.
pub fn check_structural(store: &TripleStore, schema: &SemanticSchema) -> Vec<StructuralViolation> {
    let mut out: Vec<StructuralViolation> = Vec::new();
    let type_of = |subject: &Name| -> Option<Triple> {
        store
            .matching(Some(subject), Some(&Name::type_pred()), None)
            .next()
            .cloned()
    };
    let has_type = |subject: &Term, class: &Name| -> bool {
        match subject.as_name() {
            Some(s) => store.contains(&Triple::new(
                Term::Name(s.clone()),
                Term::Name(Name::type_pred()),
                Term::Name(class.clone()),
            )),
            None => false,
        }
    };

    // Domain, range, and declaredness of every asserted triple.
    for t in store.iter() {
        let subject = match t.subject.as_name() {
            Some(s) => s.clone(),
            None => continue,
        };
        let pred = match t.predicate.as_name() {
            Some(p) => p.clone(),
            None => continue,
        };
        if pred.is_type_pred() {
            match t.object.as_name() {
                Some(class) if schema.has_class(class) => {}
                _ => out.push(StructuralViolation {
                    kind: StructuralViolationKind::DomainRange,
                    subject,
                    detail: format!("typed with undeclared class {}", t.object.canonical()),
                    witness: t.clone(),
                }),
            }
            continue;
        }
        let effective = match schema.ordered_index_base(&pred) {
            Some((base, _)) => base,
            None => pred.clone(),
        };
        if let Some(dp) = schema.datatype_props.get(&effective) {
            match t.object.as_literal() {
                Some(lit) if dp.range.matches(lit) => {}
                Some(lit) => out.push(StructuralViolation {
                    kind: StructuralViolationKind::DomainRange,
                    subject: subject.clone(),
                    detail: format!(
                        "value {} has tag {}, {} expects {}",
                        lit.canonical(),
                        lit.tag(),
                        effective,
                        dp.range
                    ),
                    witness: t.clone(),
                }),
                None => out.push(StructuralViolation {
                    kind: StructuralViolationKind::DomainRange,
                    subject: subject.clone(),
                    detail: format!("{} expects a {} literal, found {}", effective, dp.range, t.object.canonical()),
                    witness: t.clone(),
                }),
            }
            if !has_type(&t.subject, &dp.domain) {
                out.push(StructuralViolation {
                    kind: StructuralViolationKind::DomainRange,
                    subject,
                    detail: format!("subject is not a {} (domain of {})", dp.domain, effective),
                    witness: t.clone(),
                });
            }
        } else if let Some(op) = schema.object_props.get(&effective) {
            if t.object.as_name().is_none() {
                out.push(StructuralViolation {
                    kind: StructuralViolationKind::DomainRange,
                    subject: subject.clone(),
                    detail: format!("{} expects an individual, found {}", effective, t.object.canonical()),
                    witness: t.clone(),
                });
            } else if let Some(range) = &op.range {
                if !has_type(&t.object, range) {
                    out.push(StructuralViolation {
                        kind: StructuralViolationKind::DomainRange,
                        subject: subject.clone(),
                        detail: format!("object is not a {} (range of {})", range, effective),
                        witness: t.clone(),
                    });
                }
            }
            if let Some(domain) = &op.domain {
                if !has_type(&t.subject, domain) {
                    out.push(StructuralViolation {
                        kind: StructuralViolationKind::DomainRange,
                        subject,
                        detail: format!("subject is not a {} (domain of {})", domain, effective),
                        witness: t.clone(),
                    });
                }
            }
        } else {
            out.push(StructuralViolation {
                kind: StructuralViolationKind::DomainRange,
                subject,
                detail: format!("undeclared property {}", pred),
                witness: t.clone(),
            });
        }
    }

    // Cardinality. Minimums apply to instances of the property's domain;
    // maximums to any asserting subject. Composition part sides are
    // reported as CompositionMultiOwner instead.
    let mut card_props: Vec<(Name, Name, u32, Option<u32>, bool)> = Vec::new();
    for (name, p) in &schema.datatype_props {
        card_props.push((name.clone(), p.domain.clone(), p.min_card, p.max_card, false));
    }
    for (name, p) in &schema.object_props {
        if let Some(domain) = &p.domain {
            card_props.push((
                name.clone(),
                domain.clone(),
                p.min_card,
                p.max_card,
                p.composition_part_side,
            ));
        }
    }
    for (prop, domain, min, max, part_side) in card_props {
        if part_side {
            for instance in store.instances_of(&domain) {
                let count = store.matching(Some(&instance), Some(&prop), None).count();
                if count != 1 {
                    let witness = store
                        .matching(Some(&instance), Some(&prop), None)
                        .next()
                        .cloned()
                        .or_else(|| type_of(&instance))
                        .expect("typed instance has a type triple");
                    out.push(StructuralViolation {
                        kind: StructuralViolationKind::CompositionMultiOwner,
                        subject: instance.clone(),
                        detail: format!("part has {} wholes via {}, expected exactly 1", count, prop),
                        witness,
                    });
                }
            }
            continue;
        }
        if min > 0 {
            for instance in store.instances_of(&domain) {
                let count = store.matching(Some(&instance), Some(&prop), None).count();
                if (count as u32) < min {
                    let witness = type_of(&instance).expect("typed instance has a type triple");
                    out.push(StructuralViolation {
                        kind: StructuralViolationKind::Cardinality,
                        subject: instance.clone(),
                        detail: format!("{} values of {}, minimum is {}", count, prop, min),
                        witness,
                    });
                }
            }
        }
        if let Some(max) = max {
            let mut subjects: BTreeSet<Name> = BTreeSet::new();
            for t in store.matching(None, Some(&prop), None) {
                if let Some(s) = t.subject.as_name() {
                    subjects.insert(s.clone());
                }
            }
            for subject in subjects {
                let count = store.matching(Some(&subject), Some(&prop), None).count();
                if (count as u32) > max {
                    let witness = store
                        .matching(Some(&subject), Some(&prop), None)
                        .next()
                        .cloned()
                        .expect("counted subject has a triple");
                    out.push(StructuralViolation {
                        kind: StructuralViolationKind::Cardinality,
                        subject,
                        detail: format!("{} values of {}, maximum is {}", count, prop, max),
                        witness,
                    });
                }
            }
        }
    }

    // Part-whole cycles (irreflexivity, including across levels).
    let forward_props: Vec<Name> = schema
        .object_props
        .iter()
        .filter(|(_, p)| p.part_whole_forward)
        .map(|(n, _)| n.clone())
        .collect();
    let mut edges: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
    let mut edge_witness: BTreeMap<(Name, Name), Triple> = BTreeMap::new();
    for prop in &forward_props {
        for t in store.matching(None, Some(prop), None) {
            if let (Some(s), Some(o)) = (t.subject.as_name(), t.object.as_name()) {
                edges.entry(s.clone()).or_default().insert(o.clone());
                edge_witness.entry((s.clone(), o.clone())).or_insert_with(|| t.clone());
            }
        }
    }
    for start in edges.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<Name> = edges[start].iter().cloned().collect();
        let mut cyclic = false;
        while let Some(node) = stack.pop() {
            if &node == start {
                cyclic = true;
                break;
            }
            if seen.insert(node.clone()) {
                if let Some(next) = edges.get(&node) {
                    stack.extend(next.iter().cloned());
                }
            }
        }
        if cyclic {
            let first = edges[start].iter().next().expect("non-empty edge set");
            let witness = edge_witness[&(start.clone(), first.clone())].clone();
            out.push(StructuralViolation {
                kind: StructuralViolationKind::PartWholeCycle,
                subject: start.clone(),
                detail: "instance reaches itself through part-whole links".into(),
                witness,
            });
        }
    }

    // Disjointness.
    for set in &schema.disjoint_sets {
        let members: Vec<&Name> = set.iter().collect();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                let in_a: BTreeSet<Name> = store.instances_of(a).into_iter().collect();
                for instance in store.instances_of(b) {
                    if in_a.contains(&instance) {
                        let witness = store
                            .matching(
                                Some(&instance),
                                Some(&Name::type_pred()),
                                Some(&Term::Name((*b).clone())),
                            )
                            .next()
                            .cloned()
                            .expect("instance has the type triple");
                        out.push(StructuralViolation {
                            kind: StructuralViolationKind::Disjointness,
                            subject: instance,
                            detail: format!("typed with disjoint classes {} and {}", a, b),
                            witness,
                        });
                    }
                }
            }
        }
    }

    // Enumerations.
    for (prop, allowed) in &schema.enumerations {
        for t in store.matching(None, Some(prop), None) {
            let ok = t.object.as_literal().is_some_and(|l| allowed.contains(l));
            if !ok {
                let subject = t.subject.as_name().cloned().unwrap_or_else(|| Name::new("?"));
                out.push(StructuralViolation {
                    kind: StructuralViolationKind::Enumeration,
                    subject,
                    detail: format!("value {} is outside the {} partition", t.object.canonical(), prop),
                    witness: t.clone(),
                });
            }
        }
    }

    // Ordered index properties: per subject, indexes are duplicate-free
    // and contiguous from 1.
    let ordered_props: Vec<Name> = schema
        .object_props
        .iter()
        .filter(|(_, p)| p.ordered)
        .map(|(n, _)| n.clone())
        .collect();
    for base in &ordered_props {
        let mut per_subject: BTreeMap<Name, Vec<(u32, Triple)>> = BTreeMap::new();
        for t in store.iter() {
            if let Some(p) = t.predicate.as_name() {
                if let Some((b, idx)) = schema.ordered_index_base(p) {
                    if &b == base {
                        if let Some(s) = t.subject.as_name() {
                            per_subject.entry(s.clone()).or_default().push((idx, t.clone()));
                        }
                    }
                }
            }
        }
        for (subject, mut entries) in per_subject {
            entries.sort();
            let indexes: Vec<u32> = entries.iter().map(|(i, _)| *i).collect();
            let mut distinct = indexes.clone();
            distinct.dedup();
            if distinct.len() != indexes.len() {
                out.push(StructuralViolation {
                    kind: StructuralViolationKind::OrderIndex,
                    subject: subject.clone(),
                    detail: format!("duplicate index on ordered property {}", base),
                    witness: entries[0].1.clone(),
                });
                continue;
            }
            let expected: Vec<u32> = (1..=indexes.len() as u32).collect();
            if indexes != expected {
                out.push(StructuralViolation {
                    kind: StructuralViolationKind::OrderIndex,
                    subject,
                    detail: format!("indexes {:?} on ordered property {} are not 1..={}", indexes, base, indexes.len()),
                    witness: entries[0].1.clone(),
                });
            }
        }
    }

    out.sort();
    out.dedup();
    out
}

const AXIOM_CLASS: &str = "axiom:Class";
const AXIOM_DATATYPE_PROPERTY: &str = "axiom:DatatypeProperty";
const AXIOM_OBJECT_PROPERTY: &str = "axiom:ObjectProperty";

/// Serializes the schema as triples over the `axiom:` vocabulary
/// documented in the README. Deterministic; round-trips through the
/// canonical triple text format.
pub fn schema_to_triples(schema: &SemanticSchema) -> TripleStore {
    let mut store = TripleStore::new();
    let mut add = |s: Name, p: &str, o: Term| {
        store
            .add(Triple::new(Term::Name(s), Term::name(p), o))
            .expect("schema triples are ground");
    };

    for (class, axiom) in &schema.classes {
        add(class.clone(), "a", Term::name(AXIOM_CLASS));
        if axiom.is_abstract {
            add(class.clone(), "axiom:abstract", Term::bool(true));
        }
        for sup in &axiom.supers {
            add(class.clone(), "axiom:subClassOf", Term::Name(sup.clone()));
        }
    }
    for set in &schema.disjoint_sets {
        let members: Vec<&Name> = set.iter().collect();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                add((*a).clone(), "axiom:disjointWith", Term::Name((*b).clone()));
            }
        }
    }
    for (name, p) in &schema.datatype_props {
        add(name.clone(), "a", Term::name(AXIOM_DATATYPE_PROPERTY));
        add(name.clone(), "axiom:domain", Term::Name(p.domain.clone()));
        add(name.clone(), "axiom:datatype", Term::str(p.range.as_str()));
        if p.min_card > 0 {
            add(name.clone(), "axiom:minCardinality", Term::int(p.min_card as i64));
        }
        if let Some(max) = p.max_card {
            add(name.clone(), "axiom:maxCardinality", Term::int(max as i64));
        }
        if let Some(default) = &p.default {
            add(name.clone(), "axiom:defaultValue", Term::Literal(default.clone()));
        }
    }
    for (name, p) in &schema.object_props {
        add(name.clone(), "a", Term::name(AXIOM_OBJECT_PROPERTY));
        if let Some(domain) = &p.domain {
            add(name.clone(), "axiom:domain", Term::Name(domain.clone()));
        }
        if let Some(range) = &p.range {
            add(name.clone(), "axiom:range", Term::Name(range.clone()));
        }
        if let Some(inv) = &p.inverse {
            add(name.clone(), "axiom:inverseOf", Term::Name(inv.clone()));
        }
        for ch in &p.characteristics {
            add(
                name.clone(),
                "axiom:characteristic",
                Term::name(format!("axiom:{}", ch.as_str())),
            );
        }
        if p.min_card > 0 {
            add(name.clone(), "axiom:minCardinality", Term::int(p.min_card as i64));
        }
        if let Some(max) = p.max_card {
            add(name.clone(), "axiom:maxCardinality", Term::int(max as i64));
        }
        if p.ordered {
            add(name.clone(), "axiom:ordered", Term::bool(true));
        }
    }
    for (sub, sup) in &schema.sub_properties {
        add(sub.clone(), "axiom:subPropertyOf", Term::Name(sup.clone()));
    }
    for (prop, values) in &schema.enumerations {
        for v in values {
            add(prop.clone(), "axiom:allowedValue", Term::Literal(v.clone()));
        }
    }
    for (i, chain) in schema.chains.iter().enumerate() {
        let node = Name::new(format!("{}_chain{}", chain.target, i + 1));
        add(node.clone(), "axiom:chainFirst", Term::Name(chain.first.clone()));
        add(node.clone(), "axiom:chainSecond", Term::Name(chain.second.clone()));
        add(node, "axiom:chainTarget", Term::Name(chain.target.clone()));
    }
    for r in &schema.restrictions {
        let pred = if r.property.local() == "hasPart" {
            "axiom:hasPartOnly"
        } else {
            "axiom:partOfOnly"
        };
        add(r.class.clone(), pred, Term::Name(r.filler.clone()));
    }
    store
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    /// A two-level part-whole model shaped like a treatment plan holding
    /// orders.
    fn plan_model() -> UmlClassModel {
        UmlClassModel {
            classes: vec![
                ClassDecl { name: n("m:Case"), is_abstract: false },
                ClassDecl { name: n("m:Plan"), is_abstract: false },
                ClassDecl { name: n("m:Order"), is_abstract: false },
            ],
            attributes: vec![AttributeDecl {
                owner: n("m:Plan"),
                name: n("m:planState"),
                datatype: RangeTag::String,
                multiplicity: Multiplicity::OPTIONAL,
                default: None,
            }],
            associations: vec![
                AssociationDecl {
                    name: n("m:hasPlan"),
                    source: n("m:Case"),
                    target: n("m:Plan"),
                    kind: AssociationKind::Composition,
                    source_mult: Multiplicity::ONE,
                    target_mult: Multiplicity::MANY,
                    ordered: false,
                    unique: true,
                    inverse: Some(n("m:planOf")),
                    extends: None,
                },
                AssociationDecl {
                    name: n("m:hasOrder"),
                    source: n("m:Plan"),
                    target: n("m:Order"),
                    kind: AssociationKind::Composition,
                    source_mult: Multiplicity::ONE,
                    target_mult: Multiplicity::MANY,
                    ordered: false,
                    unique: true,
                    inverse: Some(n("m:orderOf")),
                    extends: None,
                },
            ],
            class_generalizations: vec![],
            value_partitions: vec![],
        }
    }

    #[test]
    fn composition_per_association() {
        let schema = translate(&plan_model(), &TranslationOptions::default()).unwrap();
        let has_order = &schema.object_props[&n("m:hasOrder")];
        assert!(has_order.characteristics.contains(&Characteristic::Irreflexive));
        assert!(has_order.characteristics.contains(&Characteristic::InverseFunctional));
        let order_of = &schema.object_props[&n("m:orderOf")];
        assert_eq!(order_of.min_card, 1);
        assert_eq!(order_of.max_card, Some(1));
        assert!(order_of.composition_part_side);
        // One two-step path: hasPlan then hasOrder.
        assert_eq!(schema.chains.len(), 1);
        assert_eq!(schema.chains[0].first, n("m:hasPlan"));
        assert_eq!(schema.chains[0].second, n("m:hasOrder"));
        assert!(schema.warnings.is_empty());
    }

    #[test]
    fn single_has_part_is_transitive_and_warns() {
        let options = TranslationOptions {
            part_whole: PartWholeStrategy::SingleHasPart,
            ..Default::default()
        };
        let schema = translate(&plan_model(), &options).unwrap();
        let transitive: Vec<&Name> = schema
            .object_props
            .iter()
            .filter(|(_, p)| p.characteristics.contains(&Characteristic::Transitive))
            .map(|(name, _)| name)
            .collect();
        assert_eq!(transitive, vec![&n("m:partOf")]);
        let part_of = &schema.object_props[&n("m:partOf")];
        assert_eq!(part_of.domain, None);
        assert_eq!(part_of.range, None);
        assert_eq!(part_of.max_card, None);
        assert_eq!(schema.warnings.len(), 2);
        assert!(schema.chains.is_empty());
        assert_eq!(schema.restrictions.len(), 4);
    }

    #[test]
    fn empty_model_translates_to_empty_schema() {
        let schema = translate(&UmlClassModel::default(), &TranslationOptions::default()).unwrap();
        assert_eq!(schema, SemanticSchema::default());
    }

    fn partition_values(texts: &[&str]) -> Vec<PartitionValue> {
        texts
            .iter()
            .map(|t| PartitionValue { text: t.to_string(), children: vec![] })
            .collect()
    }

    #[test]
    fn partition_as_disjoint_individuals() {
        let mut model = plan_model();
        model.value_partitions.push(ValuePartition {
            owner: n("m:Plan"),
            attribute: n("m:planState"),
            values: partition_values(&["progressing", "hung", "approved", "complete"]),
        });
        let schema = translate(&model, &TranslationOptions::default()).unwrap();
        let allowed = &schema.enumerations[&n("m:planState")];
        assert_eq!(allowed.len(), 4);
        assert!(allowed.contains(&Literal::str("hung")));
        assert!(schema.disjoint_sets.is_empty());
    }

    #[test]
    fn partition_as_disjoint_subclasses_allows_subpartition() {
        let mut model = plan_model();
        model.value_partitions.push(ValuePartition {
            owner: n("m:Plan"),
            attribute: n("m:planState"),
            values: vec![
                PartitionValue {
                    text: "progressing".into(),
                    children: partition_values(&["slowly progressing", "quickly progressing"]),
                },
                PartitionValue { text: "hung".into(), children: vec![] },
                PartitionValue { text: "approved".into(), children: vec![] },
                PartitionValue { text: "complete".into(), children: vec![] },
            ],
        });
        let options = TranslationOptions {
            value_partition: ValuePartitionStrategy::DisjointSubclasses,
            ..Default::default()
        };
        let schema = translate(&model, &options).unwrap();
        assert!(schema.classes.contains_key(&n("m:PlanState")));
        let progressing = &schema.classes[&n("m:Progressing")];
        assert!(progressing.supers.contains(&n("m:PlanState")));
        let slowly = &schema.classes[&n("m:SlowlyProgressing")];
        assert!(slowly.supers.contains(&n("m:Progressing")));
        // Top-level values are pairwise disjoint, and so are the children.
        assert_eq!(schema.disjoint_sets.len(), 2);

        // Sub-partitioning is rejected under disjoint individuals.
        let err = translate(&model, &TranslationOptions::default());
        assert!(matches!(err, Err(TranslateError::SubPartitionNotAllowed(_, _))));
    }

    #[test]
    fn single_value_partition_has_no_disjointness() {
        let mut model = plan_model();
        model.value_partitions.push(ValuePartition {
            owner: n("m:Plan"),
            attribute: n("m:planState"),
            values: partition_values(&["only"]),
        });
        let options = TranslationOptions {
            value_partition: ValuePartitionStrategy::DisjointSubclasses,
            ..Default::default()
        };
        let schema = translate(&model, &options).unwrap();
        assert!(schema.disjoint_sets.is_empty());
        assert!(schema.classes.contains_key(&n("m:Only")));

        model.value_partitions[0].values.clear();
        assert!(matches!(
            translate(&model, &options),
            Err(TranslateError::EmptyPartition(_))
        ));
    }

    #[test]
    fn association_generalization_becomes_subproperty() {
        let mut model = plan_model();
        model.associations.push(AssociationDecl {
            name: n("m:hasUrgentOrder"),
            source: n("m:Plan"),
            target: n("m:Order"),
            kind: AssociationKind::Plain,
            source_mult: Multiplicity::MANY,
            target_mult: Multiplicity::MANY,
            ordered: false,
            unique: false,
            inverse: None,
            extends: Some(n("m:hasOrder")),
        });
        let schema = translate(&model, &TranslationOptions::default()).unwrap();
        assert!(schema
            .sub_properties
            .contains(&(n("m:hasUrgentOrder"), n("m:hasOrder"))));
        // Sub-property assertions close onto the super property.
        let mut store: TripleStore = [
            tr("m:p1", "a", Term::name("m:Plan")),
            tr("m:o1", "a", Term::name("m:Order")),
            tr("m:p1", "m:hasUrgentOrder", Term::name("m:o1")),
        ]
        .into_iter()
        .collect();
        materialize(&mut store, &schema);
        assert!(store.contains(&tr("m:p1", "m:hasOrder", Term::name("m:o1"))));
        assert!(store.contains(&tr("m:o1", "m:orderOf", Term::name("m:p1"))));
    }

    #[test]
    fn generated_inverse_name() {
        let mut model = plan_model();
        model.associations[0].inverse = None;
        let schema = translate(&model, &TranslationOptions::default()).unwrap();
        assert!(schema.object_props.contains_key(&n("m:hasPlan_inv")));
        assert_eq!(schema.object_props[&n("m:hasPlan")].inverse, Some(n("m:hasPlan_inv")));
    }

    #[test]
    fn duplicate_property_is_rejected() {
        let mut model = plan_model();
        model.attributes.push(AttributeDecl {
            owner: n("m:Order"),
            name: n("m:planState"),
            datatype: RangeTag::String,
            multiplicity: Multiplicity::OPTIONAL,
            default: None,
        });
        assert!(matches!(
            translate(&model, &TranslationOptions::default()),
            Err(TranslateError::DuplicateProperty(_))
        ));
    }

    fn tr(s: &str, p: &str, o: Term) -> Triple {
        Triple::new(Term::name(s), Term::name(p), o)
    }

    #[test]
    fn materialize_subclass_inverse_and_chain() {
        let mut model = plan_model();
        model.classes.push(ClassDecl { name: n("m:LabOrder"), is_abstract: false });
        model.class_generalizations.push((n("m:LabOrder"), n("m:Order")));
        let schema = translate(&model, &TranslationOptions::default()).unwrap();
        let mut store: TripleStore = [
            tr("m:c1", "a", Term::name("m:Case")),
            tr("m:p1", "a", Term::name("m:Plan")),
            tr("m:o1", "a", Term::name("m:LabOrder")),
            tr("m:c1", "m:hasPlan", Term::name("m:p1")),
            tr("m:p1", "m:hasOrder", Term::name("m:o1")),
        ]
        .into_iter()
        .collect();
        materialize(&mut store, &schema);
        assert!(store.contains(&tr("m:o1", "a", Term::name("m:Order"))));
        assert!(store.contains(&tr("m:o1", "m:orderOf", Term::name("m:p1"))));
        assert!(store.contains(&tr("m:c1", "m:hasPart_generated", Term::name("m:o1"))));
        let again = materialized(&store, &schema);
        assert_eq!(again, store);
    }

    #[test]
    fn structural_checks_find_seeded_defects() {
        let schema = translate(&plan_model(), &TranslationOptions::default()).unwrap();
        // o1 held by two plans.
        let store: TripleStore = [
            tr("m:p1", "a", Term::name("m:Plan")),
            tr("m:p2", "a", Term::name("m:Plan")),
            tr("m:o1", "a", Term::name("m:Order")),
            tr("m:p1", "m:hasOrder", Term::name("m:o1")),
            tr("m:p2", "m:hasOrder", Term::name("m:o1")),
            tr("m:o1", "m:orderOf", Term::name("m:p1")),
            tr("m:o1", "m:orderOf", Term::name("m:p2")),
        ]
        .into_iter()
        .collect();
        let violations = check_structural(&store, &schema);
        assert!(violations
            .iter()
            .any(|v| v.kind == StructuralViolationKind::CompositionMultiOwner && v.subject == n("m:o1")));

        // A plan that is its own order: part-whole cycle.
        let store: TripleStore = [
            tr("m:p1", "a", Term::name("m:Plan")),
            tr("m:p1", "a", Term::name("m:Order")),
            tr("m:p1", "m:hasOrder", Term::name("m:p1")),
            tr("m:p1", "m:orderOf", Term::name("m:p1")),
        ]
        .into_iter()
        .collect();
        let violations = check_structural(&store, &schema);
        assert!(violations
            .iter()
            .any(|v| v.kind == StructuralViolationKind::PartWholeCycle && v.subject == n("m:p1")));
    }

    #[test]
    fn disjointness_violation_under_subclass_partition() {
        let mut model = plan_model();
        model.value_partitions.push(ValuePartition {
            owner: n("m:Plan"),
            attribute: n("m:planState"),
            values: partition_values(&["progressing", "hung"]),
        });
        let options = TranslationOptions {
            value_partition: ValuePartitionStrategy::DisjointSubclasses,
            ..Default::default()
        };
        let schema = translate(&model, &options).unwrap();
        let store: TripleStore = [
            tr("m:s1", "a", Term::name("m:Progressing")),
            tr("m:s1", "a", Term::name("m:Hung")),
            tr("m:s1", "a", Term::name("m:PlanState")),
        ]
        .into_iter()
        .collect();
        let violations = check_structural(&store, &schema);
        assert_eq!(violations.iter().filter(|v| v.kind == StructuralViolationKind::Disjointness).count(), 1);
    }

    #[test]
    fn enumeration_violation() {
        let mut model = plan_model();
        model.value_partitions.push(ValuePartition {
            owner: n("m:Plan"),
            attribute: n("m:planState"),
            values: partition_values(&["progressing", "hung"]),
        });
        let schema = translate(&model, &TranslationOptions::default()).unwrap();
        let store: TripleStore = [
            tr("m:p1", "a", Term::name("m:Plan")),
            tr("m:p1", "m:planState", Term::str("stalled")),
        ]
        .into_iter()
        .collect();
        let violations = check_structural(&store, &schema);
        assert_eq!(violations.iter().filter(|v| v.kind == StructuralViolationKind::Enumeration).count(), 1);
    }

    #[test]
    fn ordered_index_gaps_and_duplicates() {
        let mut model = plan_model();
        model.associations[1].ordered = true;
        let schema = translate(&model, &TranslationOptions::default()).unwrap();
        assert!(schema.ordered_index_base(&n("m:hasOrder_2")).is_some());
        let store: TripleStore = [
            tr("m:p1", "a", Term::name("m:Plan")),
            tr("m:o1", "a", Term::name("m:Order")),
            tr("m:o3", "a", Term::name("m:Order")),
            tr("m:p1", "m:hasOrder_1", Term::name("m:o1")),
            tr("m:p1", "m:hasOrder_3", Term::name("m:o3")),
        ]
        .into_iter()
        .collect();
        let store = materialized(&store, &schema);
        // Index closure asserts the base property.
        assert!(store.contains(&tr("m:p1", "m:hasOrder", Term::name("m:o1"))));
        let violations = check_structural(&store, &schema);
        assert!(violations
            .iter()
            .any(|v| v.kind == StructuralViolationKind::OrderIndex && v.detail.contains("[1, 3]")));
    }

    #[test]
    fn export_shapes() {
        let schema = translate(&plan_model(), &TranslationOptions::default()).unwrap();
        let text = schema_to_triples(&schema).serialize();
        assert!(text.contains("m:orderOf axiom:maxCardinality 1 ."));
        assert!(text.contains("m:orderOf axiom:minCardinality 1 ."));
        assert!(text.contains("axiom:chainFirst m:hasPlan ."));
        assert!(text.contains("m:hasOrder axiom:characteristic axiom:Irreflexive ."));
    }
}
