//! Solvability verification of the declared state machine: per-type
//! transition graphs extracted from the rules, reachability, deadlock
//! freedom under a bounded environment model, and cohesion between the
//! rules and the class schema.
//!
//! Deadlock is decided over the declared property mutability model:
//! immutable properties are fixed at creation, environment properties
//! may change between engine runs, rule-owned properties are written
//! only by rules. A reachable non-final state deadlocks under an
//! immutable valuation when no outgoing guard is satisfiable for any
//! environment valuation; guard satisfiability is decided by running the
//! real matcher against a small probe store built from the valuation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::pattern::{eval_ask, Binding, Clock, Diagnostics, GraphPattern, PatternError};
use crate::rules::TransitionRule;
use crate::schema::{RangeTag, SemanticSchema};
use crate::store::TripleStore;
use crate::term::{Literal, Name, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("rule {rule} must delete and insert exactly one {property} triple for one tracked object: {detail}")]
    MalformedRule {
        rule: String,
        property: Name,
        detail: String,
    },
    #[error("property {0} appears in a rule guard but has no mutability class")]
    UnclassifiedProperty(Name),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Declared state machine for a subject class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachineDecl {
    pub subject: Name,
    pub state_property: Name,
    pub states: Vec<String>,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub transitions: Vec<TransitionDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDecl {
    pub id: String,
    pub source: String,
    pub target: String,
    pub applies_to: Option<Name>,
}

/// Mutability class of a property under the environment model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mutability {
    Immutable,
    Environment,
    RuleOwned,
}

impl Mutability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mutability::Immutable => "immutable",
            Mutability::Environment => "environment",
            Mutability::RuleOwned => "rule-owned",
        }
    }
}

/// An abstract value a property can take in the bounded domains used by
/// the deadlock check.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DomainValue {
    /// No triple for the property.
    Absent,
    /// Some value, identity irrelevant to every guard.
    Present,
    /// A dateTime strictly before the evaluation clock.
    Past,
    /// A dateTime strictly after the evaluation clock.
    Future,
    /// This exact literal.
    Lit(Literal),
}

impl fmt::Display for DomainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainValue::Absent => f.write_str("absent"),
            DomainValue::Present => f.write_str("present"),
            DomainValue::Past => f.write_str("past"),
            DomainValue::Future => f.write_str("future"),
            DomainValue::Lit(l) => f.write_str(&l.canonical()),
        }
    }
}

impl DomainValue {
    /// Concrete literal standing in for this abstract value, or None for
    /// Absent.
    pub fn concretize(&self, range: Option<RangeTag>, clock: &Clock) -> Option<Literal> {
        match self {
            DomainValue::Absent => None,
            DomainValue::Past => Some(Literal::DateTime(clock.now().plus_days(-1))),
            DomainValue::Future => Some(Literal::DateTime(clock.now().plus_days(1))),
            DomainValue::Lit(l) => Some(l.clone()),
            DomainValue::Present => Some(match range {
                Some(RangeTag::String) | None => Literal::str("set"),
                Some(RangeTag::Integer) => Literal::Int(1),
                Some(RangeTag::Boolean) => Literal::Bool(true),
                Some(RangeTag::DateTime) => Literal::DateTime(clock.now()),
            }),
        }
    }
}

/// Per-property mutability classes and bounded test domains.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropertyMutability {
    pub entries: BTreeMap<Name, (Mutability, Vec<DomainValue>)>,
}

impl PropertyMutability {
    pub fn class_of(&self, prop: &Name) -> Option<Mutability> {
        self.entries.get(prop).map(|(m, _)| *m)
    }

    pub fn domain_of(&self, prop: &Name) -> &[DomainValue] {
        self.entries.get(prop).map(|(_, d)| d.as_slice()).unwrap_or(&[])
    }
}

/// One labeled edge per rule per applicable type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateGraph {
    pub per_type: BTreeMap<Name, Vec<Edge>>,
}

/// What the rule contributes to the graph: tracked object variable,
/// source and target state literals, and the guard's type restrictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleShape {
    pub rule: String,
    pub tracked: std::sync::Arc<str>,
    pub source: String,
    pub target: String,
    pub guard_types: Vec<Name>,
}

/// Reads the state-triple shape off one rule. The rule must delete
/// exactly one state triple and insert exactly one, for the same tracked
/// variable.
pub fn rule_shape(rule: &TransitionRule, decl: &StateMachineDecl) -> Result<RuleShape, MachineError> {
    let state_templates = |templates: &[Triple]| -> Vec<(std::sync::Arc<str>, String)> {
        templates
            .iter()
            .filter(|t| t.predicate.as_name() == Some(&decl.state_property))
            .filter_map(|t| match (&t.subject, &t.object) {
                (Term::Variable(v), Term::Literal(Literal::Str(s))) => {
                    Some((v.clone(), s.to_string()))
                }
                _ => None,
            })
            .collect()
    };
    let malformed = |detail: &str| MachineError::MalformedRule {
        rule: rule.id.clone(),
        property: decl.state_property.clone(),
        detail: detail.to_string(),
    };
    let deletes = state_templates(&rule.delete);
    let inserts = state_templates(&rule.insert);
    if deletes.len() != 1 || inserts.len() != 1 {
        return Err(malformed(&format!(
            "{} state deletions and {} state insertions",
            deletes.len(),
            inserts.len()
        )));
    }
    let (tracked, source) = deletes.into_iter().next().expect("one delete");
    let (ivar, target) = inserts.into_iter().next().expect("one insert");
    if tracked != ivar {
        return Err(malformed("state deletion and insertion track different objects"));
    }
    // The WHERE body's state atom, when present, must agree with DELETE.
    for atom in &rule.where_.atoms {
        if atom.predicate.as_name() == Some(&decl.state_property)
            && atom.subject.as_variable() == Some(&tracked)
        {
            if let Term::Literal(Literal::Str(s)) = &atom.object {
                if s.as_ref() != source {
                    return Err(malformed("WHERE and DELETE disagree on the source state"));
                }
            }
        }
    }
    let mut guard_types = Vec::new();
    for atom in &rule.where_.atoms {
        if atom.predicate.as_name().is_some_and(Name::is_type_pred)
            && atom.subject.as_variable() == Some(&tracked)
        {
            if let Term::Name(c) = &atom.object {
                guard_types.push(c.clone());
            }
        }
    }
    guard_types.sort();
    guard_types.dedup();
    Ok(RuleShape {
        rule: rule.id.clone(),
        tracked,
        source,
        target,
        guard_types,
    })
}

/// Concrete types the per-type analyses run over: every type named by a
/// rule's type guard, or the machine's subject class when no rule is
/// type-guarded.
pub fn analyzed_types(
    rules: &[TransitionRule],
    decl: &StateMachineDecl,
    schema: &SemanticSchema,
) -> Result<Vec<Name>, MachineError> {
    let mut types = BTreeSet::new();
    for rule in rules {
        for t in rule_shape(rule, decl)?.guard_types {
            types.insert(t);
        }
    }
    if types.is_empty() {
        types.insert(decl.subject.clone());
    }
    Ok(types
        .into_iter()
        .filter(|t| schema.has_class(t))
        .collect())
}

fn applies_to(shape: &RuleShape, ty: &Name, schema: &SemanticSchema) -> bool {
    shape.guard_types.iter().all(|g| schema.is_subclass(ty, g))
}

/// One edge per rule per applicable type; a rule without a type guard
/// applies to every analyzed type.
pub fn extract_state_graph(
    rules: &[TransitionRule],
    decl: &StateMachineDecl,
    schema: &SemanticSchema,
) -> Result<StateGraph, MachineError> {
    let types = analyzed_types(rules, decl, schema)?;
    let mut graph = StateGraph::default();
    for ty in &types {
        let mut edges = Vec::new();
        for rule in rules {
            let shape = rule_shape(rule, decl)?;
            if applies_to(&shape, ty, schema) {
                edges.push(Edge {
                    source: shape.source,
                    target: shape.target,
                    rule: shape.rule,
                });
            }
        }
        edges.sort();
        graph.per_type.insert(ty.clone(), edges);
    }
    Ok(graph)
}

/// Breadth-first reachability from the initial state.
pub fn check_reachability(
    graph: &StateGraph,
    decl: &StateMachineDecl,
) -> BTreeMap<Name, (BTreeSet<String>, BTreeSet<String>)> {
    let mut out = BTreeMap::new();
    for (ty, edges) in &graph.per_type {
        let mut reachable = BTreeSet::new();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(decl.initial.clone());
        while let Some(state) = queue.pop_front() {
            if !reachable.insert(state.clone()) {
                continue;
            }
            for edge in edges {
                if edge.source == state && !reachable.contains(&edge.target) {
                    queue.push_back(edge.target.clone());
                }
            }
        }
        let unreachable: BTreeSet<String> = decl
            .states
            .iter()
            .filter(|s| !reachable.contains(*s))
            .cloned()
            .collect();
        out.insert(ty.clone(), (reachable, unreachable));
    }
    out
}

/// An immutable valuation some reachable state cannot escape from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverageGap {
    pub state: String,
    pub valuation: BTreeMap<Name, DomainValue>,
}

impl CoverageGap {
    /// Renders only the properties with more than one candidate value;
    /// singleton domains carry no information.
    pub fn describe(&self, mutability: &PropertyMutability) -> String {
        let parts: Vec<String> = self
            .valuation
            .iter()
            .filter(|(p, _)| mutability.domain_of(p).len() > 1)
            .map(|(p, v)| format!("{}={}", p, v))
            .collect();
        if parts.is_empty() {
            format!("state \"{}\"", self.state)
        } else {
            format!("state \"{}\" under {}", self.state, parts.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeadlockAnalysis {
    /// States deadlocked under every immutable valuation.
    pub deadlocks: BTreeSet<String>,
    /// (state, valuation) pairs deadlocked under some but not all
    /// valuations.
    pub gaps: Vec<CoverageGap>,
}

fn cartesian(
    props: &[(Name, Vec<DomainValue>)],
) -> Vec<BTreeMap<Name, DomainValue>> {
    let mut out = vec![BTreeMap::new()];
    for (prop, domain) in props {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for base in &out {
            for value in domain {
                let mut v = base.clone();
                v.insert(prop.clone(), value.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Properties a pattern asserts about the given variable, in this
/// pattern or any nested group.
fn properties_of_var(pattern: &GraphPattern, var: &str, out: &mut BTreeSet<Name>) {
    for atom in &pattern.atoms {
        if atom.subject.as_variable() == Some(var) {
            if let Some(p) = atom.predicate.as_name() {
                if !p.is_type_pred() {
                    out.insert(p.clone());
                }
            }
        }
    }
    for (_, g) in &pattern.groups {
        properties_of_var(g, var, out);
    }
}

fn all_guard_properties(pattern: &GraphPattern, out: &mut BTreeSet<Name>) {
    for atom in &pattern.atoms {
        if let Some(p) = atom.predicate.as_name() {
            if !p.is_type_pred() {
                out.insert(p.clone());
            }
        }
    }
    for (_, g) in &pattern.groups {
        all_guard_properties(g, out);
    }
}

const PROBE_OBJECT: &str = "probe:o";
const PROBE_THIS: &str = "probe:t";

/// Builds the single-object world the guard satisfiability probe runs
/// against: one tracked instance of `ty` in state `state` with the given
/// property valuation, and one instance of the rule's attached class
/// whose own guard atoms are satisfied by construction.
#[allow(clippy::too_many_arguments)]
fn probe_store(
    ty: &Name,
    state: &str,
    valuation: &BTreeMap<Name, DomainValue>,
    rule: &TransitionRule,
    shape: &RuleShape,
    decl: &StateMachineDecl,
    schema: &SemanticSchema,
    clock: &Clock,
) -> TripleStore {
    let mut store = TripleStore::new();
    let obj = Name::new(PROBE_OBJECT);
    let this = Name::new(PROBE_THIS);
    let mut add = |t: Triple| {
        store.add(t).expect("probe triples are ground");
    };
    for class in schema.supers_closure(ty) {
        add(Triple::new(Term::Name(obj.clone()), Term::Name(Name::type_pred()), Term::Name(class)));
    }
    for class in schema.supers_closure(&rule.attached_class) {
        add(Triple::new(Term::Name(this.clone()), Term::Name(Name::type_pred()), Term::Name(class)));
    }
    add(Triple::new(
        Term::Name(obj.clone()),
        Term::Name(decl.state_property.clone()),
        Term::str(state),
    ));
    for (prop, value) in valuation {
        if let Some(lit) = value.concretize(schema.range_tag(prop), clock) {
            add(Triple::new(Term::Name(obj.clone()), Term::Name(prop.clone()), Term::Literal(lit)));
        }
    }
    // Guard atoms about the transition instance itself are satisfied by
    // construction; the machine reasons about the tracked object only.
    for atom in &rule.where_.atoms {
        if atom.subject.as_variable() != Some(&shape.tracked) && atom.subject.is_variable() {
            if let Some(p) = atom.predicate.as_name() {
                if p.is_type_pred() {
                    continue;
                }
                let object = match &atom.object {
                    Term::Variable(v) if v == &shape.tracked => Term::Name(obj.clone()),
                    Term::Variable(_) => match DomainValue::Present.concretize(schema.range_tag(p), clock) {
                        Some(lit) => Term::Literal(lit),
                        None => continue,
                    },
                    ground => ground.clone(),
                };
                add(Triple::new(Term::Name(this.clone()), Term::Name(p.clone()), object));
            }
        }
    }
    store
}

/// Exhaustive deadlock and coverage analysis over the bounded domains.
pub fn check_deadlock(
    graph: &StateGraph,
    decl: &StateMachineDecl,
    rules: &[TransitionRule],
    schema: &SemanticSchema,
    mutability: &PropertyMutability,
    clock: &Clock,
) -> Result<BTreeMap<Name, DeadlockAnalysis>, MachineError> {
    let shapes: BTreeMap<String, RuleShape> = rules
        .iter()
        .map(|r| rule_shape(r, decl).map(|s| (r.id.clone(), s)))
        .collect::<Result<_, _>>()?;
    let by_id: BTreeMap<&str, &TransitionRule> =
        rules.iter().map(|r| (r.id.as_str(), r)).collect();

    // Every property a guard mentions must be classified.
    let mut guard_props = BTreeSet::new();
    for rule in rules {
        all_guard_properties(&rule.where_, &mut guard_props);
    }
    for prop in &guard_props {
        if prop == &decl.state_property {
            continue;
        }
        if mutability.class_of(prop).is_none() {
            return Err(MachineError::UnclassifiedProperty(prop.clone()));
        }
    }

    // Valuations range over the properties guards assert about tracked
    // objects, split by mutability class.
    let mut tracked_props = BTreeSet::new();
    for rule in rules {
        if let Some(shape) = shapes.get(&rule.id) {
            properties_of_var(&rule.where_, &shape.tracked, &mut tracked_props);
        }
    }
    let mut immutable_props = Vec::new();
    let mut environment_props = Vec::new();
    for prop in &tracked_props {
        if prop == &decl.state_property {
            continue;
        }
        match mutability.class_of(prop) {
            Some(Mutability::Immutable) => {
                immutable_props.push((prop.clone(), mutability.domain_of(prop).to_vec()))
            }
            Some(Mutability::Environment) => {
                environment_props.push((prop.clone(), mutability.domain_of(prop).to_vec()))
            }
            Some(Mutability::RuleOwned) => {
                // Managed by the rules themselves; the probe asserts a
                // canonical present value.
                immutable_props.push((prop.clone(), vec![DomainValue::Present]))
            }
            None => return Err(MachineError::UnclassifiedProperty(prop.clone())),
        }
    }
    let immutable_valuations = cartesian(&immutable_props);
    let environment_valuations = cartesian(&environment_props);

    let reach = check_reachability(graph, decl);
    let mut out = BTreeMap::new();
    for (ty, edges) in &graph.per_type {
        let (reachable, _) = &reach[ty];
        let mut per_valuation: BTreeMap<String, Vec<BTreeMap<Name, DomainValue>>> = BTreeMap::new();
        for state in reachable {
            if decl.finals.contains(state) {
                continue;
            }
            let outgoing: Vec<&Edge> = edges
                .iter()
                .filter(|e| &e.source == state && e.target != *state)
                .collect();
            for valuation in &immutable_valuations {
                let mut escapes = false;
                'env: for env in &environment_valuations {
                    let mut full = valuation.clone();
                    full.extend(env.clone());
                    for edge in &outgoing {
                        let rule = by_id[edge.rule.as_str()];
                        let shape = &shapes[&edge.rule];
                        let store = probe_store(ty, state, &full, rule, shape, decl, schema, clock);
                        let seed = Binding::singleton("this", Term::name(PROBE_THIS));
                        let mut diags = Diagnostics::new();
                        if eval_ask(&store, &rule.where_, &seed, clock, &mut diags)
                            .unwrap_or(false)
                        {
                            escapes = true;
                            break 'env;
                        }
                    }
                }
                if !escapes {
                    per_valuation.entry(state.clone()).or_default().push(valuation.clone());
                }
            }
        }
        let mut analysis = DeadlockAnalysis::default();
        for (state, stuck) in per_valuation {
            if stuck.len() == immutable_valuations.len() {
                analysis.deadlocks.insert(state);
            } else {
                for valuation in stuck {
                    analysis.gaps.push(CoverageGap { state: state.clone(), valuation });
                }
            }
        }
        analysis.gaps.sort();
        out.insert(ty.clone(), analysis);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CohesionKind {
    UnknownProperty,
    UnknownClass,
    RangeMismatch,
    UndeclaredState,
    MissingRule,
    UndeclaredTransition,
    TransitionMismatch,
    ImmutableWrite,
}

impl CohesionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CohesionKind::UnknownProperty => "UnknownProperty",
            CohesionKind::UnknownClass => "UnknownClass",
            CohesionKind::RangeMismatch => "RangeMismatch",
            CohesionKind::UndeclaredState => "UndeclaredState",
            CohesionKind::MissingRule => "MissingRule",
            CohesionKind::UndeclaredTransition => "UndeclaredTransition",
            CohesionKind::TransitionMismatch => "TransitionMismatch",
            CohesionKind::ImmutableWrite => "ImmutableWrite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CohesionError {
    pub kind: CohesionKind,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for CohesionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.kind.as_str(), self.subject, self.detail)
    }
}

fn check_pattern_cohesion(
    pattern: &GraphPattern,
    subject: &str,
    decl: &StateMachineDecl,
    schema: &SemanticSchema,
    out: &mut Vec<CohesionError>,
) {
    for atom in &pattern.atoms {
        check_atom_cohesion(atom, subject, decl, schema, out);
    }
    for (_, g) in &pattern.groups {
        check_pattern_cohesion(g, subject, decl, schema, out);
    }
}

fn check_atom_cohesion(
    atom: &Triple,
    subject: &str,
    decl: &StateMachineDecl,
    schema: &SemanticSchema,
    out: &mut Vec<CohesionError>,
) {
    let pred = match atom.predicate.as_name() {
        Some(p) => p,
        None => return,
    };
    if pred.is_type_pred() {
        if let Term::Name(class) = &atom.object {
            if !schema.has_class(class) {
                out.push(CohesionError {
                    kind: CohesionKind::UnknownClass,
                    subject: subject.to_string(),
                    detail: format!("references undeclared class {}", class),
                });
            }
        }
        return;
    }
    if !schema.is_declared_property(pred) {
        out.push(CohesionError {
            kind: CohesionKind::UnknownProperty,
            subject: subject.to_string(),
            detail: format!("references undeclared property {}", pred),
        });
        return;
    }
    if let Some(range) = schema.range_tag(pred) {
        if let Term::Literal(lit) = &atom.object {
            if !range.matches(lit) {
                out.push(CohesionError {
                    kind: CohesionKind::RangeMismatch,
                    subject: subject.to_string(),
                    detail: format!(
                        "{} expects a {} value, found {}",
                        pred,
                        range,
                        lit.canonical()
                    ),
                });
            }
        }
    } else if schema.object_props.contains_key(pred) {
        if let Term::Literal(lit) = &atom.object {
            out.push(CohesionError {
                kind: CohesionKind::RangeMismatch,
                subject: subject.to_string(),
                detail: format!("{} expects an individual, found {}", pred, lit.canonical()),
            });
        }
    }
    // State literals must name declared states.
    if pred == &decl.state_property {
        if let Term::Literal(Literal::Str(s)) = &atom.object {
            if !decl.states.iter().any(|st| st == s.as_ref()) {
                out.push(CohesionError {
                    kind: CohesionKind::UndeclaredState,
                    subject: subject.to_string(),
                    detail: format!("state \"{}\" is not declared", s),
                });
            }
        }
    }
}

/// Cross-checks rules, constraints, and constructors against the schema
/// and the machine declaration.
pub fn check_cohesion(
    rules: &[TransitionRule],
    constraints: &[crate::rules::AskConstraint],
    constructors: &[crate::rules::Constructor],
    decl: &StateMachineDecl,
    schema: &SemanticSchema,
    mutability: &PropertyMutability,
) -> Vec<CohesionError> {
    let mut out = Vec::new();

    for rule in rules {
        let subject = format!("rule {}", rule.id);
        check_pattern_cohesion(&rule.where_, &subject, decl, schema, &mut out);
        for atom in rule.delete.iter().chain(rule.insert.iter()) {
            check_atom_cohesion(atom, &subject, decl, schema, &mut out);
        }
        for atom in &rule.insert {
            if let Some(p) = atom.predicate.as_name() {
                if mutability.class_of(p) == Some(Mutability::Immutable) {
                    out.push(CohesionError {
                        kind: CohesionKind::ImmutableWrite,
                        subject: subject.clone(),
                        detail: format!("INSERT writes immutable property {}", p),
                    });
                }
            }
        }
    }
    for constraint in constraints {
        let subject = format!("constraint {}", constraint.id);
        check_pattern_cohesion(&constraint.body, &subject, decl, schema, &mut out);
    }
    for (i, constructor) in constructors.iter().enumerate() {
        let subject = format!("constructor {} on {}", i + 1, constructor.attached_class);
        check_pattern_cohesion(&constructor.where_, &subject, decl, schema, &mut out);
        for atom in &constructor.template {
            check_atom_cohesion(atom, &subject, decl, schema, &mut out);
        }
    }

    // Declared transitions and rules correspond one to one by id.
    let rule_ids: BTreeSet<&str> = rules.iter().map(|r| r.id.as_str()).collect();
    for t in &decl.transitions {
        if !rule_ids.contains(t.id.as_str()) {
            out.push(CohesionError {
                kind: CohesionKind::MissingRule,
                subject: format!("transition {}", t.id),
                detail: format!("declared \"{}\" -> \"{}\" has no implementing rule", t.source, t.target),
            });
        }
    }
    let declared: BTreeMap<&str, &TransitionDecl> =
        decl.transitions.iter().map(|t| (t.id.as_str(), t)).collect();
    for rule in rules {
        let shape = match rule_shape(rule, decl) {
            Ok(s) => s,
            Err(e) => {
                out.push(CohesionError {
                    kind: CohesionKind::TransitionMismatch,
                    subject: format!("rule {}", rule.id),
                    detail: e.to_string(),
                });
                continue;
            }
        };
        match declared.get(rule.id.as_str()) {
            None => out.push(CohesionError {
                kind: CohesionKind::UndeclaredTransition,
                subject: format!("rule {}", rule.id),
                detail: format!(
                    "implements \"{}\" -> \"{}\" but no transition with this id is declared",
                    shape.source, shape.target
                ),
            }),
            Some(t) => {
                if t.source != shape.source || t.target != shape.target {
                    out.push(CohesionError {
                        kind: CohesionKind::TransitionMismatch,
                        subject: format!("rule {}", rule.id),
                        detail: format!(
                            "rule moves \"{}\" -> \"{}\", declaration says \"{}\" -> \"{}\"",
                            shape.source, shape.target, t.source, t.target
                        ),
                    });
                }
                let guard = shape.guard_types.first();
                if t.applies_to.as_ref() != guard {
                    let show = |o: Option<&Name>| {
                        o.map(|n| n.to_string()).unwrap_or_else(|| "any type".into())
                    };
                    out.push(CohesionError {
                        kind: CohesionKind::TransitionMismatch,
                        subject: format!("rule {}", rule.id),
                        detail: format!(
                            "rule is guarded for {}, declaration says {}",
                            show(guard),
                            show(t.applies_to.as_ref())
                        ),
                    });
                }
            }
        }
    }

    out.sort();
    out.dedup();
    out
}
