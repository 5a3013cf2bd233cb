//! Scenario simulation: ordered events driving instance creation,
//! environment changes, engine runs, and expectations, with a
//! deterministic, replayable trace.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::machine::StateMachineDecl;
use crate::model::WorkModel;
use crate::pattern::{Clock, Diagnostics, PatternError};
use crate::rules::{
    check_constraints, run_constructors, run_incremental, FireTrace, RuleError, RunStatus,
    TransitionRule, Violation, DEFAULT_MAX_ITERATIONS,
};
use crate::schema::{materialize_from, translate, SemanticSchema, TranslateError};
use crate::store::{StoreDigest, TripleStore};
use crate::term::{DateTime, Literal, Name, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioEvent {
    At(DateTime),
    Create {
        name: Name,
        class: Name,
        props: Vec<(Name, Term)>,
    },
    Set {
        name: Name,
        prop: Name,
        value: Term,
    },
    Clear {
        name: Name,
        prop: Name,
    },
    Run,
    ExpectState {
        name: Name,
        label: String,
    },
    CheckConstraints {
        expected: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub events: Vec<ScenarioEvent>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimulateError {
    #[error("unknown object {0}")]
    UnknownObject(Name),
    #[error("{0} already exists")]
    DuplicateObject(Name),
    #[error("unknown class {0}")]
    UnknownClass(Name),
    #[error("{0} is abstract and cannot be instantiated directly")]
    AbstractClass(Name),
    #[error("unknown property {0}")]
    UnknownProperty(Name),
    #[error("no state machine covers instances of {0}")]
    NoMachine(Name),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// One executed event with its observable effects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    At(DateTime),
    Created {
        name: Name,
        class: Name,
        added: Vec<Triple>,
    },
    SetProp {
        name: Name,
        prop: Name,
        removed: Vec<Triple>,
        added: Vec<Triple>,
    },
    Cleared {
        name: Name,
        prop: Name,
        removed: Vec<Triple>,
    },
    Ran(FireTrace),
    ExpectedState {
        name: Name,
        label: String,
        actual: Vec<String>,
        ok: bool,
    },
    CheckedConstraints {
        expected: Vec<String>,
        violations: Vec<Violation>,
        ok: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationTrace {
    pub steps: Vec<TraceStep>,
    pub final_store: TripleStore,
    /// False when an expectation failed; the simulation stops there.
    pub ok: bool,
}

impl SimulationTrace {
    pub fn run_statuses(&self) -> Vec<RunStatus> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                TraceStep::Ran(t) => Some(t.status),
                _ => None,
            })
            .collect()
    }

    /// Rule ids in firing order across all runs.
    pub fn fired_rules(&self) -> Vec<String> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                TraceStep::Ran(t) => Some(t.firings.iter().map(|f| f.rule.clone())),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// States a tracked object passes through, read off the trace.
    pub fn states_of(&self, name: &Name, state_property: &Name) -> Vec<String> {
        let mut out = Vec::new();
        let mut note = |triples: &[Triple]| {
            for t in triples {
                if t.subject.as_name() == Some(name) && t.predicate.as_name() == Some(state_property)
                {
                    if let Term::Literal(Literal::Str(s)) = &t.object {
                        out.push(s.to_string());
                    }
                }
            }
        };
        for step in &self.steps {
            match step {
                TraceStep::Created { added, .. } => note(added),
                TraceStep::Ran(trace) => {
                    for firing in &trace.firings {
                        note(&firing.inserted);
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Deterministic text rendering; golden tests compare it byte for
    /// byte.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            match step {
                TraceStep::At(dt) => {
                    writeln!(out, "at {}", dt).unwrap();
                }
                TraceStep::Created { name, class, added } => {
                    writeln!(out, "create {} : {}", name, class).unwrap();
                    for t in added {
                        writeln!(out, "  + {}", t).unwrap();
                    }
                }
                TraceStep::SetProp {
                    name,
                    prop,
                    removed,
                    added,
                } => {
                    writeln!(out, "set {} {}", name, prop).unwrap();
                    for t in removed {
                        writeln!(out, "  - {}", t).unwrap();
                    }
                    for t in added {
                        writeln!(out, "  + {}", t).unwrap();
                    }
                }
                TraceStep::Cleared { name, prop, removed } => {
                    writeln!(out, "clear {} {}", name, prop).unwrap();
                    for t in removed {
                        writeln!(out, "  - {}", t).unwrap();
                    }
                }
                TraceStep::Ran(trace) => {
                    writeln!(out, "run").unwrap();
                    let mut pass = 0;
                    for firing in &trace.firings {
                        if firing.iteration != pass {
                            pass = firing.iteration;
                            writeln!(out, "  pass {}", pass).unwrap();
                        }
                        writeln!(out, "    fire {} [{}]", firing.rule, firing.binding).unwrap();
                        for t in &firing.deleted {
                            writeln!(out, "      - {}", t).unwrap();
                        }
                        for t in &firing.inserted {
                            writeln!(out, "      + {}", t).unwrap();
                        }
                    }
                    writeln!(
                        out,
                        "  {} passes={} firings={}",
                        trace.status.as_str(),
                        trace.passes,
                        trace.firings.len()
                    )
                    .unwrap();
                }
                TraceStep::ExpectedState {
                    name,
                    label,
                    actual,
                    ok,
                } => {
                    if *ok {
                        writeln!(out, "expect {} state \"{}\" => ok", name, label).unwrap();
                    } else {
                        writeln!(
                            out,
                            "expect {} state \"{}\" => FAILED (actual: {})",
                            name,
                            label,
                            if actual.is_empty() {
                                "none".to_string()
                            } else {
                                actual
                                    .iter()
                                    .map(|s| format!("\"{}\"", s))
                                    .collect::<Vec<_>>()
                                    .join(", ")
                            }
                        )
                        .unwrap();
                    }
                }
                TraceStep::CheckedConstraints {
                    expected,
                    violations,
                    ok,
                } => {
                    let actual: Vec<&str> =
                        violations.iter().map(|v| v.constraint.as_str()).collect();
                    writeln!(
                        out,
                        "check-constraints expected=[{}] actual=[{}] => {}",
                        expected.join(", "),
                        actual.join(", "),
                        if *ok { "ok" } else { "FAILED" }
                    )
                    .unwrap();
                }
            }
        }
        writeln!(out, "final store").unwrap();
        for t in self.final_store.iter() {
            writeln!(out, "  {}", t).unwrap();
        }
        out
    }
}

/// Executes scenarios against a work model. The store is kept
/// materialized; constructors fire once per created instance.
pub struct Simulator<'m> {
    model: &'m WorkModel,
    schema: SemanticSchema,
    store: TripleStore,
    clock: Clock,
    constructed: BTreeSet<Name>,
    diags: Diagnostics,
    max_iterations: u32,
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m WorkModel, initial_clock: DateTime) -> Result<Self, SimulateError> {
        let schema = translate(&model.class_model, &model.options)?;
        Ok(Simulator {
            model,
            schema,
            store: TripleStore::new(),
            clock: Clock::new(initial_clock),
            constructed: BTreeSet::new(),
            diags: Diagnostics::new(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
        })
    }

    /// Starts from a pre-populated store. Pre-existing instances are
    /// marked constructed, so loading never re-fires constructors.
    pub fn with_store(
        model: &'m WorkModel,
        initial_clock: DateTime,
        store: TripleStore,
    ) -> Result<Self, SimulateError> {
        let mut sim = Simulator::new(model, initial_clock)?;
        sim.store = store;
        let seed: Vec<Triple> = sim.store.iter().cloned().collect();
        materialize_from(&mut sim.store, &sim.schema, seed);
        for t in sim.store.matching(None, Some(&Name::type_pred()), None) {
            if let Some(s) = t.subject.as_name() {
                sim.constructed.insert(s.clone());
            }
        }
        Ok(sim)
    }

    pub fn with_max_iterations(mut self, max_iterations: u32) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }

    pub fn schema(&self) -> &SemanticSchema {
        &self.schema
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diags
    }

    fn exists(&self, name: &Name) -> bool {
        self.constructed.contains(name)
    }

    pub fn advance_clock(&mut self, to: DateTime) -> Result<(), SimulateError> {
        self.clock.advance_to(to)?;
        Ok(())
    }

    /// Creates an instance: type triples (with closure), initial
    /// properties, attribute defaults, then constructors. Returns every
    /// triple added.
    pub fn create(
        &mut self,
        name: &Name,
        class: &Name,
        props: &[(Name, Term)],
    ) -> Result<Vec<Triple>, SimulateError> {
        if self.exists(name) {
            return Err(SimulateError::DuplicateObject(name.clone()));
        }
        let axiom = self
            .schema
            .classes
            .get(class)
            .ok_or_else(|| SimulateError::UnknownClass(class.clone()))?;
        if axiom.is_abstract {
            return Err(SimulateError::AbstractClass(class.clone()));
        }
        let mut added = Vec::new();
        let mut batch = Vec::new();
        let typed = Triple::new(
            Term::Name(name.clone()),
            Term::Name(Name::type_pred()),
            Term::Name(class.clone()),
        );
        if self.store.add(typed.clone()).map_err(RuleError::from)? {
            added.push(typed.clone());
            batch.push(typed);
        }
        for (prop, value) in props {
            if !self.schema.is_declared_property(prop) {
                return Err(SimulateError::UnknownProperty(prop.clone()));
            }
            if let Term::Name(other) = value {
                if !self.exists(other) {
                    return Err(SimulateError::UnknownObject(other.clone()));
                }
            }
            let t = Triple::new(Term::Name(name.clone()), Term::Name(prop.clone()), value.clone());
            if self.store.add(t.clone()).map_err(RuleError::from)? {
                added.push(t.clone());
                batch.push(t);
            }
        }
        added.extend(materialize_from(&mut self.store, &self.schema, batch));

        // Attribute defaults for every materialized type, where absent.
        let mut defaults = Vec::new();
        for (prop, dp) in &self.schema.datatype_props {
            if let Some(default) = &dp.default {
                let applies = self.store.contains(&Triple::new(
                    Term::Name(name.clone()),
                    Term::Name(Name::type_pred()),
                    Term::Name(dp.domain.clone()),
                ));
                if applies && self.store.matching(Some(name), Some(prop), None).next().is_none() {
                    defaults.push(Triple::new(
                        Term::Name(name.clone()),
                        Term::Name(prop.clone()),
                        Term::Literal(default.clone()),
                    ));
                }
            }
        }
        for t in defaults {
            if self.store.add(t.clone()).map_err(RuleError::from)? {
                added.push(t);
            }
        }

        let inserted = run_constructors(
            &mut self.store,
            name,
            &self.model.constructors,
            &mut self.constructed,
            &self.clock,
            &mut self.diags,
        )?;
        let closure = materialize_from(&mut self.store, &self.schema, inserted.iter().cloned().collect());
        added.extend(inserted);
        added.extend(closure);
        added.sort();
        added.dedup();
        Ok(added)
    }

    /// Sets a property. On a max-one property the prior value is
    /// replaced; direct inverse images of removed triples are retracted
    /// with them.
    pub fn set(
        &mut self,
        name: &Name,
        prop: &Name,
        value: &Term,
    ) -> Result<(Vec<Triple>, Vec<Triple>), SimulateError> {
        if !self.exists(name) {
            return Err(SimulateError::UnknownObject(name.clone()));
        }
        if !self.schema.is_declared_property(prop) {
            return Err(SimulateError::UnknownProperty(prop.clone()));
        }
        if let Term::Name(other) = value {
            if !self.exists(other) {
                return Err(SimulateError::UnknownObject(other.clone()));
            }
        }
        let mut removed = Vec::new();
        if self.schema.is_functional(prop) {
            removed = self.retract(name, prop);
        }
        let t = Triple::new(Term::Name(name.clone()), Term::Name(prop.clone()), value.clone());
        let mut added = Vec::new();
        if self.store.add(t.clone()).map_err(RuleError::from)? {
            added.push(t.clone());
            added.extend(materialize_from(&mut self.store, &self.schema, vec![t]));
        }
        added.sort();
        added.dedup();
        Ok((removed, added))
    }

    /// Removes all values of a property, with their direct inverse
    /// images.
    pub fn clear(&mut self, name: &Name, prop: &Name) -> Result<Vec<Triple>, SimulateError> {
        if !self.exists(name) {
            return Err(SimulateError::UnknownObject(name.clone()));
        }
        if !self.schema.is_declared_property(prop) {
            return Err(SimulateError::UnknownProperty(prop.clone()));
        }
        Ok(self.retract(name, prop))
    }

    fn retract(&mut self, name: &Name, prop: &Name) -> Vec<Triple> {
        let victims: Vec<Triple> = self.store.matching(Some(name), Some(prop), None).cloned().collect();
        let mut removed = Vec::new();
        for t in victims {
            self.store.remove(&t);
            removed.push(t.clone());
            if let (Some(inv), Some(obj)) = (self.schema.inverse_of(prop), t.object.as_name()) {
                let image = Triple::new(
                    Term::Name(obj.clone()),
                    Term::Name(inv.clone()),
                    Term::Name(name.clone()),
                );
                if self.store.remove(&image) {
                    removed.push(image);
                }
            }
        }
        removed.sort();
        removed
    }

    /// Runs the incremental engine to a fixed point (or cap/cycle).
    pub fn run(&mut self) -> Result<FireTrace, SimulateError> {
        Ok(run_incremental(
            &mut self.store,
            &self.model.rules,
            &self.clock,
            self.max_iterations,
            &mut self.diags,
        )?)
    }

    /// Runs with an explicit rule order (confluence probing).
    pub fn run_with_rules(&mut self, rules: &[TransitionRule]) -> Result<FireTrace, SimulateError> {
        Ok(run_incremental(
            &mut self.store,
            rules,
            &self.clock,
            self.max_iterations,
            &mut self.diags,
        )?)
    }

    fn machine_for_object(&self, name: &Name) -> Result<&StateMachineDecl, SimulateError> {
        for machine in &self.model.machines {
            let typed = Triple::new(
                Term::Name(name.clone()),
                Term::Name(Name::type_pred()),
                Term::Name(machine.subject.clone()),
            );
            if self.store.contains(&typed) {
                return Ok(machine);
            }
        }
        Err(SimulateError::NoMachine(name.clone()))
    }

    /// Current state labels of the object (one, for well-formed data).
    pub fn states_of(&self, name: &Name) -> Result<Vec<String>, SimulateError> {
        if !self.exists(name) {
            return Err(SimulateError::UnknownObject(name.clone()));
        }
        let machine = self.machine_for_object(name)?;
        Ok(self
            .store
            .matching(Some(name), Some(&machine.state_property), None)
            .filter_map(|t| match &t.object {
                Term::Literal(Literal::Str(s)) => Some(s.to_string()),
                _ => None,
            })
            .collect())
    }

    pub fn check_constraints(&mut self) -> Result<Vec<Violation>, SimulateError> {
        Ok(check_constraints(
            &self.store,
            &self.model.constraints,
            &self.schema,
            &self.clock,
            &mut self.diags,
        )?)
    }
}

/// Applies the scenario's events in order. Expectation failures mark the
/// trace failed and stop the simulation; malformed events are errors.
pub fn simulate(
    model: &WorkModel,
    scenario: &Scenario,
    initial_clock: DateTime,
    max_iterations: u32,
) -> Result<SimulationTrace, SimulateError> {
    let mut sim = Simulator::new(model, initial_clock)?.with_max_iterations(max_iterations);
    let mut steps = Vec::new();
    let mut ok = true;
    for event in &scenario.events {
        match event {
            ScenarioEvent::At(dt) => {
                sim.advance_clock(*dt)?;
                steps.push(TraceStep::At(*dt));
            }
            ScenarioEvent::Create { name, class, props } => {
                let added = sim.create(name, class, props)?;
                steps.push(TraceStep::Created {
                    name: name.clone(),
                    class: class.clone(),
                    added,
                });
            }
            ScenarioEvent::Set { name, prop, value } => {
                let (removed, added) = sim.set(name, prop, value)?;
                steps.push(TraceStep::SetProp {
                    name: name.clone(),
                    prop: prop.clone(),
                    removed,
                    added,
                });
            }
            ScenarioEvent::Clear { name, prop } => {
                let removed = sim.clear(name, prop)?;
                steps.push(TraceStep::Cleared {
                    name: name.clone(),
                    prop: prop.clone(),
                    removed,
                });
            }
            ScenarioEvent::Run => {
                let trace = sim.run()?;
                steps.push(TraceStep::Ran(trace));
            }
            ScenarioEvent::ExpectState { name, label } => {
                let actual = sim.states_of(name)?;
                let got = actual == vec![label.clone()];
                steps.push(TraceStep::ExpectedState {
                    name: name.clone(),
                    label: label.clone(),
                    actual,
                    ok: got,
                });
                if !got {
                    ok = false;
                    break;
                }
            }
            ScenarioEvent::CheckConstraints { expected } => {
                let violations = sim.check_constraints()?;
                let mut actual: Vec<String> =
                    violations.iter().map(|v| v.constraint.clone()).collect();
                actual.sort();
                actual.dedup();
                let mut want = expected.clone();
                want.sort();
                want.dedup();
                let got = actual == want;
                steps.push(TraceStep::CheckedConstraints {
                    expected: expected.clone(),
                    violations,
                    ok: got,
                });
                if !got {
                    ok = false;
                    break;
                }
            }
        }
    }
    Ok(SimulationTrace {
        steps,
        final_store: sim.store,
        ok,
    })
}

/// Outcome of replaying one scenario under several rule orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfluenceProbe {
    pub confluent: bool,
    pub runs: u32,
    pub divergent: Option<DivergentPair>,
}

/// The first pair of rule orders whose outcomes differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergentPair {
    pub baseline_order: Vec<String>,
    pub divergent_order: Vec<String>,
    pub baseline_digest: StoreDigest,
    pub divergent_digest: StoreDigest,
}

/// Replays the scenario under `permutations` rule orders (the declared
/// order plus seeded shuffles) and reports whether every replay reaches
/// the same final store through fixed points only.
pub fn probe_confluence(
    model: &WorkModel,
    scenario: &Scenario,
    permutations: u32,
    initial_clock: DateTime,
    max_iterations: u32,
) -> Result<ConfluenceProbe, SimulateError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let run_with_order = |rules: Vec<TransitionRule>| -> Result<(StoreDigest, bool), SimulateError> {
        let mut reordered = model.clone();
        reordered.rules = rules;
        let trace = simulate(&reordered, scenario, initial_clock, max_iterations)?;
        let all_fixed = trace
            .run_statuses()
            .iter()
            .all(|s| *s == RunStatus::FixedPoint);
        Ok((trace.final_store.digest(), all_fixed && trace.ok))
    };

    let baseline_order: Vec<String> = model.rules.iter().map(|r| r.id.clone()).collect();
    let (baseline_digest, baseline_fixed) = run_with_order(model.rules.clone())?;
    let mut confluent = baseline_fixed;
    let mut divergent = None;
    let mut runs = 1;

    for seed in 1..permutations.max(2) {
        let mut rules = model.rules.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed as u64);
        rules.shuffle(&mut rng);
        let order: Vec<String> = rules.iter().map(|r| r.id.clone()).collect();
        let (digest, fixed) = run_with_order(rules)?;
        runs += 1;
        if digest != baseline_digest || !fixed {
            confluent = false;
            if divergent.is_none() {
                divergent = Some(DivergentPair {
                    baseline_order: baseline_order.clone(),
                    divergent_order: order,
                    baseline_digest,
                    divergent_digest: digest,
                });
            }
            break;
        }
    }
    Ok(ConfluenceProbe {
        confluent,
        runs,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::term::Triple;

    fn initial_clock() -> DateTime {
        DateTime::parse("2016-01-01T00:00:00").unwrap()
    }

    #[test]
    fn create_rejects_abstract_and_unknown_classes() {
        let model = fixture::load_fixture();
        let mut sim = Simulator::new(&model, initial_clock()).unwrap();
        // The order class is abstract: a bare order would stall in the
        // type-guarded states, so it cannot be instantiated directly.
        let err = sim.create(&Name::new("casemanager:o1"), &Name::new("casemanager:Order"), &[]);
        assert_eq!(err, Err(SimulateError::AbstractClass(Name::new("casemanager:Order"))));
        let err = sim.create(&Name::new("casemanager:o1"), &Name::new("casemanager:Nope"), &[]);
        assert_eq!(err, Err(SimulateError::UnknownClass(Name::new("casemanager:Nope"))));
    }

    #[test]
    fn set_and_expect_require_created_objects() {
        let model = fixture::load_fixture();
        let mut sim = Simulator::new(&model, initial_clock()).unwrap();
        let ghost = Name::new("casemanager:ghost");
        assert_eq!(
            sim.set(&ghost, &Name::new("casemanager:status"), &Term::str("done")),
            Err(SimulateError::UnknownObject(ghost.clone()))
        );
        assert_eq!(sim.states_of(&ghost), Err(SimulateError::UnknownObject(ghost)));
    }

    #[test]
    fn set_replaces_on_max_one_properties() {
        let model = fixture::load_fixture();
        let mut sim = Simulator::new(&model, initial_clock()).unwrap();
        let order = Name::new("casemanager:o1");
        sim.create(&order, &Name::new("casemanager:LabTest"), &[]).unwrap();
        let status = Name::new("casemanager:status");
        sim.set(&order, &status, &Term::str("pending")).unwrap();
        let (removed, added) = sim.set(&order, &status, &Term::str("done")).unwrap();
        assert_eq!(removed.len(), 1);
        assert_eq!(added.len(), 1);
        assert_eq!(sim.store().matching(Some(&order), Some(&status), None).count(), 1);
        let removed = sim.clear(&order, &status).unwrap();
        assert_eq!(removed.len(), 1);
        assert_eq!(sim.store().matching(Some(&order), Some(&status), None).count(), 0);
    }

    #[test]
    fn with_store_marks_existing_instances_constructed() {
        let model = fixture::load_fixture();
        let population = fixture::load_population(fixture::POPULATION_VALID);
        let mut sim = Simulator::with_store(&model, initial_clock(), population).unwrap();
        // Loading must not re-fire constructors: con1 carries no state
        // triple in the population and must not gain one.
        let con1 = Name::new("casemanager:con1");
        assert_eq!(
            sim.store()
                .matching(Some(&con1), Some(&Name::new("casemanager:state")), None)
                .count(),
            0
        );
        // It exists, so environment changes apply to it.
        sim.set(&con1, &Name::new("casemanager:status"), &Term::str("done")).unwrap();
        // And the load materialized the composition inverses.
        assert!(sim.store().contains(&Triple::new(
            Term::name("casemanager:con1"),
            Term::name("casemanager:orderOf"),
            Term::name("casemanager:p1"),
        )));
    }

    #[test]
    fn failed_expectation_stops_and_marks_the_trace() {
        let model = fixture::load_fixture();
        let scenario = Scenario {
            events: vec![
                ScenarioEvent::Create {
                    name: Name::new("casemanager:o1"),
                    class: Name::new("casemanager:LabTest"),
                    props: vec![],
                },
                ScenarioEvent::ExpectState {
                    name: Name::new("casemanager:o1"),
                    label: "Approved".into(),
                },
                ScenarioEvent::Run,
            ],
        };
        let trace = simulate(&model, &scenario, initial_clock(), 100).unwrap();
        assert!(!trace.ok);
        // The failing expectation is the last step; the run never happens.
        assert_eq!(trace.steps.len(), 2);
        match trace.steps.last().unwrap() {
            TraceStep::ExpectedState { actual, ok, .. } => {
                assert!(!ok);
                assert_eq!(actual, &vec!["Initial".to_string()]);
            }
            other => panic!("unexpected step {:?}", other),
        }
        assert!(trace.render().contains("FAILED (actual: \"Initial\")"));
    }

    #[test]
    fn defaults_apply_at_creation_unless_given() {
        let text = r#"
prefix m: <http://example.org/m#>
class m:Task {
  attr m:priority : integer [0..1] = 3
  attr m:label : string [0..1]
}
"#;
        let model = crate::syntax::parse_model(text).unwrap();
        let mut sim = Simulator::new(&model, initial_clock()).unwrap();
        let priority = Name::new("m:priority");

        sim.create(&Name::new("m:t1"), &Name::new("m:Task"), &[]).unwrap();
        assert!(sim.store().contains(&Triple::new(
            Term::name("m:t1"),
            Term::Name(priority.clone()),
            Term::int(3),
        )));

        // An explicit value wins over the default.
        sim.create(
            &Name::new("m:t2"),
            &Name::new("m:Task"),
            &[(priority.clone(), Term::int(9))],
        )
        .unwrap();
        assert_eq!(sim.store().matching(Some(&Name::new("m:t2")), Some(&priority), None).count(), 1);
        assert!(sim.store().contains(&Triple::new(
            Term::name("m:t2"),
            Term::Name(priority),
            Term::int(9),
        )));
    }

    #[test]
    fn confluence_probe_flags_cycles_and_accepts_single_rules() {
        let mut model = fixture::load_fixture();
        // Replace the rules with the oscillating pair: every order it
        // can bind flips between two states forever.
        let flip = |id: &str, from: &str, to: &str| TransitionRule {
            id: id.into(),
            attached_class: Name::new("casemanager:OrderTransition"),
            delete: vec![Triple::new(
                Term::var("o"),
                Term::name("casemanager:state"),
                Term::str(from),
            )],
            insert: vec![Triple::new(
                Term::var("o"),
                Term::name("casemanager:state"),
                Term::str(to),
            )],
            where_: crate::pattern::GraphPattern {
                atoms: vec![
                    Triple::new(
                        Term::var("this"),
                        Term::name("casemanager:changeState"),
                        Term::var("o"),
                    ),
                    Triple::new(Term::var("o"), Term::name("casemanager:state"), Term::str(from)),
                ],
                ..Default::default()
            },
        };
        model.rules = vec![flip("flip", "Initial", "Approved"), flip("flop", "Approved", "Initial")];
        let scenario = Scenario {
            events: vec![
                ScenarioEvent::Create {
                    name: Name::new("casemanager:o1"),
                    class: Name::new("casemanager:LabTest"),
                    props: vec![],
                },
                ScenarioEvent::Create {
                    name: Name::new("casemanager:t1"),
                    class: Name::new("casemanager:OrderTransition"),
                    props: vec![(
                        Name::new("casemanager:changeState"),
                        Term::name("casemanager:o1"),
                    )],
                },
                ScenarioEvent::Run,
            ],
        };
        let probe = probe_confluence(&model, &scenario, 4, initial_clock(), 100).unwrap();
        assert!(!probe.confluent, "cycling runs are not convergent");

        // A single rule is trivially confluent.
        model.rules = vec![flip("only", "Initial", "Approved")];
        let probe = probe_confluence(&model, &scenario, 4, initial_clock(), 100).unwrap();
        assert!(probe.confluent);
        assert_eq!(probe.runs, 4);
    }
}
