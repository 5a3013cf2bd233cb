//! Per-class ASK constraints (violation detection), per-class
//! constructors (initialization), and DELETE/INSERT/WHERE transition
//! rules run to a fixed point, with an incremental variant that
//! re-evaluates only rules touched by the previous pass's delta.
//!
//! Constraint bodies match counterexamples: a non-empty ASK on an
//! instance IS a violation. Rule bodies are evaluated with `?this` bound
//! to each instance of the rule's attached class; within a pass the
//! bindings of a rule come from the store as it stood when the rule's
//! turn began, and mutations apply in (rule order, binding order).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::pattern::{
    instantiate_triple, match_pattern, Binding, Clock, ConstructTemplate, Diagnostics,
    GraphPattern, PatternError,
};
use crate::schema::SemanticSchema;
use crate::store::{StoreDigest, TripleStore};
use crate::term::{Name, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("constraint {constraint} is attached to undeclared class {class}")]
    UnknownClass { constraint: String, class: Name },
    #[error("constructors already ran for {0}")]
    DoubleConstruction(Name),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("store rejected a rule effect: {0}")]
    Store(#[from] crate::store::StoreError),
}

/// A constraint whose body matches counterexamples among instances of
/// the attached class (`?this` ranges over them, subtypes included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AskConstraint {
    pub id: String,
    pub attached_class: Name,
    pub message: String,
    pub body: GraphPattern,
}

/// A template fired exactly once per instance at creation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constructor {
    pub attached_class: Name,
    pub template: ConstructTemplate,
    pub where_: GraphPattern,
}

/// A DELETE/INSERT/WHERE rewrite moving an object between states when
/// its guard matches. Every template variable is bound by the WHERE
/// body, so effects instantiate to ground triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionRule {
    pub id: String,
    pub attached_class: Name,
    pub delete: ConstructTemplate,
    pub insert: ConstructTemplate,
    pub where_: GraphPattern,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub constraint: String,
    pub instance: Name,
    pub message: String,
    pub witness: Binding,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.constraint, self.instance, self.message)
    }
}

/// One rule application: the binding it fired under and its actual
/// effects on the store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub iteration: u32,
    pub rule: String,
    pub binding: Binding,
    pub deleted: Vec<Triple>,
    pub inserted: Vec<Triple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    FixedPoint,
    IterationCapHit,
    CycleDetected,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::FixedPoint => "fixedpoint",
            RunStatus::IterationCapHit => "cap-hit",
            RunStatus::CycleDetected => "cycle",
        }
    }
}

/// Evidence of one engine run. Replaying the recorded deletions and
/// insertions against the initial store reproduces the final store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FireTrace {
    pub firings: Vec<Firing>,
    pub status: RunStatus,
    pub passes: u32,
}

impl FireTrace {
    /// Applies the recorded effects, in order, to a copy of `initial`.
    pub fn replay(&self, initial: &TripleStore) -> TripleStore {
        let mut store = initial.clone();
        for firing in &self.firings {
            for t in &firing.deleted {
                store.remove(t);
            }
            for t in &firing.inserted {
                store.add(t.clone()).expect("trace effects are ground");
            }
        }
        store
    }
}

/// Default pass cap for fixed-point runs.
pub const DEFAULT_MAX_ITERATIONS: u32 = 10_000;

/// Evaluates every constraint against every instance of its attached
/// class (the store must already be materialized, so subtype instances
/// carry the supertype's `a` triple). Violations come back ordered by
/// (constraint id, instance).
pub fn check_constraints(
    store: &TripleStore,
    constraints: &[AskConstraint],
    schema: &SemanticSchema,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<Vec<Violation>, RuleError> {
    let mut out = Vec::new();
    for constraint in constraints {
        if !schema.has_class(&constraint.attached_class) {
            return Err(RuleError::UnknownClass {
                constraint: constraint.id.clone(),
                class: constraint.attached_class.clone(),
            });
        }
        for instance in store.instances_of(&constraint.attached_class) {
            let seed = Binding::singleton("this", Term::Name(instance.clone()));
            let matches = match_pattern(store, &constraint.body, &seed, clock, diags)?;
            if let Some(witness) = matches.into_iter().next() {
                out.push(Violation {
                    constraint: constraint.id.clone(),
                    instance,
                    message: constraint.message.clone(),
                    witness,
                });
            }
        }
    }
    out.sort_by(|a, b| (&a.constraint, &a.instance).cmp(&(&b.constraint, &b.instance)));
    Ok(out)
}

/// Runs the constructors applicable to a freshly created instance (those
/// attached to any of its materialized types) and inserts the template
/// triples with `?this` bound to the instance. The caller's
/// `constructed` set enforces once-per-instance firing.
pub fn run_constructors(
    store: &mut TripleStore,
    instance: &Name,
    constructors: &[Constructor],
    constructed: &mut BTreeSet<Name>,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<BTreeSet<Triple>, RuleError> {
    if !constructed.insert(instance.clone()) {
        return Err(RuleError::DoubleConstruction(instance.clone()));
    }
    let mut inserted = BTreeSet::new();
    for constructor in constructors {
        let typed = Triple::new(
            Term::Name(instance.clone()),
            Term::Name(Name::type_pred()),
            Term::Name(constructor.attached_class.clone()),
        );
        if !store.contains(&typed) {
            continue;
        }
        let seed = Binding::singleton("this", Term::Name(instance.clone()));
        for binding in match_pattern(store, &constructor.where_, &seed, clock, diags)? {
            for template in &constructor.template {
                let triple = instantiate_triple(template, &binding)?;
                if store.add(triple.clone())? {
                    inserted.insert(triple);
                }
            }
        }
    }
    Ok(inserted)
}

/// Applies one rule once: bindings are computed against the store as it
/// stands on entry, then each binding's DELETE instantiations are
/// removed and INSERT instantiations added, in canonical binding order.
/// Later bindings of the same call see earlier mutations in the store
/// but not in the precomputed match set.
pub fn apply_rule_once(
    store: &mut TripleStore,
    rule: &TransitionRule,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<(bool, Vec<Firing>), RuleError> {
    let mut bindings = Vec::new();
    for instance in store.instances_of(&rule.attached_class) {
        let seed = Binding::singleton("this", Term::Name(instance));
        bindings.extend(match_pattern(store, &rule.where_, &seed, clock, diags)?);
    }
    bindings.sort();
    bindings.dedup();

    let mut changed = false;
    let mut firings = Vec::new();
    for binding in bindings {
        let mut deleted = Vec::new();
        for template in &rule.delete {
            let triple = instantiate_triple(template, &binding)?;
            if store.remove(&triple) {
                deleted.push(triple);
            }
        }
        let mut inserted = Vec::new();
        for template in &rule.insert {
            let triple = instantiate_triple(template, &binding)?;
            if store.add(triple.clone())? {
                inserted.push(triple);
            }
        }
        changed |= !deleted.is_empty() || !inserted.is_empty();
        firings.push(Firing {
            iteration: 0,
            rule: rule.id.clone(),
            binding,
            deleted,
            inserted,
        });
    }
    Ok((changed, firings))
}

/// Repeats passes over the rules in declaration order until a pass
/// changes nothing (fixed point), a previously seen store digest recurs
/// (cycle), or the pass cap is hit. Non-fixed-point outcomes are
/// reported in the trace, never thrown.
pub fn run_to_fixpoint(
    store: &mut TripleStore,
    rules: &[TransitionRule],
    clock: &Clock,
    max_iterations: u32,
    diags: &mut Diagnostics,
) -> Result<FireTrace, RuleError> {
    run_engine(store, rules, clock, max_iterations, diags, false)
}

/// As `run_to_fixpoint`, but after the first pass only rules whose WHERE
/// mentions a predicate or class touched by the previous pass's delta
/// are re-evaluated. Predicates in patterns are always ground, so a rule
/// outside the delta cannot gain or lose matches; final stores are
/// identical to the naive engine's.
pub fn run_incremental(
    store: &mut TripleStore,
    rules: &[TransitionRule],
    clock: &Clock,
    max_iterations: u32,
    diags: &mut Diagnostics,
) -> Result<FireTrace, RuleError> {
    run_engine(store, rules, clock, max_iterations, diags, true)
}

#[derive(Default)]
struct Delta {
    predicates: BTreeSet<Name>,
    classes: BTreeSet<Name>,
}

impl Delta {
    fn absorb(&mut self, triple: &Triple) {
        if let Some(p) = triple.predicate.as_name() {
            self.predicates.insert(p.clone());
            if p.is_type_pred() {
                if let Some(c) = triple.object.as_name() {
                    self.classes.insert(c.clone());
                }
            }
        }
    }

    fn touches(&self, pattern: &GraphPattern) -> bool {
        for p in pattern.predicates() {
            if p.is_type_pred() {
                continue;
            }
            if self.predicates.contains(&p) {
                return true;
            }
        }
        if self.predicates.contains(&Name::type_pred()) {
            // Type atoms with a ground class must name a touched class;
            // a variable class is conservatively relevant.
            let classes = pattern.type_classes();
            if classes.iter().any(|c| self.classes.contains(c)) {
                return true;
            }
            if has_variable_class_atom(pattern) {
                return true;
            }
        }
        false
    }
}

fn has_variable_class_atom(pattern: &GraphPattern) -> bool {
    pattern.atoms.iter().any(|a| {
        a.predicate.as_name().is_some_and(Name::is_type_pred) && a.object.is_variable()
    }) || pattern.groups.iter().any(|(_, g)| has_variable_class_atom(g))
}

fn run_engine(
    store: &mut TripleStore,
    rules: &[TransitionRule],
    clock: &Clock,
    max_iterations: u32,
    diags: &mut Diagnostics,
    incremental: bool,
) -> Result<FireTrace, RuleError> {
    let mut seen: BTreeSet<StoreDigest> = BTreeSet::new();
    seen.insert(store.digest());
    let mut trace = FireTrace {
        firings: Vec::new(),
        status: RunStatus::IterationCapHit,
        passes: 0,
    };
    let mut delta: Option<Delta> = None;

    for pass in 1..=max_iterations {
        trace.passes = pass;
        let mut pass_changed = false;
        let mut next_delta = Delta::default();
        for rule in rules {
            if let Some(delta) = &delta {
                if !delta.touches(&rule.where_) {
                    continue;
                }
            }
            let (changed, firings) = apply_rule_once(store, rule, clock, diags)?;
            pass_changed |= changed;
            for mut firing in firings {
                firing.iteration = pass;
                for t in firing.deleted.iter().chain(firing.inserted.iter()) {
                    next_delta.absorb(t);
                }
                trace.firings.push(firing);
            }
        }
        if !pass_changed {
            trace.status = RunStatus::FixedPoint;
            return Ok(trace);
        }
        let digest = store.digest();
        if !seen.insert(digest) {
            trace.status = RunStatus::CycleDetected;
            return Ok(trace);
        }
        if incremental {
            delta = Some(next_delta);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{CompareOp, FilterExpr, FilterOperand, GroupKind};
    use crate::schema::{ClassDecl, TranslationOptions, UmlClassModel};
    use crate::term::DateTime;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn tr(s: &str, p: &str, o: Term) -> Triple {
        Triple::new(Term::name(s), Term::name(p), o)
    }

    fn atom(s: Term, p: &str, o: Term) -> Triple {
        Triple::new(s, Term::name(p), o)
    }

    fn clock() -> Clock {
        Clock::new(DateTime::parse("2016-01-01T00:00:00").unwrap())
    }

    fn toy_schema() -> SemanticSchema {
        let model = UmlClassModel {
            classes: vec![ClassDecl { name: n("m:Order"), is_abstract: false }],
            ..Default::default()
        };
        crate::schema::translate(&model, &TranslationOptions::default()).unwrap()
    }

    #[test]
    fn ask_true_means_violation() {
        // id < 0 is the counterexample pattern.
        let constraint = AskConstraint {
            id: "patient-number".into(),
            attached_class: n("m:Order"),
            message: "the patient must be valid".into(),
            body: GraphPattern {
                atoms: vec![atom(Term::var("this"), "m:patientNumber", Term::var("id"))],
                filters: vec![FilterExpr::Compare(
                    CompareOp::Lt,
                    FilterOperand::Term(Term::var("id")),
                    FilterOperand::Term(Term::int(0)),
                )],
                ..Default::default()
            },
        };
        let store: TripleStore = [
            tr("m:o1", "a", Term::name("m:Order")),
            tr("m:o1", "m:patientNumber", Term::int(-3)),
            tr("m:o2", "a", Term::name("m:Order")),
            tr("m:o2", "m:patientNumber", Term::int(7)),
        ]
        .into_iter()
        .collect();
        let mut diags = Diagnostics::new();
        let violations =
            check_constraints(&store, &[constraint], &toy_schema(), &clock(), &mut diags).unwrap();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].instance, n("m:o1"));

        // Pure function of the store: same call, same answer.
        let again =
            check_constraints(&store, &[], &toy_schema(), &clock(), &mut diags).unwrap();
        assert!(again.is_empty());
    }

    #[test]
    fn unknown_class_is_an_error() {
        let constraint = AskConstraint {
            id: "x".into(),
            attached_class: n("m:Missing"),
            message: String::new(),
            body: GraphPattern::default(),
        };
        let mut diags = Diagnostics::new();
        let err = check_constraints(&TripleStore::new(), &[constraint], &toy_schema(), &clock(), &mut diags);
        assert!(matches!(err, Err(RuleError::UnknownClass { .. })));
    }

    fn initial_state_constructor() -> Constructor {
        Constructor {
            attached_class: n("m:Order"),
            template: vec![atom(Term::var("this"), "m:state", Term::str("Initial"))],
            where_: GraphPattern {
                atoms: vec![atom(Term::var("this"), "a", Term::name("m:Order"))],
                ..Default::default()
            },
        }
    }

    #[test]
    fn constructor_fires_once_per_instance() {
        let mut store: TripleStore = [tr("m:o1", "a", Term::name("m:Order"))].into_iter().collect();
        let mut constructed = BTreeSet::new();
        let mut diags = Diagnostics::new();
        let inserted = run_constructors(
            &mut store,
            &n("m:o1"),
            &[initial_state_constructor()],
            &mut constructed,
            &clock(),
            &mut diags,
        )
        .unwrap();
        assert_eq!(inserted.len(), 1);
        assert!(store.contains(&tr("m:o1", "m:state", Term::str("Initial"))));
        let err = run_constructors(
            &mut store,
            &n("m:o1"),
            &[initial_state_constructor()],
            &mut constructed,
            &clock(),
            &mut diags,
        );
        assert!(matches!(err, Err(RuleError::DoubleConstruction(_))));
    }

    #[test]
    fn constructor_applies_through_materialized_subtype() {
        // The instance carries (o, a, m:Order) via materialization.
        let mut store: TripleStore = [
            tr("m:o2", "a", Term::name("m:LabTest")),
            tr("m:o2", "a", Term::name("m:Order")),
        ]
        .into_iter()
        .collect();
        let mut constructed = BTreeSet::new();
        let mut diags = Diagnostics::new();
        run_constructors(
            &mut store,
            &n("m:o2"),
            &[initial_state_constructor()],
            &mut constructed,
            &clock(),
            &mut diags,
        )
        .unwrap();
        assert!(store.contains(&tr("m:o2", "m:state", Term::str("Initial"))));

        // No constructor attached to the transition class: nothing happens.
        let mut store: TripleStore =
            [tr("m:t1", "a", Term::name("m:OrderTransition"))].into_iter().collect();
        let inserted = run_constructors(
            &mut store,
            &n("m:t1"),
            &[initial_state_constructor()],
            &mut constructed,
            &clock(),
            &mut diags,
        )
        .unwrap();
        assert!(inserted.is_empty());
    }

    /// DELETE state s INSERT state t WHERE { ?this m:changeState ?o . ?o guard ... }
    fn step_rule(id: &str, from: &str, to: &str, guard: Option<(&str, Term)>) -> TransitionRule {
        let mut atoms = vec![
            atom(Term::var("this"), "m:changeState", Term::var("o")),
            atom(Term::var("o"), "m:state", Term::str(from)),
        ];
        if let Some((p, v)) = guard {
            atoms.push(atom(Term::var("o"), p, v));
        }
        TransitionRule {
            id: id.into(),
            attached_class: n("m:OrderTransition"),
            delete: vec![atom(Term::var("o"), "m:state", Term::str(from))],
            insert: vec![atom(Term::var("o"), "m:state", Term::str(to))],
            where_: GraphPattern { atoms, ..Default::default() },
        }
    }

    fn harness(state: &str) -> TripleStore {
        [
            tr("m:t1", "a", Term::name("m:OrderTransition")),
            tr("m:t1", "m:changeState", Term::name("m:o1")),
            tr("m:o1", "a", Term::name("m:Order")),
            tr("m:o1", "m:state", Term::str(state)),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn rule_with_no_bindings_is_a_noop() {
        let mut store = harness("Done");
        let rule = step_rule("T", "Initial", "Approved", None);
        let mut diags = Diagnostics::new();
        let (changed, firings) = apply_rule_once(&mut store, &rule, &clock(), &mut diags).unwrap();
        assert!(!changed);
        assert!(firings.is_empty());
    }

    #[test]
    fn fixpoint_chains_rules_within_one_run() {
        let mut store = harness("Initial");
        store.add(tr("m:o1", "m:done", Term::bool(true))).unwrap();
        let rules = vec![
            step_rule("T0", "Initial", "Approved", None),
            step_rule("T1", "Approved", "Resolved", Some(("m:done", Term::bool(true)))),
        ];
        let mut diags = Diagnostics::new();
        let trace = run_to_fixpoint(&mut store, &rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        assert_eq!(trace.status, RunStatus::FixedPoint);
        assert!(store.contains(&tr("m:o1", "m:state", Term::str("Resolved"))));
        let ids: Vec<&str> = trace.firings.iter().map(|f| f.rule.as_str()).collect();
        assert_eq!(ids, vec!["T0", "T1"]);
    }

    #[test]
    fn empty_rule_set_reaches_fixpoint_in_one_pass() {
        let mut store = harness("Initial");
        let mut diags = Diagnostics::new();
        let trace = run_to_fixpoint(&mut store, &[], &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        assert_eq!(trace.status, RunStatus::FixedPoint);
        assert_eq!(trace.passes, 1);
        assert!(trace.firings.is_empty());
    }

    #[test]
    fn oscillator_is_reported_as_a_cycle() {
        let mut store = harness("A");
        let rules = vec![step_rule("flip", "A", "B", None), step_rule("flop", "B", "A", None)];
        let mut diags = Diagnostics::new();
        let trace = run_to_fixpoint(&mut store, &rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        assert_eq!(trace.status, RunStatus::CycleDetected);
        assert_eq!(trace.passes, 1);
    }

    #[test]
    fn trace_replay_reproduces_final_store() {
        let initial = {
            let mut s = harness("Initial");
            s.add(tr("m:o1", "m:done", Term::bool(true))).unwrap();
            s
        };
        let mut store = initial.clone();
        let rules = vec![
            step_rule("T0", "Initial", "Approved", None),
            step_rule("T1", "Approved", "Resolved", Some(("m:done", Term::bool(true)))),
        ];
        let mut diags = Diagnostics::new();
        let trace = run_to_fixpoint(&mut store, &rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        assert_eq!(trace.replay(&initial), store);
    }

    #[test]
    fn incremental_skips_untouched_rules_but_agrees() {
        let rules = vec![
            step_rule("T0", "Initial", "Approved", None),
            step_rule("T1", "Approved", "Resolved", Some(("m:done", Term::bool(true)))),
        ];
        let mut naive = harness("Initial");
        naive.add(tr("m:o1", "m:done", Term::bool(true))).unwrap();
        let mut incr = naive.clone();
        let mut diags = Diagnostics::new();
        let a = run_to_fixpoint(&mut naive, &rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        let b = run_incremental(&mut incr, &rules, &clock(), DEFAULT_MAX_ITERATIONS, &mut diags).unwrap();
        assert_eq!(naive, incr);
        assert_eq!(a.status, b.status);
    }

    #[test]
    fn not_exists_guard_blocks_when_present() {
        // T1-style rule: fires only while the appointment date is absent.
        let mut rule = step_rule("T1", "Approved", "Waiting", None);
        rule.where_.groups.push((
            GroupKind::NotExists,
            GraphPattern {
                atoms: vec![atom(Term::var("o"), "m:appdate", Term::var("dt"))],
                ..Default::default()
            },
        ));
        let mut store = harness("Approved");
        let mut diags = Diagnostics::new();
        let (changed, _) = apply_rule_once(&mut store, &rule, &clock(), &mut diags).unwrap();
        assert!(changed);

        let mut store = harness("Approved");
        store
            .add(tr(
                "m:o1",
                "m:appdate",
                Term::datetime(DateTime::parse("2016-02-01T10:00:00").unwrap()),
            ))
            .unwrap();
        let (changed, _) = apply_rule_once(&mut store, &rule, &clock(), &mut diags).unwrap();
        assert!(!changed);
    }
}
