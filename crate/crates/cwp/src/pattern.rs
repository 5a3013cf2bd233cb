//! The restricted graph-pattern language used by constraints and rules:
//! basic graph patterns with variables, FILTER expressions, EXISTS and
//! NOT EXISTS groups, ASK, and CONSTRUCT templates.
//!
//! Evaluation is a deterministic left-to-right nested-loop join in the
//! declared triple-pattern order. Filters run as soon as all of their
//! variables are bound; groups run once a candidate binding is complete
//! and never export bindings outward.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{DateTime, Literal, Name, Term, Triple};
use crate::store::TripleStore;

/// A settable evaluation clock backing `now()`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clock {
    now: DateTime,
}

impl Clock {
    pub fn new(now: DateTime) -> Self {
        Clock { now }
    }

    pub fn now(&self) -> DateTime {
        self.now
    }

    /// Clocks never run backwards within one scenario.
    pub fn advance_to(&mut self, to: DateTime) -> Result<(), PatternError> {
        if to < self.now {
            return Err(PatternError::ClockMovedBackwards {
                from: self.now,
                to,
            });
        }
        self.now = to;
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("filter references ?{0} which no triple pattern binds")]
    UnboundFilterVariable(String),
    #[error("template references ?{0} which the WHERE pattern does not bind")]
    UnboundTemplateVariable(String),
    #[error("clock may not move backwards: {from} -> {to}")]
    ClockMovedBackwards { from: DateTime, to: DateTime },
}

/// Non-fatal evaluation notes, e.g. ordered comparisons across types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticKind {
    TypeMismatch,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    items: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Diagnostics::default()
    }

    pub fn push(&mut self, kind: DiagnosticKind, detail: impl Into<String>) {
        self.items.push(Diagnostic {
            kind,
            detail: detail.into(),
        });
    }

    pub fn items(&self) -> &[Diagnostic] {
        &self.items
    }

    /// Sorted, deduplicated view for reporting.
    pub fn distinct(&self) -> Vec<Diagnostic> {
        let mut v = self.items.clone();
        v.sort();
        v.dedup();
        v
    }
}

/// A partial map from variables to ground terms. Compared by content;
/// iteration is in variable-name order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Binding(BTreeMap<Arc<str>, Term>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn singleton(var: impl AsRef<str>, value: Term) -> Self {
        let mut b = Binding::new();
        b.0.insert(Arc::from(var.as_ref()), value);
        b
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    /// Binds a variable; an already-bound variable accepts only the same
    /// value. Returns false when the values conflict.
    pub fn bind(&mut self, var: &Arc<str>, value: &Term) -> bool {
        match self.0.get(var) {
            Some(existing) => existing == value,
            None => {
                self.0.insert(var.clone(), value.clone());
                true
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, &Term)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical text, e.g. `?g="male" ?this=casemanager:o1`.
    pub fn canonical(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, t)| format!("?{}={}", v, t.canonical()))
            .collect();
        parts.join(" ")
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Binding({})", self.canonical())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CompareOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Le => "<=",
            CompareOp::Ge => ">=",
        }
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self, CompareOp::Lt | CompareOp::Gt | CompareOp::Le | CompareOp::Ge)
    }
}

/// One side of a comparison: a ground term, a variable, or `now()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterOperand {
    Term(Term),
    Now,
}

/// Boolean expression tree over binary comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    Compare(CompareOp, FilterOperand, FilterOperand),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
}

impl FilterExpr {
    pub fn variables(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_variables(&self, out: &mut Vec<Arc<str>>) {
        match self {
            FilterExpr::Compare(_, l, r) => {
                for op in [l, r] {
                    if let FilterOperand::Term(Term::Variable(v)) = op {
                        out.push(v.clone());
                    }
                }
            }
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            FilterExpr::Not(e) => e.collect_variables(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Exists,
    NotExists,
}

/// A basic graph pattern with filters and nested EXISTS / NOT EXISTS
/// groups. Group matches never export bindings outward.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphPattern {
    pub atoms: Vec<Triple>,
    pub filters: Vec<FilterExpr>,
    pub groups: Vec<(GroupKind, GraphPattern)>,
}

/// Triple templates instantiated by CONSTRUCT / DELETE / INSERT clauses.
pub type ConstructTemplate = Vec<Triple>;

impl GraphPattern {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.filters.is_empty() && self.groups.is_empty()
    }

    /// Variables bound by this pattern's own atoms.
    pub fn atom_variables(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        for atom in &self.atoms {
            for term in atom.terms() {
                if let Term::Variable(v) = term {
                    out.push(v.clone());
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Ground predicate names mentioned anywhere in the pattern,
    /// including inside groups.
    pub fn predicates(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_predicates(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_predicates(&self, out: &mut Vec<Name>) {
        for atom in &self.atoms {
            if let Term::Name(p) = &atom.predicate {
                out.push(p.clone());
            }
        }
        for (_, g) in &self.groups {
            g.collect_predicates(out);
        }
    }

    /// Ground classes of `a`-atoms anywhere in the pattern.
    pub fn type_classes(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_type_classes(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_type_classes(&self, out: &mut Vec<Name>) {
        for atom in &self.atoms {
            if atom.predicate.as_name().is_some_and(Name::is_type_pred) {
                if let Term::Name(c) = &atom.object {
                    out.push(c.clone());
                }
            }
        }
        for (_, g) in &self.groups {
            g.collect_type_classes(out);
        }
    }

    /// Checks that every filter and group variable can be bound, given
    /// variables already bound by an enclosing scope. Returns the first
    /// offending variable.
    pub fn check_well_formed(&self, outer: &[Arc<str>]) -> Result<(), PatternError> {
        let mut scope: Vec<Arc<str>> = outer.to_vec();
        scope.extend(self.atom_variables());
        scope.sort();
        scope.dedup();
        for f in &self.filters {
            for v in f.variables() {
                if !scope.contains(&v) {
                    return Err(PatternError::UnboundFilterVariable(v.to_string()));
                }
            }
        }
        for (_, g) in &self.groups {
            g.check_well_formed(&scope)?;
        }
        Ok(())
    }
}

/// Instantiates a triple template under a binding; all variables must be
/// bound.
pub fn instantiate_triple(template: &Triple, binding: &Binding) -> Result<Triple, PatternError> {
    let resolve = |t: &Term| -> Result<Term, PatternError> {
        match t {
            Term::Variable(v) => binding
                .get(v)
                .cloned()
                .ok_or_else(|| PatternError::UnboundTemplateVariable(v.to_string())),
            other => Ok(other.clone()),
        }
    };
    Ok(Triple {
        subject: resolve(&template.subject)?,
        predicate: resolve(&template.predicate)?,
        object: resolve(&template.object)?,
    })
}

/// Returns every binding extending `seed` under which all triple
/// patterns hold in the store, all filters are true, every EXISTS group
/// has at least one match and every NOT EXISTS group has none. Output is
/// sorted by canonical binding text.
pub fn match_pattern(
    store: &TripleStore,
    pattern: &GraphPattern,
    seed: &Binding,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<Vec<Binding>, PatternError> {
    let mut out = Vec::new();
    let applied = vec![false; pattern.filters.len()];
    solve(store, pattern, 0, applied, seed.clone(), clock, diags, &mut out)?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    store: &TripleStore,
    pattern: &GraphPattern,
    atom_idx: usize,
    mut filters_applied: Vec<bool>,
    binding: Binding,
    clock: &Clock,
    diags: &mut Diagnostics,
    out: &mut Vec<Binding>,
) -> Result<(), PatternError> {
    // Run any filter whose variables are all bound and which has not run
    // yet; a false filter prunes this branch.
    for (i, filter) in pattern.filters.iter().enumerate() {
        if filters_applied[i] {
            continue;
        }
        if filter.variables().iter().all(|v| binding.contains(v)) {
            filters_applied[i] = true;
            if !eval_filter(filter, &binding, clock, diags)? {
                return Ok(());
            }
        }
    }

    if atom_idx == pattern.atoms.len() {
        // All atoms matched; any filter still unapplied has an unbound
        // variable.
        for (i, filter) in pattern.filters.iter().enumerate() {
            if !filters_applied[i] {
                let unbound = filter
                    .variables()
                    .into_iter()
                    .find(|v| !binding.contains(v))
                    .expect("unapplied filter has an unbound variable");
                return Err(PatternError::UnboundFilterVariable(unbound.to_string()));
            }
        }
        for (kind, group) in &pattern.groups {
            let matches = match_pattern(store, group, &binding, clock, diags)?;
            let ok = match kind {
                GroupKind::Exists => !matches.is_empty(),
                GroupKind::NotExists => matches.is_empty(),
            };
            if !ok {
                return Ok(());
            }
        }
        out.push(binding);
        return Ok(());
    }

    let atom = &pattern.atoms[atom_idx];
    let resolved = |term: &Term| -> Option<Term> {
        match term {
            Term::Variable(v) => binding.get(v).cloned(),
            other => Some(other.clone()),
        }
    };
    let s = resolved(&atom.subject);
    let p = resolved(&atom.predicate);
    let o = resolved(&atom.object);

    let s_name = s.as_ref().and_then(Term::as_name);
    let p_name = p.as_ref().and_then(Term::as_name);
    // A bound subject that is not a name can never match a stored triple.
    if s.is_some() && s_name.is_none() {
        return Ok(());
    }
    if p.is_some() && p_name.is_none() {
        return Ok(());
    }

    let candidates: Vec<Triple> = store
        .matching(s_name, p_name, o.as_ref())
        .cloned()
        .collect();
    for candidate in candidates {
        let mut next = binding.clone();
        let mut ok = true;
        for (pat, got) in [
            (&atom.subject, &candidate.subject),
            (&atom.predicate, &candidate.predicate),
            (&atom.object, &candidate.object),
        ] {
            match pat {
                Term::Variable(v) => {
                    if !next.bind(v, got) {
                        ok = false;
                        break;
                    }
                }
                ground => {
                    if ground != got {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            solve(
                store,
                pattern,
                atom_idx + 1,
                filters_applied.clone(),
                next,
                clock,
                diags,
                out,
            )?;
        }
    }
    Ok(())
}

/// Evaluates a filter under a binding. Comparisons between literals of
/// different tags, or ordered comparisons involving a name or a boolean,
/// yield false and emit a TypeMismatch diagnostic.
pub fn eval_filter(
    expr: &FilterExpr,
    binding: &Binding,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<bool, PatternError> {
    match expr {
        FilterExpr::And(a, b) => {
            Ok(eval_filter(a, binding, clock, diags)? && eval_filter(b, binding, clock, diags)?)
        }
        FilterExpr::Or(a, b) => {
            Ok(eval_filter(a, binding, clock, diags)? || eval_filter(b, binding, clock, diags)?)
        }
        FilterExpr::Not(e) => Ok(!eval_filter(e, binding, clock, diags)?),
        FilterExpr::Compare(op, l, r) => {
            let lt = resolve_operand(l, binding, clock)?;
            let rt = resolve_operand(r, binding, clock)?;
            Ok(compare_terms(*op, &lt, &rt, diags))
        }
    }
}

fn resolve_operand(
    op: &FilterOperand,
    binding: &Binding,
    clock: &Clock,
) -> Result<Term, PatternError> {
    match op {
        FilterOperand::Now => Ok(Term::datetime(clock.now())),
        FilterOperand::Term(Term::Variable(v)) => binding
            .get(v)
            .cloned()
            .ok_or_else(|| PatternError::UnboundFilterVariable(v.to_string())),
        FilterOperand::Term(t) => Ok(t.clone()),
    }
}

fn compare_terms(op: CompareOp, l: &Term, r: &Term, diags: &mut Diagnostics) -> bool {
    use std::cmp::Ordering;
    if !op.is_ordered() {
        // Equality is defined for all ground terms: names equal by byte
        // equality, literals only within the same tag.
        let eq = l == r;
        return match op {
            CompareOp::Eq => eq,
            CompareOp::Ne => !eq,
            _ => unreachable!(),
        };
    }
    let ord = match (l, r) {
        (Term::Literal(Literal::Str(a)), Term::Literal(Literal::Str(b))) => a.as_bytes().cmp(b.as_bytes()),
        (Term::Literal(Literal::Int(a)), Term::Literal(Literal::Int(b))) => a.cmp(b),
        (Term::Literal(Literal::DateTime(a)), Term::Literal(Literal::DateTime(b))) => a.cmp(b),
        _ => {
            diags.push(
                DiagnosticKind::TypeMismatch,
                format!(
                    "ordered comparison {} {} {} is not defined; evaluated as false",
                    l.canonical(),
                    op.symbol(),
                    r.canonical()
                ),
            );
            return false;
        }
    };
    match op {
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
        _ => unreachable!(),
    }
}

/// True iff the pattern has at least one match extending `seed`.
pub fn eval_ask(
    store: &TripleStore,
    pattern: &GraphPattern,
    seed: &Binding,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<bool, PatternError> {
    Ok(!match_pattern(store, pattern, seed, clock, diags)?.is_empty())
}

/// Instantiates the template once per WHERE binding extending `seed` and
/// returns the union of the resulting ground triples. The store is not
/// mutated.
pub fn eval_construct_seeded(
    store: &TripleStore,
    template: &ConstructTemplate,
    where_: &GraphPattern,
    seed: &Binding,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<std::collections::BTreeSet<Triple>, PatternError> {
    let mut out = std::collections::BTreeSet::new();
    for binding in match_pattern(store, where_, seed, clock, diags)? {
        for t in template {
            out.insert(instantiate_triple(t, &binding)?);
        }
    }
    Ok(out)
}

/// `eval_construct_seeded` with an empty seed.
pub fn eval_construct(
    store: &TripleStore,
    template: &ConstructTemplate,
    where_: &GraphPattern,
    clock: &Clock,
    diags: &mut Diagnostics,
) -> Result<std::collections::BTreeSet<Triple>, PatternError> {
    eval_construct_seeded(store, template, where_, &Binding::new(), clock, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clock(s: &str) -> Clock {
        Clock::new(DateTime::parse(s).unwrap())
    }

    fn atom(s: Term, p: &str, o: Term) -> Triple {
        Triple::new(s, Term::name(p), o)
    }

    #[test]
    fn single_atom_binds_variable() {
        let store: TripleStore = [Triple::new(
            Term::name("casemanager:o1"),
            Term::name("casemanager:state"),
            Term::str("Initial"),
        )]
        .into_iter()
        .collect();
        let pattern = GraphPattern {
            atoms: vec![atom(Term::var("o"), "casemanager:state", Term::str("Initial"))],
            ..Default::default()
        };
        let mut diags = Diagnostics::new();
        let got = match_pattern(&store, &pattern, &Binding::new(), &clock("2016-01-01T00:00:00"), &mut diags).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].get("o"), Some(&Term::name("casemanager:o1")));
    }

    #[test]
    fn empty_pattern_returns_seed() {
        let store = TripleStore::new();
        let seed = Binding::singleton("this", Term::name("x:o1"));
        let mut diags = Diagnostics::new();
        let got = match_pattern(&store, &GraphPattern::default(), &seed, &clock("2016-01-01T00:00:00"), &mut diags).unwrap();
        assert_eq!(got, vec![seed]);
    }

    #[test]
    fn gender_filter_matches_violating_value() {
        // FILTER ((?g != "male") && (?g != "female"))
        let expr = FilterExpr::And(
            Box::new(FilterExpr::Compare(
                CompareOp::Ne,
                FilterOperand::Term(Term::var("g")),
                FilterOperand::Term(Term::str("male")),
            )),
            Box::new(FilterExpr::Compare(
                CompareOp::Ne,
                FilterOperand::Term(Term::var("g")),
                FilterOperand::Term(Term::str("female")),
            )),
        );
        let mut diags = Diagnostics::new();
        let ck = clock("2016-01-01T00:00:00");
        let other = Binding::singleton("g", Term::str("other"));
        assert!(eval_filter(&expr, &other, &ck, &mut diags).unwrap());
        let male = Binding::singleton("g", Term::str("male"));
        assert!(!eval_filter(&expr, &male, &ck, &mut diags).unwrap());
    }

    #[test]
    fn date_order_filter() {
        // ?da > ?de with da earlier than de is false.
        let expr = FilterExpr::Compare(
            CompareOp::Gt,
            FilterOperand::Term(Term::var("da")),
            FilterOperand::Term(Term::var("de")),
        );
        let mut b = Binding::new();
        b.bind(&Arc::from("da"), &Term::datetime(DateTime::parse("2016-01-05T00:00:00").unwrap()));
        b.bind(&Arc::from("de"), &Term::datetime(DateTime::parse("2016-01-20T00:00:00").unwrap()));
        let mut diags = Diagnostics::new();
        assert!(!eval_filter(&expr, &b, &clock("2016-01-01T00:00:00"), &mut diags).unwrap());
    }

    #[test]
    fn now_comparison() {
        // ?appdate < now() with appdate strictly before the clock.
        let expr = FilterExpr::Compare(
            CompareOp::Lt,
            FilterOperand::Term(Term::var("appdate")),
            FilterOperand::Now,
        );
        let b = Binding::singleton(
            "appdate",
            Term::datetime(DateTime::parse("2016-02-01T10:00:00").unwrap()),
        );
        let mut diags = Diagnostics::new();
        assert!(eval_filter(&expr, &b, &clock("2016-02-02T00:00:00"), &mut diags).unwrap());
        assert!(!eval_filter(&expr, &b, &clock("2016-02-01T10:00:00"), &mut diags).unwrap());
    }

    #[test]
    fn type_mismatch_is_false_with_diagnostic() {
        let expr = FilterExpr::Compare(
            CompareOp::Lt,
            FilterOperand::Term(Term::str("5")),
            FilterOperand::Term(Term::int(6)),
        );
        let mut diags = Diagnostics::new();
        assert!(!eval_filter(&expr, &Binding::new(), &clock("2016-01-01T00:00:00"), &mut diags).unwrap());
        assert_eq!(diags.items().len(), 1);
        assert_eq!(diags.items()[0].kind, DiagnosticKind::TypeMismatch);
        // Equality across tags is defined and false.
        let eq = FilterExpr::Compare(
            CompareOp::Eq,
            FilterOperand::Term(Term::str("5")),
            FilterOperand::Term(Term::int(5)),
        );
        assert!(!eval_filter(&eq, &Binding::new(), &clock("2016-01-01T00:00:00"), &mut diags).unwrap());
    }

    #[test]
    fn unbound_filter_variable_is_an_error() {
        let store: TripleStore = [Triple::new(
            Term::name("x:o1"),
            Term::name("x:p"),
            Term::int(1),
        )]
        .into_iter()
        .collect();
        let pattern = GraphPattern {
            atoms: vec![atom(Term::var("o"), "x:p", Term::int(1))],
            filters: vec![FilterExpr::Compare(
                CompareOp::Eq,
                FilterOperand::Term(Term::var("missing")),
                FilterOperand::Term(Term::int(1)),
            )],
            ..Default::default()
        };
        let mut diags = Diagnostics::new();
        let err = match_pattern(&store, &pattern, &Binding::new(), &clock("2016-01-01T00:00:00"), &mut diags);
        assert_eq!(err, Err(PatternError::UnboundFilterVariable("missing".into())));
        assert!(pattern.check_well_formed(&[]).is_err());
    }

    #[test]
    fn not_exists_group() {
        let mut store = TripleStore::new();
        store
            .add(Triple::new(Term::name("x:o1"), Term::name("x:state"), Term::str("Approved")))
            .unwrap();
        let group = GraphPattern {
            atoms: vec![atom(Term::var("o"), "x:appdate", Term::var("dt"))],
            ..Default::default()
        };
        let pattern = GraphPattern {
            atoms: vec![atom(Term::var("o"), "x:state", Term::str("Approved"))],
            groups: vec![(GroupKind::NotExists, group)],
            ..Default::default()
        };
        let ck = clock("2016-01-01T00:00:00");
        let mut diags = Diagnostics::new();
        assert_eq!(match_pattern(&store, &pattern, &Binding::new(), &ck, &mut diags).unwrap().len(), 1);
        store
            .add(Triple::new(
                Term::name("x:o1"),
                Term::name("x:appdate"),
                Term::datetime(DateTime::parse("2016-02-01T10:00:00").unwrap()),
            ))
            .unwrap();
        assert_eq!(match_pattern(&store, &pattern, &Binding::new(), &ck, &mut diags).unwrap().len(), 0);
    }

    #[test]
    fn construct_instantiates_per_binding() {
        let store: TripleStore = [
            Triple::new(Term::name("x:o1"), Term::name("a"), Term::name("x:Order")),
            Triple::new(Term::name("x:o2"), Term::name("a"), Term::name("x:Order")),
        ]
        .into_iter()
        .collect();
        let template = vec![atom(Term::var("this"), "x:state", Term::str("Initial"))];
        let where_ = GraphPattern {
            atoms: vec![atom(Term::var("this"), "a", Term::name("x:Order"))],
            ..Default::default()
        };
        let mut diags = Diagnostics::new();
        let got = eval_construct(&store, &template, &where_, &clock("2016-01-01T00:00:00"), &mut diags).unwrap();
        assert_eq!(got.len(), 2);
        let empty = eval_construct(&TripleStore::new(), &template, &where_, &clock("2016-01-01T00:00:00"), &mut diags).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn repeated_variable_in_atom_must_unify() {
        let store: TripleStore = [
            Triple::new(Term::name("x:o1"), Term::name("x:p"), Term::name("x:o1")),
            Triple::new(Term::name("x:o2"), Term::name("x:p"), Term::name("x:o3")),
        ]
        .into_iter()
        .collect();
        let pattern = GraphPattern {
            atoms: vec![atom(Term::var("x"), "x:p", Term::var("x"))],
            ..Default::default()
        };
        let mut diags = Diagnostics::new();
        let got = match_pattern(&store, &pattern, &Binding::new(), &clock("2016-01-01T00:00:00"), &mut diags).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].get("x"), Some(&Term::name("x:o1")));
    }
}
