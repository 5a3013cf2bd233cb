//! Advisory lints over a parsed model: declared-but-unused properties,
//! numbered property families that look like one property, and
//! transition guards that require a date strictly before the clock.

use std::collections::BTreeSet;

use crate::model::WorkModel;
use crate::pattern::{CompareOp, FilterExpr, FilterOperand, GraphPattern};
use crate::report::{Finding, Severity};
use crate::schema::{AssociationKind, RangeTag};
use crate::term::{Name, Term, Triple};

pub fn lint_model(model: &WorkModel) -> Vec<Finding> {
    let mut findings = Vec::new();
    unused_properties(model, &mut findings);
    similar_property_families(model, &mut findings);
    past_date_guards(model, &mut findings);
    findings.sort();
    findings
}

fn referenced_properties(model: &WorkModel) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let walk_atoms = |atoms: &[Triple], out: &mut BTreeSet<Name>| {
        for atom in atoms {
            if let Some(p) = atom.predicate.as_name() {
                out.insert(p.clone());
            }
        }
    };
    fn walk_pattern(p: &GraphPattern, out: &mut BTreeSet<Name>) {
        for atom in &p.atoms {
            if let Some(n) = atom.predicate.as_name() {
                out.insert(n.clone());
            }
        }
        for (_, g) in &p.groups {
            walk_pattern(g, out);
        }
    }
    for c in &model.constraints {
        walk_pattern(&c.body, &mut out);
    }
    for c in &model.constructors {
        walk_pattern(&c.where_, &mut out);
        walk_atoms(&c.template, &mut out);
    }
    for r in &model.rules {
        walk_pattern(&r.where_, &mut out);
        walk_atoms(&r.delete, &mut out);
        walk_atoms(&r.insert, &mut out);
    }
    for m in &model.machines {
        out.insert(m.state_property.clone());
    }
    out
}

/// Attributes and plain associations no constraint, constructor, rule,
/// machine, or partition touches. Part-whole associations and inverses
/// carry structural meaning on their own and are exempt.
fn unused_properties(model: &WorkModel, findings: &mut Vec<Finding>) {
    let referenced = referenced_properties(model);
    let partitioned: BTreeSet<&Name> = model
        .class_model
        .value_partitions
        .iter()
        .map(|p| &p.attribute)
        .collect();
    for attr in &model.class_model.attributes {
        if !referenced.contains(&attr.name) && !partitioned.contains(&attr.name) {
            findings.push(Finding::new(
                Severity::Note,
                "LINT:UnusedProperty",
                attr.name.to_string(),
                format!(
                    "attribute of {} is not used by any constraint, constructor, or rule",
                    attr.owner
                ),
            ));
        }
    }
    for assoc in &model.class_model.associations {
        if assoc.kind == AssociationKind::Plain && !referenced.contains(&assoc.name) {
            findings.push(Finding::new(
                Severity::Note,
                "LINT:UnusedProperty",
                assoc.name.to_string(),
                format!(
                    "association {} -> {} is not used by any constraint, constructor, or rule",
                    assoc.source, assoc.target
                ),
            ));
        }
    }
}

/// `patientName`, `patientName2`, `patientName3` read like copies of one
/// property; surface the family once.
fn similar_property_families(model: &WorkModel, findings: &mut Vec<Finding>) {
    let mut families: std::collections::BTreeMap<String, Vec<&Name>> = Default::default();
    for attr in &model.class_model.attributes {
        let local = attr.name.local();
        let stem = local.trim_end_matches(|c: char| c.is_ascii_digit());
        if stem.is_empty() {
            continue;
        }
        families.entry(stem.to_string()).or_default().push(&attr.name);
    }
    for (stem, members) in families {
        let numbered = members
            .iter()
            .any(|n| n.local().len() > stem.len());
        if members.len() >= 2 && numbered {
            let list: Vec<String> = members.iter().map(|n| n.to_string()).collect();
            findings.push(Finding::new(
                Severity::Note,
                "LINT:SimilarProperties",
                list.join(", "),
                "numbered variants of one property; consider a single shared property".to_string(),
            ));
        }
    }
}

/// A guard `FILTER (?d < now())` fires only while the bound date lies
/// strictly before the evaluation clock. Worth a note: transitions named
/// "waiting" often intend the opposite reading.
fn past_date_guards(model: &WorkModel, findings: &mut Vec<Finding>) {
    for rule in &model.rules {
        for filter in &rule.where_.filters {
            for var in past_compared_vars(filter) {
                let prop = rule.where_.atoms.iter().find_map(|atom| {
                    match (&atom.object, atom.predicate.as_name()) {
                        (Term::Variable(v), Some(p)) if v.as_ref() == var => Some(p.clone()),
                        _ => None,
                    }
                });
                let bound = prop
                    .as_ref()
                    .map(|p| p.to_string())
                    .unwrap_or_else(|| format!("?{}", var));
                let is_date = prop
                    .and_then(|p| {
                        model
                            .class_model
                            .attributes
                            .iter()
                            .find(|a| a.name == p)
                            .map(|a| a.datatype == RangeTag::DateTime)
                    })
                    .unwrap_or(true);
                if is_date {
                    findings.push(Finding::new(
                        Severity::Note,
                        "LINT:PastDateGuard",
                        format!("rule {}", rule.id),
                        format!(
                            "guard requires {} strictly before the evaluation clock (`< now()`)",
                            bound
                        ),
                    ));
                }
            }
        }
    }
}

fn past_compared_vars(expr: &FilterExpr) -> Vec<&str> {
    match expr {
        FilterExpr::Compare(CompareOp::Lt, FilterOperand::Term(Term::Variable(v)), FilterOperand::Now) => {
            vec![v.as_ref()]
        }
        FilterExpr::Compare(CompareOp::Gt, FilterOperand::Now, FilterOperand::Term(Term::Variable(v))) => {
            vec![v.as_ref()]
        }
        FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
            let mut out = past_compared_vars(a);
            out.extend(past_compared_vars(b));
            out
        }
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::load_fixture;

    #[test]
    fn fixture_lints_name_the_known_quirks() {
        let model = load_fixture();
        let findings = lint_model(&model);
        let unused: Vec<&str> = findings
            .iter()
            .filter(|f| f.code == "LINT:UnusedProperty")
            .map(|f| f.subject.as_str())
            .collect();
        // `launched` and `launchtransition` are declared but no rule
        // reads or writes them.
        assert_eq!(unused, vec!["casemanager:launched", "casemanager:launchtransition"]);
        assert!(findings
            .iter()
            .any(|f| f.code == "LINT:SimilarProperties" && f.subject.contains("patientName2")));
        let past: Vec<&str> = findings
            .iter()
            .filter(|f| f.code == "LINT:PastDateGuard")
            .map(|f| f.subject.as_str())
            .collect();
        assert_eq!(past, vec!["rule T6"]);
    }
}
