//! The parsed work model: prefix table, class model, constraints,
//! constructors, transition rules, state machine declarations, property
//! mutability, and translation options.

use crate::machine::{PropertyMutability, StateMachineDecl};
use crate::rules::{AskConstraint, Constructor, TransitionRule};
use crate::schema::{TranslationOptions, UmlClassModel};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorkModel {
    /// Declared namespace prefixes, in declaration order.
    pub prefixes: Vec<(String, String)>,
    pub class_model: UmlClassModel,
    pub constraints: Vec<AskConstraint>,
    pub constructors: Vec<Constructor>,
    pub rules: Vec<TransitionRule>,
    pub machines: Vec<StateMachineDecl>,
    pub mutability: PropertyMutability,
    pub options: TranslationOptions,
}

impl WorkModel {
    pub fn has_prefix(&self, prefix: &str) -> bool {
        self.prefixes.iter().any(|(p, _)| p == prefix)
    }

    pub fn rule(&self, id: &str) -> Option<&TransitionRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn constraint(&self, id: &str) -> Option<&AskConstraint> {
        self.constraints.iter().find(|c| c.id == id)
    }

    /// The machine whose subject class the given class specializes.
    pub fn machine_for(
        &self,
        class: &crate::term::Name,
        schema: &crate::schema::SemanticSchema,
    ) -> Option<&StateMachineDecl> {
        self.machines
            .iter()
            .find(|m| schema.is_subclass(class, &m.subject))
    }
}
