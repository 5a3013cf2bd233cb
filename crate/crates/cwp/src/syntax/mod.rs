//! Concrete syntax: one lexer shared by the modeling language, scenario
//! files, and the canonical triple text format.

pub mod lexer;
mod model_text;
mod scenario_text;
mod triples;

pub use model_text::{parse_model, print_model};
pub use scenario_text::parse_scenario;
pub use triples::parse_triples;

use std::fmt;

use thiserror::Error;

/// A positioned parse or validation error (1-based line and column).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}
