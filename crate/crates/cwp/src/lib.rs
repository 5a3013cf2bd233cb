//! Modeling and solvability verification of declarative work products.
//!
//! A work product specification is a class model plus a state machine,
//! written in a small textual language whose constraint and rule bodies
//! stay close to the SPARQL-style originals they are usually transcribed
//! from. The toolkit represents instance data as triples under closed
//! world semantics and the unique name assumption, and then answers two
//! questions about a specification:
//!
//! * is the data consistent — structural axioms (domains, ranges,
//!   cardinality, composition, disjointness) and per-class ASK
//!   constraints, where a matching ASK body is a violation; and
//! * is the state machine solvable — every declared state reachable,
//!   every reachable non-final state able to make progress under the
//!   declared environment model (no deadlocks), and the rules cohesive
//!   with the class model.
//!
//! The crate is organized around the pipeline:
//!
//! * [`term`] / [`store`] — terms, triples, and the indexed triple store.
//! * [`pattern`] — graph patterns, filters, EXISTS groups, ASK and
//!   CONSTRUCT evaluation.
//! * [`schema`] — class-model translation to a semantic schema,
//!   materialization, and structural checking.
//! * [`rules`] — ASK constraints, constructors, and DELETE/INSERT/WHERE
//!   transition rules run to a fixed point (naive and incremental).
//! * [`machine`] — state graph extraction, reachability, deadlock and
//!   coverage analysis, cohesion checking.
//! * [`scenario`] — scenario simulation with deterministic traces and a
//!   rule-order confluence probe.
//! * [`syntax`] — parsers and the canonical printer.
//! * [`fixture`] — the bundled outpatient case-management model.
//! * [`cli`] — the `cwp` command-line frontend.
//!
//! The `examples/` directory shows one runnable program per capability;
//! start with `store_basics` and `lifecycle_simulation`.

pub mod cli;
pub mod fixture;
pub mod lint;
pub mod machine;
pub mod model;
pub mod pattern;
pub mod report;
pub mod rules;
pub mod scenario;
pub mod schema;
pub mod store;
pub mod syntax;
pub mod term;

pub use model::WorkModel;
pub use pattern::{Binding, Clock, Diagnostics, FilterExpr, GraphPattern};
pub use rules::{AskConstraint, Constructor, FireTrace, RunStatus, TransitionRule, Violation};
pub use schema::{SemanticSchema, TranslationOptions};
pub use store::{StoreDigest, TripleStore};
pub use term::{DateTime, Literal, Name, Term, Triple};
