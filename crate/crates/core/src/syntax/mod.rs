//! The knowledge-base language: terms, atoms, literals, count aggregates,
//! rules and programs, with a parser and a canonical printer.
//!
//! Surface syntax:
//!
//! ```text
//! % comment
//! ichdDiagnosis(d.1.1, "migraine without aura").
//! diagnosis(IdSup) :- diagnosis(Id), isA(Id, IdSup).
//! -criterion(Id, "C") :- ichdDiagnosis(Id, "migraine without aura"),
//!     #count{X : -subCriterion(Id, "C", X)} >= 3.
//! ```

mod ast;
mod parser;
mod printer;
pub mod schema;

pub use ast::{
    Aggregate, Atom, BodyElem, Comparator, Fact, Literal, Pos, Program, Rule, SafetyViolation,
    Term,
};
pub use parser::{parse_program, parse_rule, ParseError};
pub use printer::print_program;
pub use schema::{validate_schema, Diagnostic, PredicateKind, Severity};
