//! Three-valued evaluation of stratified programs with strong negation.

mod compiled;
mod eval;
mod ground;
pub(crate) mod matching;
mod model;
mod stratify;

use thiserror::Error;

use crate::syntax::Atom;

pub use compiled::{CompiledProgram, GroundModel};
pub use eval::evaluate;
pub use ground::ground;
pub use model::{count_by_predicate, determined_count, Model, TruthValue};
pub use stratify::{stratify, Stratification};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("program is not stratified: cycle through negation among {}", cycle.join(", "))]
    NotStratified { cycle: Vec<String> },
    #[error("inconsistent: both {atom} and -{atom} derived")]
    Inconsistent { atom: Atom },
    #[error("unsafe rule `{rule}`: {detail}")]
    Unsafe { rule: String, detail: String },
    #[error("fact {atom} is outside the compiled domain")]
    OutsideDomain { atom: Atom },
}
