//! Rule-based diagnosis of primary headaches: a small answer-set style
//! language, its three-valued evaluator, the diagnostic knowledge base and
//! the adaptive questionnaire built on top of it.

pub mod engine;
pub mod syntax;
pub mod knowledge;
pub mod questionnaire;
pub mod simulation;
