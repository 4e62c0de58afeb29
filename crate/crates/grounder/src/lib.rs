//! Grounder: instantiates a range-restricted rule program over its finite
//! domains into an indexed propositional program.
//!
//! The production grounder ([`ground`]) joins substitutions over domain
//! extensions and drops instances whose builtins are false, so guards like
//! `X1 < X2` never reach the output. [`naive::ground_naive`] is a
//! deliberately unoptimized reference used to audit it.

mod atoms;
mod builtins;
mod ground;
pub mod naive;
mod rules;
mod text;

pub use atoms::{AtomId, AtomTable, GroundAtom};
pub use builtins::{eval_builtin, eval_term, try_eval_term, Binding, GroundError};
pub use ground::{ground, GroundStats, Grounding};
pub use rules::{GroundProgram, GroundRule};
pub use text::{parse_text, to_text, TextError};
