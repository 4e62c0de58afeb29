//! Rule language: parser, AST, and renderer.
//!
//! Programs are strongly range restricted: every variable of a rule occurs
//! in a positive domain-predicate atom of that rule (expansion guards bind
//! element-local variables). Domain predicates are those defined only by
//! facts and `p(l..h)` interval declarations.
//!
//! Concrete syntax, in short: `:-` is the rule arrow, `not` is negation as
//! failure, `%` starts a comment, builtins are `<  <=  >  >=  =  !=` over
//! `+`, `-`, and `abs(...)`, choice rules are `l { a : guard ; ... } u :-
//! body.` and aggregate bodies are `l #count { ... }` / `l #sum { a = w ;
//! ... }`. The full grammar lives in `docs/lp-grammar.md`.

mod ast;
mod lexer;
mod parser;

pub use ast::{
    render, AggKind, Atom, ChoiceElement, Literal, Rel, Rule, RuleProgram, Term, WeightedElement,
};
pub use parser::{parse_program, ParseError};
