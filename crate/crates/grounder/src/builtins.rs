//! Ground evaluation of terms and builtin relations.

use std::collections::BTreeMap;

use lp_lang::{Rel, Term};
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    #[error("variable `{0}` is unbound during evaluation")]
    UnboundVariable(String),
    #[error("64-bit arithmetic overflow during grounding")]
    Overflow,
    #[error("aggregate weight {weight} on `{atom}` must be positive")]
    NonPositiveWeight { atom: String, weight: i64 },
}

pub type Binding = BTreeMap<String, i64>;

/// Evaluates a term under a binding; every variable must be bound.
pub fn eval_term(term: &Term, binding: &Binding) -> Result<i64, GroundError> {
    match term {
        Term::Int(v) => Ok(*v),
        Term::Var(name) => binding
            .get(name)
            .copied()
            .ok_or_else(|| GroundError::UnboundVariable(name.clone())),
        Term::Add(a, b) => eval_term(a, binding)?
            .checked_add(eval_term(b, binding)?)
            .ok_or(GroundError::Overflow),
        Term::Sub(a, b) => eval_term(a, binding)?
            .checked_sub(eval_term(b, binding)?)
            .ok_or(GroundError::Overflow),
        Term::Abs(a) => eval_term(a, binding)?.checked_abs().ok_or(GroundError::Overflow),
    }
}

/// Evaluates a term if all of its variables happen to be bound.
pub fn try_eval_term(term: &Term, binding: &Binding) -> Result<Option<i64>, GroundError> {
    match eval_term(term, binding) {
        Ok(v) => Ok(Some(v)),
        Err(GroundError::UnboundVariable(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Standard integer semantics for a builtin relation.
pub fn eval_builtin(
    rel: Rel,
    lhs: &Term,
    rhs: &Term,
    binding: &Binding,
) -> Result<bool, GroundError> {
    let l = eval_term(lhs, binding)?;
    let r = eval_term(rhs, binding)?;
    Ok(match rel {
        Rel::Lt => l < r,
        Rel::Le => l <= r,
        Rel::Eq => l == r,
        Rel::Ne => l != r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binding(pairs: &[(&str, i64)]) -> Binding {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn diagonal_builtin_example() {
        // X2 - X1 = abs(Y1 - Y2) at X=(1,2), Y=(1,2)
        let b = binding(&[("X1", 1), ("X2", 2), ("Y1", 1), ("Y2", 2)]);
        let lhs = Term::Sub(
            Box::new(Term::Var("X2".into())),
            Box::new(Term::Var("X1".into())),
        );
        let rhs = Term::Abs(Box::new(Term::Sub(
            Box::new(Term::Var("Y1".into())),
            Box::new(Term::Var("Y2".into())),
        )));
        assert_eq!(eval_builtin(Rel::Eq, &lhs, &rhs, &b), Ok(true));
    }

    #[test]
    fn strict_comparison_is_irreflexive() {
        let b = Binding::new();
        assert_eq!(
            eval_builtin(Rel::Lt, &Term::Int(3), &Term::Int(3), &b),
            Ok(false)
        );
    }

    #[test]
    fn abs_difference_disequality() {
        let b = Binding::new();
        let lhs = Term::Abs(Box::new(Term::Sub(
            Box::new(Term::Int(1)),
            Box::new(Term::Int(4)),
        )));
        assert_eq!(eval_builtin(Rel::Ne, &lhs, &Term::Int(3), &b), Ok(false));
    }

    #[test]
    fn unbound_variable_is_structural() {
        let b = Binding::new();
        assert_eq!(
            eval_term(&Term::Var("X".into()), &b),
            Err(GroundError::UnboundVariable("X".into()))
        );
    }

    #[test]
    fn overflow_is_structural() {
        let b = Binding::new();
        let t = Term::Add(Box::new(Term::Int(i64::MAX)), Box::new(Term::Int(1)));
        assert_eq!(eval_term(&t, &b), Err(GroundError::Overflow));
    }
}
