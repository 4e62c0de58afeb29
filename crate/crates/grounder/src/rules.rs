//! Ground rules and programs.

use std::collections::BTreeSet;

use crate::atoms::{AtomId, AtomTable};

/// One propositional rule. `pos`/`neg` are sorted and duplicate-free;
/// a normal rule's head never appears in its own body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundRule {
    Normal {
        head: AtomId,
        pos: Vec<AtomId>,
        neg: Vec<AtomId>,
    },
    Choice {
        lower: i64,
        heads: Vec<AtomId>,
        upper: i64,
        pos: Vec<AtomId>,
        neg: Vec<AtomId>,
    },
    Constraint {
        pos: Vec<AtomId>,
        neg: Vec<AtomId>,
    },
    /// `head <- lower <= sum of weights of satisfied elements`; headless
    /// form is a constraint forbidding the sum from reaching the bound.
    /// Elements are `(atom, positive?, weight)` with positive weights.
    WeightBody {
        head: Option<AtomId>,
        lower: i64,
        elements: Vec<(AtomId, bool, i64)>,
    },
}

#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    pub atoms: AtomTable,
    pub rules: Vec<GroundRule>,
    pub facts: BTreeSet<AtomId>,
}

impl GroundProgram {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }
}
