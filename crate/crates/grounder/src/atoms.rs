//! Ground atoms and the bidirectional atom table.

use std::collections::HashMap;
use std::fmt;

/// Dense 1-based atom handle within one [`AtomTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A predicate applied to integer arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<i64>,
}

impl GroundAtom {
    pub fn new(pred: impl Into<String>, args: Vec<i64>) -> Self {
        GroundAtom {
            pred: pred.into(),
            args,
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Bijective map between ground atoms and dense ids starting at 1.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, AtomId>,
}

impl AtomTable {
    pub fn new() -> Self {
        AtomTable::default()
    }

    pub fn intern(&mut self, atom: GroundAtom) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = AtomId(self.atoms.len() as u32 + 1);
        self.atoms.push(atom.clone());
        self.index.insert(atom, id);
        id
    }

    pub fn lookup(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn get(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id.index()]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> {
        (1..=self.atoms.len() as u32).map(AtomId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &GroundAtom)> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (AtomId(i as u32 + 1), a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_bijective_and_dense() {
        let mut t = AtomTable::new();
        let a = t.intern(GroundAtom::new("p", vec![1]));
        let b = t.intern(GroundAtom::new("p", vec![2]));
        let a2 = t.intern(GroundAtom::new("p", vec![1]));
        assert_eq!(a, a2);
        assert_eq!(a.0, 1);
        assert_eq!(b.0, 2);
        assert_eq!(t.get(a).to_string(), "p(1)");
        assert_eq!(t.len(), 2);
    }
}
