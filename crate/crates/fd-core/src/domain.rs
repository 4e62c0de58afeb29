//! Finite integer domains.

use std::fmt;

/// A finite set of integers, stored strictly increasing.
///
/// An empty domain is never a valid resting state: it only shows up
/// transiently while a propagator is signalling failure, or on a problem
/// that is unsatisfiable before search even starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FdDomain {
    values: Vec<i64>,
}

impl FdDomain {
    /// Domain `{low, low+1, ..., high}`; empty when `low > high`.
    pub fn range(low: i64, high: i64) -> Self {
        let values = if low > high {
            Vec::new()
        } else {
            (low..=high).collect()
        };
        FdDomain { values }
    }

    /// Domain from arbitrary values; sorts and deduplicates.
    pub fn from_values(mut values: Vec<i64>) -> Self {
        values.sort_unstable();
        values.dedup();
        FdDomain { values }
    }

    pub fn singleton(value: i64) -> Self {
        FdDomain {
            values: vec![value],
        }
    }

    /// The `{0, 1}` domain used for indicator variables.
    pub fn zero_one() -> Self {
        FdDomain { values: vec![0, 1] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, value: i64) -> bool {
        self.values.binary_search(&value).is_ok()
    }

    pub fn min(&self) -> Option<i64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.values.last().copied()
    }

    /// The single remaining value, if the domain is a singleton.
    pub fn fixed_value(&self) -> Option<i64> {
        if self.values.len() == 1 {
            Some(self.values[0])
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.iter().copied()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.values
    }

    /// Removes `value` if present; returns whether anything changed.
    pub fn remove(&mut self, value: i64) -> bool {
        match self.values.binary_search(&value) {
            Ok(pos) => {
                self.values.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub(crate) fn position(&self, value: i64) -> Option<usize> {
        self.values.binary_search(&value).ok()
    }

    pub(crate) fn remove_at(&mut self, pos: usize) -> i64 {
        self.values.remove(pos)
    }

    pub(crate) fn insert_at(&mut self, pos: usize, value: i64) {
        self.values.insert(pos, value);
    }
}

impl fmt::Display for FdDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_membership() {
        let d = FdDomain::range(1, 4);
        assert_eq!(d.len(), 4);
        assert!(d.contains(1) && d.contains(4));
        assert!(!d.contains(0) && !d.contains(5));
        assert_eq!(d.min(), Some(1));
        assert_eq!(d.max(), Some(4));
    }

    #[test]
    fn empty_range() {
        let d = FdDomain::range(3, 2);
        assert!(d.is_empty());
        assert_eq!(d.min(), None);
    }

    #[test]
    fn from_values_sorts_and_dedups() {
        let d = FdDomain::from_values(vec![3, 1, 3, 2]);
        assert_eq!(d.as_slice(), &[1, 2, 3]);
    }

    #[test]
    fn remove_keeps_order() {
        let mut d = FdDomain::range(1, 5);
        assert!(d.remove(3));
        assert!(!d.remove(3));
        assert_eq!(d.as_slice(), &[1, 2, 4, 5]);
    }
}
