//! Constraint propagation to a fixpoint.
//!
//! Binary constraints (`NotEqual`, `NotEqualOffset`, and the pairwise
//! decomposition of `AllDifferent`) are made arc consistent. `Linear` and
//! `MinOf` get bounds reasoning, `OccupancyChannel` is filtered in both
//! directions.

use std::collections::VecDeque;

use crate::domain::FdDomain;
use crate::problem::{CspProblem, FdConstraint, FdError, LinRel, VarId};

/// Result of running propagation to a fixpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationOutcome {
    /// Every constraint is locally consistent and no domain is empty.
    Fixpoint,
    /// Some constraint admits no solution under the given domains.
    Failure,
}

/// Backtrackable domain state: a snapshot of all domains plus a trail of
/// removals so search can undo to a mark in O(removals).
pub(crate) struct Store {
    doms: Vec<FdDomain>,
    trail: Vec<(u32, u32, i64)>,
}

impl Store {
    pub(crate) fn new(doms: Vec<FdDomain>) -> Self {
        Store {
            doms,
            trail: Vec::new(),
        }
    }

    pub(crate) fn dom(&self, var: VarId) -> &FdDomain {
        &self.doms[var.index()]
    }

    pub(crate) fn doms(&self) -> &[FdDomain] {
        &self.doms
    }

    pub(crate) fn mark(&self) -> usize {
        self.trail.len()
    }

    pub(crate) fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (var, pos, value) = self.trail.pop().expect("trail entry");
            self.doms[var as usize].insert_at(pos as usize, value);
        }
    }

    /// Removes `value` from `var` if present; trails the removal.
    pub(crate) fn remove(&mut self, var: VarId, value: i64) -> bool {
        if let Some(pos) = self.doms[var.index()].position(value) {
            self.doms[var.index()].remove_at(pos);
            self.trail.push((var.index() as u32, pos as u32, value));
            true
        } else {
            false
        }
    }

    /// Removes every value except `value`; `value` must be present.
    pub(crate) fn assign(&mut self, var: VarId, value: i64) {
        let extra: Vec<i64> = self.doms[var.index()]
            .iter()
            .filter(|&v| v != value)
            .collect();
        for v in extra {
            self.remove(var, v);
        }
    }

    /// Removes all values strictly below `lo`; false if the domain empties.
    fn clamp_min(&mut self, var: VarId, lo: i64, changed: &mut bool) -> bool {
        let below: Vec<i64> = self.doms[var.index()]
            .iter()
            .take_while(|&v| v < lo)
            .collect();
        for v in below {
            self.remove(var, v);
            *changed = true;
        }
        !self.doms[var.index()].is_empty()
    }

    /// Removes all values strictly above `hi`; false if the domain empties.
    fn clamp_max(&mut self, var: VarId, hi: i64, changed: &mut bool) -> bool {
        let above: Vec<i64> = self.doms[var.index()]
            .iter()
            .skip_while(|&v| v <= hi)
            .collect();
        for v in above {
            self.remove(var, v);
            *changed = true;
        }
        !self.doms[var.index()].is_empty()
    }
}

/// Variable -> constraint indices that mention it.
pub(crate) fn build_watches(problem: &CspProblem) -> Vec<Vec<usize>> {
    let mut watches = vec![Vec::new(); problem.num_vars()];
    for (ci, c) in problem.constraints().iter().enumerate() {
        let mut vs = c.vars();
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            watches[v.index()].push(ci);
        }
    }
    watches
}

pub(crate) struct Fixpoint<'a> {
    pub problem: &'a CspProblem,
    pub watches: &'a [Vec<usize>],
    /// Lower bound forced on the objective variable by branch-and-bound.
    pub objective_floor: Option<(VarId, i64)>,
}

impl<'a> Fixpoint<'a> {
    /// Runs all constraints to a fixpoint. Returns `Ok(true)` on fixpoint,
    /// `Ok(false)` on failure. `revisions` counts constraint revisions.
    pub(crate) fn run(&self, store: &mut Store, revisions: &mut u64) -> Result<bool, FdError> {
        if let Some((obj, floor)) = self.objective_floor {
            let mut changed = false;
            if !store.clamp_min(obj, floor, &mut changed) {
                return Ok(false);
            }
        }
        for d in store.doms() {
            if d.is_empty() {
                return Ok(false);
            }
        }
        let n = self.problem.constraints().len();
        let mut queue: VecDeque<usize> = (0..n).collect();
        let mut queued = vec![true; n];
        let mut touched: Vec<VarId> = Vec::new();

        while let Some(ci) = queue.pop_front() {
            queued[ci] = false;
            touched.clear();
            *revisions += 1;
            let ok = revise(
                self.problem,
                store,
                &self.problem.constraints()[ci],
                &mut touched,
            )?;
            if !ok {
                return Ok(false);
            }
            for v in &touched {
                for &watcher in &self.watches[v.index()] {
                    if !queued[watcher] {
                        queued[watcher] = true;
                        queue.push_back(watcher);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Arc-consistency filter for a binary constraint given as a satisfaction
/// predicate. Prunes both variables.
fn revise_binary<F>(
    store: &mut Store,
    x: VarId,
    y: VarId,
    sat: F,
    touched: &mut Vec<VarId>,
) -> bool
where
    F: Fn(i64, i64) -> bool,
{
    let prune_x: Vec<i64> = store
        .dom(x)
        .iter()
        .filter(|&a| !store.dom(y).iter().any(|b| sat(a, b)))
        .collect();
    for a in prune_x {
        store.remove(x, a);
        touched.push(x);
    }
    if store.dom(x).is_empty() {
        return false;
    }
    let prune_y: Vec<i64> = store
        .dom(y)
        .iter()
        .filter(|&b| !store.dom(x).iter().any(|a| sat(a, b)))
        .collect();
    for b in prune_y {
        store.remove(y, b);
        touched.push(y);
    }
    !store.dom(y).is_empty()
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

const I64_MIN: i128 = i64::MIN as i128;
const I64_MAX: i128 = i64::MAX as i128;

/// Bounds reasoning for a linear constraint. Exact sums are computed in
/// 128-bit; a true sum leaving the 64-bit range is a structural error.
fn revise_linear(
    store: &mut Store,
    terms: &[(i64, VarId)],
    rel: LinRel,
    bound: i64,
    touched: &mut Vec<VarId>,
) -> Result<bool, FdError> {
    let bound = bound as i128;
    // Per-term contribution bounds.
    let mut lo = Vec::with_capacity(terms.len());
    let mut hi = Vec::with_capacity(terms.len());
    let (mut sum_lo, mut sum_hi) = (0i128, 0i128);
    for (c, v) in terms {
        let d = store.dom(*v);
        if d.is_empty() {
            return Ok(false);
        }
        let (dmin, dmax) = (d.min().unwrap() as i128, d.max().unwrap() as i128);
        let c = *c as i128;
        let (a, b) = (c * dmin, c * dmax);
        let (l, h) = if a <= b { (a, b) } else { (b, a) };
        lo.push(l);
        hi.push(h);
        sum_lo += l;
        sum_hi += h;
    }
    if sum_lo < I64_MIN || sum_hi > I64_MAX {
        return Err(FdError::Overflow);
    }

    let prune_le = |store: &mut Store, touched: &mut Vec<VarId>, ub: i128| -> Option<bool> {
        // sum <= ub
        if sum_lo > ub {
            return Some(false);
        }
        for (i, (c, v)) in terms.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let rest_lo = sum_lo - lo[i];
            let slack = ub - rest_lo; // c*x <= slack
            let mut changed = false;
            let ok = if *c > 0 {
                let max_x = div_floor(slack, *c as i128);
                store.clamp_max(*v, max_x.clamp(I64_MIN, I64_MAX) as i64, &mut changed)
            } else {
                let min_x = div_ceil(slack, *c as i128);
                store.clamp_min(*v, min_x.clamp(I64_MIN, I64_MAX) as i64, &mut changed)
            };
            if changed {
                touched.push(*v);
            }
            if !ok {
                return Some(false);
            }
        }
        None
    };
    let prune_ge = |store: &mut Store, touched: &mut Vec<VarId>, lb: i128| -> Option<bool> {
        // sum >= lb
        if sum_hi < lb {
            return Some(false);
        }
        for (i, (c, v)) in terms.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let rest_hi = sum_hi - hi[i];
            let need = lb - rest_hi; // c*x >= need
            let mut changed = false;
            let ok = if *c > 0 {
                let min_x = div_ceil(need, *c as i128);
                store.clamp_min(*v, min_x.clamp(I64_MIN, I64_MAX) as i64, &mut changed)
            } else {
                let max_x = div_floor(need, *c as i128);
                store.clamp_max(*v, max_x.clamp(I64_MIN, I64_MAX) as i64, &mut changed)
            };
            if changed {
                touched.push(*v);
            }
            if !ok {
                return Some(false);
            }
        }
        None
    };

    match rel {
        LinRel::Le => {
            if let Some(r) = prune_le(store, touched, bound) {
                return Ok(r);
            }
        }
        LinRel::Eq => {
            if let Some(r) = prune_le(store, touched, bound) {
                return Ok(r);
            }
            if let Some(r) = prune_ge(store, touched, bound) {
                return Ok(r);
            }
        }
        LinRel::Ne => {
            // Only prunable when at most one variable is unfixed.
            let mut unfixed: Option<(i64, VarId)> = None;
            let mut fixed_sum: i128 = 0;
            let mut all_fixed = true;
            for (c, v) in terms {
                match store.dom(*v).fixed_value() {
                    Some(x) => fixed_sum += *c as i128 * x as i128,
                    None => {
                        if unfixed.is_some() {
                            all_fixed = false;
                            break;
                        }
                        unfixed = Some((*c, *v));
                    }
                }
            }
            if all_fixed {
                match unfixed {
                    None => {
                        if fixed_sum == bound {
                            return Ok(false);
                        }
                    }
                    Some((c, v)) => {
                        if c != 0 {
                            let rem = bound - fixed_sum; // c*x == rem forbidden
                            if rem % c as i128 == 0 {
                                let forbidden = rem / c as i128;
                                if forbidden >= I64_MIN
                                    && forbidden <= I64_MAX
                                    && store.remove(v, forbidden as i64)
                                {
                                    touched.push(v);
                                    if store.dom(v).is_empty() {
                                        return Ok(false);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Occupancy channeling: filters start values against decided occupancy
/// bits, then forces occupancy bits implied by the remaining starts.
fn revise_occupancy(
    store: &mut Store,
    start: VarId,
    duration: i64,
    occ: &[VarId],
    touched: &mut Vec<VarId>,
) -> bool {
    let covered = |s: i64, w: i64| s <= w && w < s.saturating_add(duration);
    // start -> must agree with every decided occupancy bit
    let bad: Vec<i64> = store
        .dom(start)
        .iter()
        .filter(|&s| {
            occ.iter().enumerate().any(|(w, o)| {
                let implied = i64::from(covered(s, w as i64));
                !store.dom(*o).contains(implied)
            })
        })
        .collect();
    for s in bad {
        store.remove(start, s);
        touched.push(start);
    }
    if store.dom(start).is_empty() {
        return false;
    }
    // occupancy bits forced by the remaining starts
    for (w, o) in occ.iter().enumerate() {
        let w = w as i64;
        let mut any = false;
        let mut all = true;
        for s in store.dom(start).iter() {
            if covered(s, w) {
                any = true;
            } else {
                all = false;
            }
        }
        let forbid = if all {
            Some(0)
        } else if !any {
            Some(1)
        } else {
            None
        };
        if let Some(v) = forbid {
            if store.remove(*o, v) {
                touched.push(*o);
                if store.dom(*o).is_empty() {
                    return false;
                }
            }
        }
    }
    true
}

/// Bounds reasoning for `result = min(args)`.
fn revise_min(
    store: &mut Store,
    result: VarId,
    args: &[VarId],
    touched: &mut Vec<VarId>,
) -> bool {
    let mut min_of_mins = i64::MAX;
    let mut min_of_maxs = i64::MAX;
    for a in args {
        let d = store.dom(*a);
        if d.is_empty() {
            return false;
        }
        min_of_mins = min_of_mins.min(d.min().unwrap());
        min_of_maxs = min_of_maxs.min(d.max().unwrap());
    }
    let mut changed = false;
    if !store.clamp_min(result, min_of_mins, &mut changed)
        || !store.clamp_max(result, min_of_maxs, &mut changed)
    {
        if changed {
            touched.push(result);
        }
        return false;
    }
    if changed {
        touched.push(result);
    }
    let res_lo = store.dom(result).min().unwrap();
    let res_hi = store.dom(result).max().unwrap();
    // every argument is >= the minimum
    for a in args {
        let mut ch = false;
        if !store.clamp_min(*a, res_lo, &mut ch) {
            if ch {
                touched.push(*a);
            }
            return false;
        }
        if ch {
            touched.push(*a);
        }
    }
    // if a single argument can still reach the minimum, it must
    let witnesses: Vec<VarId> = args
        .iter()
        .copied()
        .filter(|a| store.dom(*a).min().unwrap() <= res_hi)
        .collect();
    if witnesses.len() == 1 {
        let w = witnesses[0];
        let mut ch = false;
        if !store.clamp_max(w, res_hi, &mut ch) {
            if ch {
                touched.push(w);
            }
            return false;
        }
        if ch {
            touched.push(w);
        }
    } else if witnesses.is_empty() {
        return false;
    }
    true
}

fn revise(
    problem: &CspProblem,
    store: &mut Store,
    constraint: &FdConstraint,
    touched: &mut Vec<VarId>,
) -> Result<bool, FdError> {
    let _ = problem;
    let ok = match constraint {
        FdConstraint::NotEqual(x, y) => revise_binary(store, *x, *y, |a, b| a != b, touched),
        FdConstraint::NotEqualOffset(x, y, c) => {
            let c = *c as i128;
            revise_binary(
                store,
                *x,
                *y,
                move |a, b| (a as i128 - b as i128).abs() != c,
                touched,
            )
        }
        FdConstraint::Linear { terms, rel, bound } => {
            return revise_linear(store, terms, *rel, *bound, touched);
        }
        FdConstraint::AllDifferent(vs) => {
            // Pairwise-disequality decomposition: a fixed variable removes
            // its value everywhere else.
            for i in 0..vs.len() {
                if let Some(v) = store.dom(vs[i]).fixed_value() {
                    for (j, other) in vs.iter().enumerate() {
                        if i != j && store.remove(*other, v) {
                            touched.push(*other);
                            if store.dom(*other).is_empty() {
                                return Ok(false);
                            }
                        }
                    }
                }
            }
            // Pigeonhole failure test: fewer distinct values than variables.
            // A counting check only; it never filters values.
            let mut union: Vec<i64> = Vec::new();
            for v in vs {
                union.extend(store.dom(*v).iter());
            }
            union.sort_unstable();
            union.dedup();
            union.len() >= vs.len()
        }
        FdConstraint::OccupancyChannel {
            start,
            duration,
            occ,
        } => revise_occupancy(store, *start, *duration, occ, touched),
        FdConstraint::MinOf { result, args } => revise_min(store, *result, args, touched),
    };
    Ok(ok)
}

/// Runs propagation to a fixpoint on a domain snapshot.
///
/// On [`PropagationOutcome::Fixpoint`] the snapshot holds the filtered
/// domains; on failure its contents are unspecified.
pub fn propagate(
    problem: &CspProblem,
    domains: &mut [FdDomain],
) -> Result<PropagationOutcome, FdError> {
    if domains.len() != problem.num_vars() {
        return Err(FdError::SnapshotMismatch {
            got: domains.len(),
            want: problem.num_vars(),
        });
    }
    let watches = build_watches(problem);
    let mut store = Store::new(domains.to_vec());
    let fx = Fixpoint {
        problem,
        watches: &watches,
        objective_floor: None,
    };
    let mut revisions = 0;
    let ok = fx.run(&mut store, &mut revisions)?;
    for (slot, dom) in domains.iter_mut().zip(store.doms()) {
        *slot = dom.clone();
    }
    Ok(if ok {
        PropagationOutcome::Fixpoint
    } else {
        PropagationOutcome::Failure
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_problem(dx: FdDomain, dy: FdDomain, c: impl Fn(VarId, VarId) -> FdConstraint) -> (CspProblem, VarId, VarId) {
        let mut p = CspProblem::new();
        let x = p.add_var(dx);
        let y = p.add_var(dy);
        p.add_constraint(c(x, y)).unwrap();
        (p, x, y)
    }

    #[test]
    fn not_equal_prunes_singleton_partner() {
        let (p, _, y) = two_var_problem(
            FdDomain::singleton(1),
            FdDomain::range(1, 2),
            FdConstraint::NotEqual,
        );
        let mut doms = p.initial_domains();
        assert_eq!(propagate(&p, &mut doms).unwrap(), PropagationOutcome::Fixpoint);
        assert_eq!(doms[y.index()].as_slice(), &[2]);
    }

    #[test]
    fn offset_disequality_matches_enumeration() {
        // reference: strip every y with |3 - y| = 2 from 1..5
        let expected: Vec<i64> = (1..=5).filter(|y| (3i64 - y).abs() != 2).collect();
        let (p, _, y) = two_var_problem(
            FdDomain::singleton(3),
            FdDomain::range(1, 5),
            |x, y| FdConstraint::NotEqualOffset(x, y, 2),
        );
        let mut doms = p.initial_domains();
        assert_eq!(propagate(&p, &mut doms).unwrap(), PropagationOutcome::Fixpoint);
        assert_eq!(doms[y.index()].as_slice(), expected.as_slice());
        assert_eq!(doms[y.index()].as_slice(), &[2, 3, 4]);
    }

    #[test]
    fn all_different_pigeonhole_fails() {
        // oracle: all 8 assignments of three 0/1-style vars over {1,2} violate
        let mut p = CspProblem::new();
        let vs: Vec<VarId> = (0..3).map(|_| p.add_var(FdDomain::range(1, 2))).collect();
        p.add_constraint(FdConstraint::AllDifferent(vs.clone())).unwrap();
        let mut count = 0;
        for a in 1..=2i64 {
            for b in 1..=2i64 {
                for c in 1..=2i64 {
                    if a != b && b != c && a != c {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 0);
        let mut doms = p.initial_domains();
        assert_eq!(propagate(&p, &mut doms).unwrap(), PropagationOutcome::Failure);
    }

    #[test]
    fn dangling_snapshot_is_structural() {
        let p = CspProblem::new();
        let mut doms = vec![FdDomain::range(0, 1)];
        assert!(matches!(
            propagate(&p, &mut doms),
            Err(FdError::SnapshotMismatch { .. })
        ));
    }
}
