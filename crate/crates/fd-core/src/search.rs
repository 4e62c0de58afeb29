//! Depth-first labelling search with propagation at every node.
//!
//! Variable order: smallest current domain, ties broken by highest degree,
//! then lowest id. Values are tried in ascending order. Maximization is
//! branch-and-bound: each incumbent with objective value `v` forces
//! `objective >= v + 1` from then on.

use std::time::{Duration, Instant};

use crate::problem::{check_assignment, Assignment, CspProblem, FdError, VarId};
use crate::propagate::{build_watches, Fixpoint, Store};

/// How the last run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A solution (for `maximize`: a proven optimum) was found.
    Satisfiable,
    /// The search space was exhausted without a solution.
    Unsatisfiable,
    /// Complete enumeration finished (or hit the requested limit).
    Exhausted,
    /// The deadline expired; results may be partial.
    Timeout,
}

/// Counters for the last run. All counters reset when a run starts.
#[derive(Clone, Debug)]
pub struct SearchStats {
    /// Search-tree nodes entered, counting the root.
    pub nodes: u64,
    /// Dead ends below the root (failed value assignments undone).
    pub backtracks: u64,
    /// Constraint revisions performed by the propagation loops.
    pub propagations: u64,
    pub wall: Duration,
    pub outcome: SearchOutcome,
    /// Objective values of successive incumbents (maximize only).
    pub incumbents: Vec<i64>,
}

impl Default for SearchStats {
    fn default() -> Self {
        SearchStats {
            nodes: 0,
            backtracks: 0,
            propagations: 0,
            wall: Duration::ZERO,
            outcome: SearchOutcome::Unsatisfiable,
            incumbents: Vec::new(),
        }
    }
}

enum Walk {
    Continue,
    Stop,
    Abort,
}

/// One search engine over a problem. Single-threaded; independent solvers
/// over distinct problems can run concurrently.
pub struct Solver<'a> {
    problem: &'a CspProblem,
    watches: Vec<Vec<usize>>,
    stats: SearchStats,
    deadline: Option<Instant>,
    objective_floor: Option<i64>,
    started: Instant,
}

const NODE_QUANTUM: u64 = 256;

impl<'a> Solver<'a> {
    pub fn new(problem: &'a CspProblem) -> Self {
        Solver {
            problem,
            watches: build_watches(problem),
            stats: SearchStats::default(),
            deadline: None,
            objective_floor: None,
            started: Instant::now(),
        }
    }

    /// Cooperative deadline, checked every few hundred nodes.
    pub fn set_deadline(&mut self, deadline: Instant) {
        self.deadline = Some(deadline);
    }

    pub fn set_budget(&mut self, budget: Duration) {
        self.deadline = Some(Instant::now() + budget);
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    fn begin_run(&mut self) {
        self.stats = SearchStats::default();
        self.started = Instant::now();
        self.objective_floor = None;
    }

    fn finish_run(&mut self, outcome: SearchOutcome) {
        self.stats.outcome = outcome;
        self.stats.wall = self.started.elapsed();
    }

    fn out_of_time(&self) -> bool {
        match self.deadline {
            Some(d) => Instant::now() >= d,
            None => false,
        }
    }

    fn fixpoint(&mut self, store: &mut Store) -> Result<bool, FdError> {
        let fx = Fixpoint {
            problem: self.problem,
            watches: &self.watches,
            objective_floor: self
                .objective_floor
                .and_then(|f| self.problem.objective().map(|o| (o, f))),
        };
        fx.run(store, &mut self.stats.propagations)
    }

    /// First-fail variable choice among unfixed variables.
    fn pick_var(&self, store: &Store) -> Option<VarId> {
        let mut best: Option<(usize, usize, usize)> = None; // (size, neg degree.., id)
        for var in self.problem.vars() {
            let size = store.dom(var.id).len();
            if size < 2 {
                continue;
            }
            let key = (size, usize::MAX - var.degree, var.id.index());
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        best.map(|(_, _, id)| VarId(id))
    }

    fn extract(&self, store: &Store) -> Assignment {
        let values = self
            .problem
            .vars()
            .iter()
            .map(|v| store.dom(v.id).fixed_value().expect("fixed at leaf"))
            .collect();
        Assignment::new(values)
    }

    fn dfs(
        &mut self,
        store: &mut Store,
        on_solution: &mut dyn FnMut(&mut Self, Assignment) -> Walk,
    ) -> Result<Walk, FdError> {
        let Some(var) = self.pick_var(store) else {
            let a = self.extract(store);
            debug_assert_eq!(check_assignment(self.problem, &a), Ok(true));
            return Ok(on_solution(self, a));
        };
        let values: Vec<i64> = store.dom(var).iter().collect();
        for v in values {
            self.stats.nodes += 1;
            if self.stats.nodes % NODE_QUANTUM == 0 && self.out_of_time() {
                return Ok(Walk::Abort);
            }
            let mark = store.mark();
            store.assign(var, v);
            if self.fixpoint(store)? {
                match self.dfs(store, on_solution)? {
                    Walk::Continue => {
                        store.undo_to(mark);
                    }
                    stop => return Ok(stop),
                }
            } else {
                store.undo_to(mark);
                self.stats.backtracks += 1;
            }
        }
        Ok(Walk::Continue)
    }

    /// Runs the root node and then the labelling search, feeding every
    /// solution to `on_solution`. Returns the final walk state.
    fn run(
        &mut self,
        mut on_solution: impl FnMut(&mut Self, Assignment) -> Walk,
    ) -> Result<Walk, FdError> {
        let mut store = Store::new(self.problem.initial_domains());
        self.stats.nodes += 1;
        if !self.fixpoint(&mut store)? {
            return Ok(Walk::Continue); // failed at the root; no backtrack
        }
        self.dfs(&mut store, &mut on_solution)
    }

    /// First satisfying assignment, or `None`.
    pub fn solve_first(&mut self) -> Result<Option<Assignment>, FdError> {
        self.begin_run();
        let mut found: Option<Assignment> = None;
        let walk = self.run(|_, a| {
            found = Some(a);
            Walk::Stop
        })?;
        let outcome = match (&found, walk) {
            (Some(_), _) => SearchOutcome::Satisfiable,
            (None, Walk::Abort) => SearchOutcome::Timeout,
            (None, _) => SearchOutcome::Unsatisfiable,
        };
        self.finish_run(outcome);
        Ok(found)
    }

    /// Complete enumeration, up to `limit` solutions.
    pub fn solve_all(&mut self, limit: Option<usize>) -> Result<Vec<Assignment>, FdError> {
        self.begin_run();
        let mut out: Vec<Assignment> = Vec::new();
        let walk = self.run(|_, a| {
            out.push(a);
            match limit {
                Some(l) if out.len() >= l => Walk::Stop,
                _ => Walk::Continue,
            }
        })?;
        let outcome = match walk {
            Walk::Abort => SearchOutcome::Timeout,
            _ => SearchOutcome::Exhausted,
        };
        self.finish_run(outcome);
        Ok(out)
    }

    /// Branch-and-bound maximization of the problem's objective variable.
    ///
    /// On timeout the best incumbent found so far is returned; the stats
    /// outcome distinguishes a proven optimum from a cut-off run.
    pub fn maximize(&mut self) -> Result<Option<(Assignment, i64)>, FdError> {
        let objective = self.problem.objective().ok_or(FdError::NoObjective)?;
        self.begin_run();
        let mut best: Option<(Assignment, i64)> = None;
        // Keep borrows simple: record incumbents through solver state.
        let mut incumbents: Vec<i64> = Vec::new();
        let walk = self.run(|solver, a| {
            let value = a.value(objective);
            incumbents.push(value);
            solver.objective_floor = Some(value + 1);
            best = Some((a, value));
            Walk::Continue
        })?;
        self.stats.incumbents = incumbents;
        let outcome = match walk {
            Walk::Abort => SearchOutcome::Timeout,
            _ if best.is_some() => SearchOutcome::Satisfiable,
            _ => SearchOutcome::Unsatisfiable,
        };
        self.finish_run(outcome);
        Ok(best)
    }
}

/// Convenience wrappers that build a throwaway solver.
pub fn solve_first(problem: &CspProblem) -> Result<Option<Assignment>, FdError> {
    Solver::new(problem).solve_first()
}

pub fn solve_all(
    problem: &CspProblem,
    limit: Option<usize>,
) -> Result<Vec<Assignment>, FdError> {
    Solver::new(problem).solve_all(limit)
}

pub fn maximize(problem: &CspProblem) -> Result<Option<(Assignment, i64)>, FdError> {
    Solver::new(problem).maximize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FdDomain;
    use crate::problem::FdConstraint;

    #[test]
    fn singleton_solves_at_root() {
        let mut p = CspProblem::new();
        let x = p.add_var(FdDomain::singleton(5));
        let mut s = Solver::new(&p);
        let a = s.solve_first().unwrap().expect("solution");
        assert_eq!(a.value(x), 5);
        assert!(s.stats().nodes >= 1);
        assert_eq!(s.stats().backtracks, 0);
        assert_eq!(s.stats().outcome, SearchOutcome::Satisfiable);
    }

    #[test]
    fn contradiction_is_unsat_without_backtracks() {
        let mut p = CspProblem::new();
        let x = p.add_var(FdDomain::singleton(1));
        let y = p.add_var(FdDomain::singleton(1));
        p.add_constraint(FdConstraint::NotEqual(x, y)).unwrap();
        let mut s = Solver::new(&p);
        assert!(s.solve_first().unwrap().is_none());
        assert_eq!(s.stats().backtracks, 0);
        assert_eq!(s.stats().outcome, SearchOutcome::Unsatisfiable);
    }

    #[test]
    fn unconstrained_product_enumerates_fully() {
        let mut p = CspProblem::new();
        p.add_var(FdDomain::range(1, 2));
        p.add_var(FdDomain::range(1, 2));
        let sols = solve_all(&p, None).unwrap();
        assert_eq!(sols.len(), 4);
    }

    #[test]
    fn maximize_respects_disequality() {
        let mut p = CspProblem::new();
        let x = p.add_var(FdDomain::range(1, 5));
        p.add_constraint(FdConstraint::Linear {
            terms: vec![(1, x)],
            rel: crate::problem::LinRel::Ne,
            bound: 5,
        })
        .unwrap();
        p.set_objective(x);
        let (a, v) = maximize(&p).unwrap().expect("feasible");
        assert_eq!(v, 4);
        assert_eq!(a.value(x), 4);
    }

    #[test]
    fn maximize_without_objective_is_structural() {
        let p = CspProblem::new();
        assert!(matches!(maximize(&p), Err(FdError::NoObjective)));
    }

    #[test]
    fn maximize_infeasible_is_none() {
        let mut p = CspProblem::new();
        let x = p.add_var(FdDomain::range(1, 2));
        let y = p.add_var(FdDomain::range(1, 2));
        p.add_constraint(FdConstraint::NotEqual(x, y)).unwrap();
        p.add_constraint(FdConstraint::Linear {
            terms: vec![(1, x), (-1, y)],
            rel: crate::problem::LinRel::Eq,
            bound: 0,
        })
        .unwrap();
        p.set_objective(x);
        assert!(maximize(&p).unwrap().is_none());
    }
}
