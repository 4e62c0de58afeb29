//! Backtracking search for stable models: deterministic consequences and
//! unfounded-atom falsification between branch points, branching on the
//! first unknown atom in id order, and a reduct check on every candidate
//! before it is emitted.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use grounder::{AtomId, GroundProgram};

use crate::check::{extend_candidate, is_stable_full};
use crate::normalize::{normalize, NormalizeError, NormalizedProgram};

/// Three-valued working assignment over normalized atoms.
#[derive(Clone, Debug)]
pub struct TruthState {
    values: Vec<Option<bool>>,
}

impl TruthState {
    fn new(n: usize) -> Self {
        TruthState {
            values: vec![None; n],
        }
    }

    pub fn value(&self, atom: usize) -> Option<bool> {
        self.values[atom]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    First,
    All,
    Count,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Satisfiable,
    Unsatisfiable,
    Exhausted,
    Timeout,
}

#[derive(Clone, Debug)]
pub struct SolveStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub propagations: u64,
    pub wall: Duration,
    pub outcome: SolveOutcome,
}

impl Default for SolveStats {
    fn default() -> Self {
        SolveStats {
            nodes: 0,
            backtracks: 0,
            propagations: 0,
            wall: Duration::ZERO,
            outcome: SolveOutcome::Unsatisfiable,
        }
    }
}

/// A stable model projected onto the original atoms, sorted by id.
pub type Model = BTreeSet<AtomId>;

#[derive(Clone, Debug, Default)]
pub struct StableResult {
    pub models: Vec<Model>,
    pub count: u64,
    pub stats: SolveStats,
}

enum Walk {
    Continue,
    Stop,
    Abort,
}

pub struct StableSolver {
    np: NormalizedProgram,
    deadline: Option<Instant>,
    stats: SolveStats,
    started: Instant,
}

const NODE_QUANTUM: u64 = 128;

impl StableSolver {
    pub fn new(gp: &GroundProgram) -> Result<Self, NormalizeError> {
        Ok(StableSolver {
            np: normalize(gp)?,
            deadline: None,
            stats: SolveStats::default(),
            started: Instant::now(),
        })
    }

    pub fn set_deadline(&mut self, deadline: Instant) {
        self.deadline = Some(deadline);
    }

    pub fn set_budget(&mut self, budget: Duration) {
        self.deadline = Some(Instant::now() + budget);
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn normalized(&self) -> &NormalizedProgram {
        &self.np
    }

    /// Deterministic consequences at the root over original atoms, or
    /// `None` when the root already conflicts. Every decision returned
    /// holds in every stable model.
    pub fn root_consequences(&mut self) -> Option<Vec<(usize, bool)>> {
        let mut state = TruthState::new(self.np.n_total);
        let mut trail = Vec::new();
        match self.propagate(&mut state, &mut trail) {
            Ok(()) => Some(
                (0..self.np.n_original)
                    .filter_map(|i| state.values[i].map(|v| (i, v)))
                    .collect(),
            ),
            Err(()) => None,
        }
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Solves in the requested mode. Models are verified by the reduct
    /// check before being emitted.
    pub fn solve(&mut self, mode: Mode, limit: Option<u64>) -> StableResult {
        self.stats = SolveStats::default();
        self.started = Instant::now();
        let mut result = StableResult::default();
        let mut state = TruthState::new(self.np.n_total);
        let mut trail: Vec<usize> = Vec::new();

        self.stats.nodes += 1;
        let walk = if self.propagate(&mut state, &mut trail).is_err() {
            Walk::Continue
        } else {
            self.dfs(&mut state, &mut trail, mode, limit, &mut result)
        };
        let timed_out = matches!(walk, Walk::Abort);
        result.stats = self.stats.clone();
        result.stats.outcome = match mode {
            Mode::First => {
                if result.count > 0 {
                    SolveOutcome::Satisfiable
                } else if timed_out {
                    SolveOutcome::Timeout
                } else {
                    SolveOutcome::Unsatisfiable
                }
            }
            Mode::All | Mode::Count => {
                if timed_out {
                    SolveOutcome::Timeout
                } else {
                    SolveOutcome::Exhausted
                }
            }
        };
        result.stats.wall = self.started.elapsed();
        self.stats = result.stats.clone();
        result
    }

    fn dfs(
        &mut self,
        state: &mut TruthState,
        trail: &mut Vec<usize>,
        mode: Mode,
        limit: Option<u64>,
        result: &mut StableResult,
    ) -> Walk {
        // branch on the first unknown atom in id order
        let Some(atom) = state.values.iter().position(|v| v.is_none()) else {
            return self.leaf(state, mode, limit, result);
        };
        for value in [true, false] {
            self.stats.nodes += 1;
            if self.stats.nodes % NODE_QUANTUM == 0 && self.out_of_time() {
                return Walk::Abort;
            }
            let mark = trail.len();
            state.values[atom] = Some(value);
            trail.push(atom);
            match self.propagate(state, trail) {
                Ok(()) => match self.dfs(state, trail, mode, limit, result) {
                    Walk::Continue => self.undo(state, trail, mark),
                    stop => return stop,
                },
                Err(()) => {
                    self.undo(state, trail, mark);
                    self.stats.backtracks += 1;
                }
            }
        }
        Walk::Continue
    }

    fn undo(&self, state: &mut TruthState, trail: &mut Vec<usize>, mark: usize) {
        while trail.len() > mark {
            let atom = trail.pop().expect("trail entry");
            state.values[atom] = None;
        }
    }

    fn leaf(
        &mut self,
        state: &TruthState,
        mode: Mode,
        limit: Option<u64>,
        result: &mut StableResult,
    ) -> Walk {
        let truth: Vec<bool> = state.values.iter().map(|v| v.unwrap_or(false)).collect();
        // candidates reaching a leaf still need the reduct test; the
        // propagation between branch points is sound but not complete
        let extended = {
            let original = &truth[..self.np.n_original];
            extend_candidate(&self.np, original)
        };
        if extended != truth || !is_stable_full(&self.np, &truth) {
            return Walk::Continue;
        }
        result.count += 1;
        if !matches!(mode, Mode::Count) {
            let model: Model = (0..self.np.n_original)
                .filter(|&i| truth[i])
                .map(|i| AtomId(i as u32 + 1))
                .collect();
            result.models.push(model);
        }
        match mode {
            Mode::First => Walk::Stop,
            _ if limit.is_some_and(|l| result.count >= l) => Walk::Stop,
            _ => Walk::Continue,
        }
    }

    /// Runs deterministic consequences to a fixpoint:
    /// - a rule whose body is decided true forces its head true;
    /// - an atom all of whose supporting rules are dead is false;
    /// - a fully-true constraint (or a weight constraint whose satisfied
    ///   weight reaches the bound) is a conflict;
    /// - on non-tight programs, atoms with no possible external support
    ///   under the current state are falsified.
    fn propagate(&mut self, state: &mut TruthState, trail: &mut Vec<usize>) -> Result<(), ()> {
        let np = &self.np;
        let set = |atom: usize,
                       value: bool,
                       state: &mut TruthState,
                       trail: &mut Vec<usize>,
                       changed: &mut bool|
         -> Result<(), ()> {
            match state.values[atom] {
                Some(v) => {
                    if v == value {
                        Ok(())
                    } else {
                        Err(())
                    }
                }
                None => {
                    state.values[atom] = Some(value);
                    trail.push(atom);
                    *changed = true;
                    Ok(())
                }
            }
        };

        loop {
            self.stats.propagations += 1;
            let mut changed = false;
            for &f in &np.facts {
                set(f, true, state, trail, &mut changed)?;
            }
            // support bookkeeping: can any rule still derive each atom?
            let mut alive = vec![false; np.n_total];
            for &f in &np.facts {
                alive[f] = true;
            }
            for r in &np.rules {
                let body_false = r.pos.iter().any(|&p| state.values[p] == Some(false))
                    || r.neg.iter().any(|&n| state.values[n] == Some(true));
                if body_false {
                    continue;
                }
                alive[r.head] = true;
                let body_true = r.pos.iter().all(|&p| state.values[p] == Some(true))
                    && r.neg.iter().all(|&n| state.values[n] == Some(false));
                if body_true {
                    set(r.head, true, state, trail, &mut changed)?;
                }
            }
            for r in &np.weight_rules {
                let mut satisfied: i128 = 0;
                let mut potential: i128 = 0;
                for &(a, positive, w) in &r.elements {
                    match state.values[a] {
                        Some(v) if v == positive => {
                            satisfied += w as i128;
                            potential += w as i128;
                        }
                        None => potential += w as i128,
                        _ => {}
                    }
                }
                if potential >= r.lower as i128 {
                    alive[r.head] = true;
                }
                if satisfied >= r.lower as i128 {
                    set(r.head, true, state, trail, &mut changed)?;
                }
            }
            for atom in 0..np.n_total {
                if !alive[atom] {
                    set(atom, false, state, trail, &mut changed)?;
                }
            }
            // constraints
            for c in &np.constraints {
                let fired = c.pos.iter().all(|&p| state.values[p] == Some(true))
                    && c.neg.iter().all(|&n| state.values[n] == Some(false));
                if fired {
                    return Err(());
                }
            }
            for w in &np.weight_constraints {
                let satisfied: i128 = w
                    .elements
                    .iter()
                    .filter(|&&(a, positive, _)| state.values[a] == Some(positive))
                    .map(|&(_, _, weight)| weight as i128)
                    .sum();
                if satisfied >= w.lower as i128 {
                    return Err(());
                }
            }
            if !np.tight {
                self.falsify_unfounded(state, trail, &mut changed)?;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Optimistic derivability: the least set containing the facts and
    /// closed under rules not contradicted by the current state. Anything
    /// outside has no possible external support and is falsified.
    fn falsify_unfounded(
        &self,
        state: &mut TruthState,
        trail: &mut Vec<usize>,
        changed: &mut bool,
    ) -> Result<(), ()> {
        let np = &self.np;
        let mut derivable = vec![false; np.n_total];
        for &f in &np.facts {
            derivable[f] = true;
        }
        loop {
            let mut grew = false;
            for r in &np.rules {
                if derivable[r.head] || state.values[r.head] == Some(false) {
                    continue;
                }
                let usable = r
                    .pos
                    .iter()
                    .all(|&p| derivable[p] && state.values[p] != Some(false))
                    && r.neg.iter().all(|&n| state.values[n] != Some(true));
                if usable {
                    derivable[r.head] = true;
                    grew = true;
                }
            }
            for r in &np.weight_rules {
                if derivable[r.head] || state.values[r.head] == Some(false) {
                    continue;
                }
                let potential: i128 = r
                    .elements
                    .iter()
                    .filter(|&&(a, positive, _)| {
                        if positive {
                            derivable[a] && state.values[a] != Some(false)
                        } else {
                            state.values[a] != Some(true)
                        }
                    })
                    .map(|&(_, _, w)| w as i128)
                    .sum();
                if potential >= r.lower as i128 {
                    derivable[r.head] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        for atom in 0..np.n_total {
            if !derivable[atom] && state.values[atom] != Some(false) {
                if state.values[atom] == Some(true) {
                    return Err(());
                }
                state.values[atom] = Some(false);
                trail.push(atom);
                *changed = true;
            }
        }
        Ok(())
    }
}

/// Computes stable models in the given mode, verifying each candidate by
/// the reduct check before emission.
pub fn solve_stable(
    gp: &GroundProgram,
    mode: Mode,
    limit: Option<u64>,
) -> Result<StableResult, NormalizeError> {
    let mut solver = StableSolver::new(gp)?;
    Ok(solver.solve(mode, limit))
}
