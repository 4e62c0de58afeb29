//! Iterated-bound maximization: solve, tighten the bound past the
//! incumbent, re-solve, until unsatisfiable.

use std::time::Instant;

use grounder::GroundProgram;

use crate::normalize::NormalizeError;
use crate::solver::{Mode, Model, SolveOutcome, StableSolver};

#[derive(Clone, Debug, Default)]
pub struct IteratedOutcome {
    pub best: Option<(Model, i64)>,
    /// Solver invocations, including the final unsatisfiable one.
    pub calls: u64,
    /// Objective values of successive incumbents; strictly increasing.
    pub incumbents: Vec<i64>,
    pub timed_out: bool,
    pub nodes: u64,
    pub backtracks: u64,
}

/// Repeatedly solves `builder(bound)` for a first model, raising the bound
/// to the incumbent's objective plus `step`, until the program becomes
/// unsatisfiable. Requires `builder` monotone: a higher bound only removes
/// models. Returns the last model found.
pub fn optimize_iterated<B, X>(
    mut builder: B,
    mut objective: X,
    initial_bound: i64,
    step: i64,
    deadline: Option<Instant>,
) -> Result<IteratedOutcome, NormalizeError>
where
    B: FnMut(i64) -> GroundProgram,
    X: FnMut(&Model) -> i64,
{
    let mut out = IteratedOutcome::default();
    let mut bound = initial_bound;
    loop {
        let gp = builder(bound);
        let mut solver = StableSolver::new(&gp)?;
        if let Some(d) = deadline {
            if Instant::now() >= d {
                out.timed_out = true;
                return Ok(out);
            }
            solver.set_deadline(d);
        }
        let result = solver.solve(Mode::First, None);
        out.calls += 1;
        out.nodes += result.stats.nodes;
        out.backtracks += result.stats.backtracks;
        match result.stats.outcome {
            SolveOutcome::Satisfiable => {
                let model = result.models.into_iter().next().expect("model");
                let value = objective(&model);
                out.incumbents.push(value);
                out.best = Some((model, value));
                if value < bound {
                    // the extractor disagrees with the builder's bound;
                    // stop rather than loop forever
                    return Ok(out);
                }
                bound = value + step;
            }
            SolveOutcome::Timeout => {
                out.timed_out = true;
                return Ok(out);
            }
            _ => return Ok(out),
        }
    }
}
