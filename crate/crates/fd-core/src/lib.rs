//! Finite-domain CSP engine.
//!
//! A problem is a set of integer variables with finite domains plus a list
//! of constraints. Solving interleaves propagation (arc consistency on
//! binary constraints, bounds reasoning on linear and min constraints,
//! two-way occupancy channeling) with first-fail labelling. Enumeration and
//! branch-and-bound maximization are built on the same search loop.

mod domain;
mod problem;
mod propagate;
mod search;

pub use domain::FdDomain;
pub use problem::{
    check_assignment, Assignment, CspProblem, FdConstraint, FdError, FdVar, LinRel, VarId,
};
pub use propagate::{propagate, PropagationOutcome};
pub use search::{
    maximize, solve_all, solve_first, SearchOutcome, SearchStats, Solver,
};
