//! Problem model: variables, constraints, and the straight-line solution
//! checker used to re-verify solver output.

use thiserror::Error;

use crate::domain::FdDomain;

/// Dense handle of a variable within one [`CspProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A constraint variable: initial domain plus its static degree (number of
/// constraint records that mention it).
#[derive(Clone, Debug)]
pub struct FdVar {
    pub id: VarId,
    pub domain: FdDomain,
    pub degree: usize,
}

/// Relation used by [`FdConstraint::Linear`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinRel {
    Le,
    Eq,
    Ne,
}

#[derive(Clone, Debug)]
pub enum FdConstraint {
    /// `x != y`
    NotEqual(VarId, VarId),
    /// `|x - y| != c`; the queens diagonal constraint.
    NotEqualOffset(VarId, VarId, i64),
    /// `sum(coeff * var) rel bound`
    Linear {
        terms: Vec<(i64, VarId)>,
        rel: LinRel,
        bound: i64,
    },
    /// Pairwise disequality over the listed variables.
    AllDifferent(Vec<VarId>),
    /// `occ[w] = 1  <=>  start <= w < start + duration`, with `w` the
    /// 0-based index into `occ`. The occupancy variables must be 0/1.
    OccupancyChannel {
        start: VarId,
        duration: i64,
        occ: Vec<VarId>,
    },
    /// `result = min(args)`
    MinOf { result: VarId, args: Vec<VarId> },
}

impl FdConstraint {
    /// Variable ids referenced by this constraint, with duplicates.
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            FdConstraint::NotEqual(x, y) => vec![*x, *y],
            FdConstraint::NotEqualOffset(x, y, _) => vec![*x, *y],
            FdConstraint::Linear { terms, .. } => terms.iter().map(|(_, v)| *v).collect(),
            FdConstraint::AllDifferent(vs) => vs.clone(),
            FdConstraint::OccupancyChannel { start, occ, .. } => {
                let mut vs = vec![*start];
                vs.extend_from_slice(occ);
                vs
            }
            FdConstraint::MinOf { result, args } => {
                let mut vs = vec![*result];
                vs.extend_from_slice(args);
                vs
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FdError {
    #[error("constraint references unknown variable #{0}")]
    DanglingVar(usize),
    #[error("occupancy variable #{0} must have a domain within {{0,1}}")]
    OccNotBinary(usize),
    #[error("occupancy duration must be positive, got {0}")]
    BadDuration(i64),
    #[error("min constraint needs at least one argument")]
    EmptyMin,
    #[error("linear constraint needs at least one term")]
    EmptyLinear,
    #[error("64-bit overflow while evaluating a linear constraint")]
    Overflow,
    #[error("maximize called on a problem without an objective variable")]
    NoObjective,
    #[error("domain snapshot has {got} entries, problem has {want} variables")]
    SnapshotMismatch { got: usize, want: usize },
    #[error("assignment has {got} entries, problem has {want} variables")]
    AssignmentMismatch { got: usize, want: usize },
}

/// A finite-domain constraint problem.
#[derive(Clone, Debug, Default)]
pub struct CspProblem {
    vars: Vec<FdVar>,
    constraints: Vec<FdConstraint>,
    objective: Option<VarId>,
}

impl CspProblem {
    pub fn new() -> Self {
        CspProblem::default()
    }

    pub fn add_var(&mut self, domain: FdDomain) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(FdVar {
            id,
            domain,
            degree: 0,
        });
        id
    }

    /// Adds a constraint after validating every referenced variable.
    pub fn add_constraint(&mut self, constraint: FdConstraint) -> Result<(), FdError> {
        for v in constraint.vars() {
            if v.index() >= self.vars.len() {
                return Err(FdError::DanglingVar(v.index()));
            }
        }
        match &constraint {
            FdConstraint::OccupancyChannel {
                duration, occ, ..
            } => {
                if *duration < 1 {
                    return Err(FdError::BadDuration(*duration));
                }
                for o in occ {
                    let dom = &self.vars[o.index()].domain;
                    if dom.iter().any(|v| v != 0 && v != 1) {
                        return Err(FdError::OccNotBinary(o.index()));
                    }
                }
            }
            FdConstraint::MinOf { args, .. } => {
                if args.is_empty() {
                    return Err(FdError::EmptyMin);
                }
            }
            FdConstraint::Linear { terms, .. } => {
                if terms.is_empty() {
                    return Err(FdError::EmptyLinear);
                }
            }
            _ => {}
        }
        let mut seen: Vec<VarId> = constraint.vars();
        seen.sort_unstable();
        seen.dedup();
        for v in seen {
            self.vars[v.index()].degree += 1;
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn set_objective(&mut self, var: VarId) {
        self.objective = Some(var);
    }

    pub fn objective(&self) -> Option<VarId> {
        self.objective
    }

    pub fn vars(&self) -> &[FdVar] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &FdVar {
        &self.vars[id.index()]
    }

    pub fn constraints(&self) -> &[FdConstraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Initial domains as a snapshot suitable for [`crate::propagate`].
    pub fn initial_domains(&self) -> Vec<FdDomain> {
        self.vars.iter().map(|v| v.domain.clone()).collect()
    }

    /// Product of domain sizes, saturating.
    pub fn domain_product(&self) -> u128 {
        let mut p: u128 = 1;
        for v in &self.vars {
            p = p.saturating_mul(v.domain.len() as u128);
        }
        p
    }
}

/// A total assignment, indexed by variable id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<i64>,
}

impl Assignment {
    pub fn new(values: Vec<i64>) -> Self {
        Assignment { values }
    }

    pub fn value(&self, var: VarId) -> i64 {
        self.values[var.index()]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }
}

fn checked_linear_sum(terms: &[(i64, VarId)], a: &Assignment) -> Result<i64, FdError> {
    let mut sum: i64 = 0;
    for (c, v) in terms {
        let prod = c.checked_mul(a.value(*v)).ok_or(FdError::Overflow)?;
        sum = sum.checked_add(prod).ok_or(FdError::Overflow)?;
    }
    Ok(sum)
}

/// Straight-line evaluation of every constraint against a total assignment.
///
/// Deliberately independent of the propagators: this is the checker that
/// solver output is re-verified against.
pub fn check_assignment(problem: &CspProblem, a: &Assignment) -> Result<bool, FdError> {
    if a.values().len() != problem.num_vars() {
        return Err(FdError::AssignmentMismatch {
            got: a.values().len(),
            want: problem.num_vars(),
        });
    }
    for var in problem.vars() {
        if !var.domain.contains(a.value(var.id)) {
            return Ok(false);
        }
    }
    for c in problem.constraints() {
        let ok = match c {
            FdConstraint::NotEqual(x, y) => a.value(*x) != a.value(*y),
            FdConstraint::NotEqualOffset(x, y, off) => {
                let d = (a.value(*x) as i128 - a.value(*y) as i128).abs();
                d != *off as i128
            }
            FdConstraint::Linear { terms, rel, bound } => {
                let sum = checked_linear_sum(terms, a)?;
                match rel {
                    LinRel::Le => sum <= *bound,
                    LinRel::Eq => sum == *bound,
                    LinRel::Ne => sum != *bound,
                }
            }
            FdConstraint::AllDifferent(vs) => {
                let mut vals: Vec<i64> = vs.iter().map(|v| a.value(*v)).collect();
                vals.sort_unstable();
                vals.windows(2).all(|w| w[0] != w[1])
            }
            FdConstraint::OccupancyChannel {
                start,
                duration,
                occ,
            } => {
                let s = a.value(*start);
                occ.iter().enumerate().all(|(w, o)| {
                    let covered = s <= w as i64 && (w as i64) < s + duration;
                    (a.value(*o) == 1) == covered
                })
            }
            FdConstraint::MinOf { result, args } => {
                let m = args.iter().map(|v| a.value(*v)).min().expect("non-empty");
                a.value(*result) == m
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
