//! Test-side oracle: exhaustive enumeration with a constraint evaluator
//! written independently of the engine's propagators and checker.

use fd_core::{CspProblem, FdConstraint};

/// Deterministic 64-bit generator (splitmix64) for seeded test cases.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound` (bound > 0).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }
}

/// Direct truth of one constraint under a total assignment (values indexed
/// by variable id). Written from the constraint definitions, not shared
/// with the engine.
pub fn constraint_holds(c: &FdConstraint, values: &[i64]) -> bool {
    match c {
        FdConstraint::NotEqual(x, y) => values[x.index()] != values[y.index()],
        FdConstraint::NotEqualOffset(x, y, off) => {
            (values[x.index()] - values[y.index()]).abs() != *off
        }
        FdConstraint::Linear { terms, rel, bound } => {
            let sum: i64 = terms
                .iter()
                .map(|(c, v)| *c * values[v.index()])
                .sum();
            match rel {
                fd_core::LinRel::Le => sum <= *bound,
                fd_core::LinRel::Eq => sum == *bound,
                fd_core::LinRel::Ne => sum != *bound,
            }
        }
        FdConstraint::AllDifferent(vs) => {
            for i in 0..vs.len() {
                for j in (i + 1)..vs.len() {
                    if values[vs[i].index()] == values[vs[j].index()] {
                        return false;
                    }
                }
            }
            true
        }
        FdConstraint::OccupancyChannel {
            start,
            duration,
            occ,
        } => {
            let s = values[start.index()];
            occ.iter().enumerate().all(|(w, o)| {
                let covered = s <= w as i64 && (w as i64) < s + duration;
                (values[o.index()] == 1) == covered
            })
        }
        FdConstraint::MinOf { result, args } => {
            let m = args.iter().map(|v| values[v.index()]).min().unwrap();
            values[result.index()] == m
        }
    }
}

/// Exhaustively enumerates all satisfying total assignments of `problem`
/// over the given domains (defaults to the problem's initial domains).
pub fn brute_force_all(problem: &CspProblem) -> Vec<Vec<i64>> {
    let domains: Vec<Vec<i64>> = problem
        .vars()
        .iter()
        .map(|v| v.domain.iter().collect())
        .collect();
    let mut out = Vec::new();
    let mut current = vec![0i64; domains.len()];
    enumerate(problem, &domains, 0, &mut current, &mut out);
    out
}

fn enumerate(
    problem: &CspProblem,
    domains: &[Vec<i64>],
    depth: usize,
    current: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if depth == domains.len() {
        if problem
            .constraints()
            .iter()
            .all(|c| constraint_holds(c, current))
        {
            out.push(current.clone());
        }
        return;
    }
    for &v in &domains[depth] {
        current[depth] = v;
        enumerate(problem, domains, depth + 1, current, out);
    }
}
