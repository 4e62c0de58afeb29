//! Solver behaviour checked against exhaustive enumeration.

mod common;

use common::{brute_force_all, SplitMix64};
use fd_core::{
    check_assignment, maximize, solve_all, solve_first, Assignment, CspProblem, FdConstraint,
    FdDomain, LinRel, SearchOutcome, Solver, VarId,
};

/// Row-based queens model: var i = column of the queen on row i.
fn queens(n: usize) -> CspProblem {
    let mut p = CspProblem::new();
    let vars: Vec<VarId> = (0..n)
        .map(|_| p.add_var(FdDomain::range(1, n as i64)))
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            p.add_constraint(FdConstraint::NotEqual(vars[i], vars[j]))
                .unwrap();
            p.add_constraint(FdConstraint::NotEqualOffset(
                vars[i],
                vars[j],
                (j - i) as i64,
            ))
            .unwrap();
        }
    }
    p
}

#[test]
fn four_queens_first_solution_is_one_of_the_two() {
    let p = queens(4);
    let expected = brute_force_all(&p);
    assert_eq!(expected.len(), 2);
    assert!(expected.contains(&vec![2, 4, 1, 3]));
    assert!(expected.contains(&vec![3, 1, 4, 2]));

    let a = solve_first(&p).unwrap().expect("satisfiable");
    assert!(expected.contains(&a.values().to_vec()));
}

#[test]
fn queens_all_solution_counts_match_brute_force() {
    for (n, expected_count) in [(4usize, 2usize), (5, 10), (6, 4)] {
        let p = queens(n);
        let oracle = brute_force_all(&p);
        assert_eq!(oracle.len(), expected_count, "oracle count for n={n}");
        let sols = solve_all(&p, None).unwrap();
        assert_eq!(sols.len(), expected_count, "solver count for n={n}");
        let mut got: Vec<Vec<i64>> = sols.iter().map(|a| a.values().to_vec()).collect();
        let mut want = oracle;
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn solutions_have_no_duplicates_and_verify() {
    let p = queens(6);
    let sols = solve_all(&p, None).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for a in &sols {
        assert!(seen.insert(a.values().to_vec()), "duplicate emitted");
        assert_eq!(check_assignment(&p, a), Ok(true));
    }
}

#[test]
fn limit_truncates_enumeration() {
    let p = queens(5);
    let sols = solve_all(&p, Some(3)).unwrap();
    assert_eq!(sols.len(), 3);
}

/// Two units (capacities 10 and 20) over two weeks, peak 5 every week.
/// Unit 1 takes exactly one one-week maintenance, unit 2 none. Enumerating
/// both placements: a maintenance week has reserve 30-10-5 = 15, and the
/// free week 30-5 = 25, so the best minimal weekly reserve is 15.
#[test]
fn toy_schedule_maximize_matches_enumeration() {
    let weeks = 2usize;
    let caps = [10i64, 20];
    let total: i64 = caps.iter().sum();
    let peak = 5i64;

    // oracle over the two placements
    let oracle_best = (0..weeks as i64)
        .map(|start| {
            (0..weeks as i64)
                .map(|w| {
                    let in_maint = if w == start { caps[0] } else { 0 };
                    total - in_maint - peak
                })
                .min()
                .unwrap()
        })
        .max()
        .unwrap();
    assert_eq!(oracle_best, 15);

    let mut p = CspProblem::new();
    let start = p.add_var(FdDomain::range(0, weeks as i64 - 1));
    let occ: Vec<VarId> = (0..weeks).map(|_| p.add_var(FdDomain::zero_one())).collect();
    p.add_constraint(FdConstraint::OccupancyChannel {
        start,
        duration: 1,
        occ: occ.clone(),
    })
    .unwrap();
    let reserves: Vec<VarId> = (0..weeks)
        .map(|w| {
            let r = p.add_var(FdDomain::range(total - caps[0] - peak, total - peak));
            // r + cap0*occ[w] = total - peak
            p.add_constraint(FdConstraint::Linear {
                terms: vec![(1, r), (caps[0], occ[w])],
                rel: LinRel::Eq,
                bound: total - peak,
            })
            .unwrap();
            r
        })
        .collect();
    let objective = p.add_var(FdDomain::range(total - caps[0] - peak, total - peak));
    p.add_constraint(FdConstraint::MinOf {
        result: objective,
        args: reserves,
    })
    .unwrap();
    p.set_objective(objective);

    let (a, v) = maximize(&p).unwrap().expect("feasible");
    assert_eq!(v, oracle_best);
    assert_eq!(check_assignment(&p, &a), Ok(true));
}

#[test]
fn maximize_agrees_with_brute_force_on_seeded_problems() {
    let mut rng = SplitMix64::new(0xBEEF);
    for _ in 0..40 {
        let (p, _) = random_problem(&mut rng, true);
        let oracle = brute_force_all(&p);
        let obj = p.objective().unwrap();
        let oracle_best = oracle.iter().map(|v| v[obj.index()]).max();
        let got = maximize(&p).unwrap();
        assert_eq!(got.map(|(_, v)| v), oracle_best);
    }
}

#[test]
fn stats_examples() {
    // solve_first on a singleton
    let mut p = CspProblem::new();
    p.add_var(FdDomain::singleton(5));
    let mut s = Solver::new(&p);
    s.solve_first().unwrap().unwrap();
    assert!(s.stats().nodes >= 1);
    assert_eq!(s.stats().backtracks, 0);

    // root failure
    let mut p = CspProblem::new();
    let x = p.add_var(FdDomain::singleton(1));
    let y = p.add_var(FdDomain::singleton(1));
    p.add_constraint(FdConstraint::NotEqual(x, y)).unwrap();
    let mut s = Solver::new(&p);
    assert!(s.solve_first().unwrap().is_none());
    assert_eq!(s.stats().backtracks, 0);
    assert_eq!(s.stats().outcome, SearchOutcome::Unsatisfiable);

    // all solutions of 4-queens
    let p = queens(4);
    let mut s = Solver::new(&p);
    let sols = s.solve_all(None).unwrap();
    assert_eq!(sols.len(), 2);
    assert!(s.stats().nodes >= 2);
    assert_eq!(s.stats().outcome, SearchOutcome::Exhausted);
}

#[test]
fn identical_runs_have_identical_node_counts() {
    let p = queens(6);
    let mut s1 = Solver::new(&p);
    let r1: Vec<Vec<i64>> = s1
        .solve_all(None)
        .unwrap()
        .iter()
        .map(|a| a.values().to_vec())
        .collect();
    let n1 = (s1.stats().nodes, s1.stats().backtracks, s1.stats().propagations);
    let mut s2 = Solver::new(&p);
    let r2: Vec<Vec<i64>> = s2
        .solve_all(None)
        .unwrap()
        .iter()
        .map(|a| a.values().to_vec())
        .collect();
    let n2 = (s2.stats().nodes, s2.stats().backtracks, s2.stats().propagations);
    assert_eq!(r1, r2);
    assert_eq!(n1, n2);
}

/// Builds a small random problem mixing every constraint variant.
/// Domain product stays below ~20k so the oracle is instant.
fn random_problem(rng: &mut SplitMix64, with_objective: bool) -> (CspProblem, usize) {
    let mut p = CspProblem::new();
    let nvars = 2 + rng.below(3) as usize; // 2..4 main vars
    let mut vars = Vec::new();
    for _ in 0..nvars {
        let lo = rng.below(5) as i64 - 2;
        let width = 1 + rng.below(5) as i64;
        vars.push(p.add_var(FdDomain::range(lo, lo + width - 1)));
    }
    let ncons = 1 + rng.below(3) as usize;
    for _ in 0..ncons {
        match rng.below(5) {
            0 => {
                let x = *rng.pick(&vars);
                let y = *rng.pick(&vars);
                if x != y {
                    p.add_constraint(FdConstraint::NotEqual(x, y)).unwrap();
                }
            }
            1 => {
                let x = *rng.pick(&vars);
                let y = *rng.pick(&vars);
                if x != y {
                    p.add_constraint(FdConstraint::NotEqualOffset(x, y, rng.below(4) as i64))
                        .unwrap();
                }
            }
            2 => {
                let terms: Vec<(i64, VarId)> = vars
                    .iter()
                    .map(|v| (rng.below(5) as i64 - 2, *v))
                    .collect();
                let rel = *rng.pick(&[LinRel::Le, LinRel::Eq, LinRel::Ne]);
                p.add_constraint(FdConstraint::Linear {
                    terms,
                    rel,
                    bound: rng.below(9) as i64 - 4,
                })
                .unwrap();
            }
            3 => {
                p.add_constraint(FdConstraint::AllDifferent(vars.clone()))
                    .unwrap();
            }
            _ => {
                let result = *rng.pick(&vars);
                let args: Vec<VarId> =
                    vars.iter().copied().filter(|v| *v != result).collect();
                if !args.is_empty() {
                    p.add_constraint(FdConstraint::MinOf { result, args }).unwrap();
                }
            }
        }
    }
    if with_objective {
        p.set_objective(*rng.pick(&vars));
    }
    (p, nvars)
}

#[test]
fn solve_all_is_complete_on_seeded_problems() {
    let mut rng = SplitMix64::new(42);
    for round in 0..120 {
        let (p, _) = random_problem(&mut rng, false);
        assert!(p.domain_product() <= 1_000_000);
        let mut oracle = brute_force_all(&p);
        let mut got: Vec<Vec<i64>> = solve_all(&p, None)
            .unwrap()
            .iter()
            .map(|a| a.values().to_vec())
            .collect();
        oracle.sort();
        got.sort();
        assert_eq!(got, oracle, "mismatch on seeded problem #{round}");
    }
}

#[test]
fn occupancy_channel_solutions_match_enumeration() {
    let mut p = CspProblem::new();
    let start = p.add_var(FdDomain::range(0, 3));
    let occ: Vec<VarId> = (0..4).map(|_| p.add_var(FdDomain::zero_one())).collect();
    p.add_constraint(FdConstraint::OccupancyChannel {
        start,
        duration: 2,
        occ,
    })
    .unwrap();
    let oracle = brute_force_all(&p);
    let got = solve_all(&p, None).unwrap();
    assert_eq!(got.len(), oracle.len());
    for a in &got {
        assert!(oracle.contains(&a.values().to_vec()));
    }
}

#[test]
fn assignments_round_trip_through_the_checker() {
    let p = queens(5);
    for sol in solve_all(&p, None).unwrap() {
        assert_eq!(check_assignment(&p, &sol), Ok(true));
    }
    // a wrong assignment is rejected
    let bad = Assignment::new(vec![1, 1, 1, 1, 1]);
    assert_eq!(check_assignment(&p, &bad), Ok(false));
}
