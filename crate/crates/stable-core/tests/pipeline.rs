//! End-to-end: parse -> ground -> stable models, plus the iterated-bound
//! optimizer and the production-vs-naive grounder comparison.

use std::collections::BTreeSet;

use grounder::{ground, naive::ground_naive, GroundProgram};
use lp_lang::parse_program;
use stable_core::{optimize_iterated, solve_stable, Mode};

fn queens_source(n: usize) -> String {
    format!(
        "d(1..{n}).\n\
         1 {{pos(X,Y):d(Y)}} 1 :- d(X).\n\
         1 {{pos(X,Y):d(X)}} 1 :- d(Y).\n\
         :- d(X1), d(Y1), d(X2), d(Y2), pos(X1,Y1), pos(X2,Y2), X1 < X2, X2 - X1 = abs(Y1 - Y2).\n"
    )
}

/// Straight-line queens oracle: count placements row by row.
fn queens_count_oracle(n: usize) -> usize {
    fn rec(n: usize, cols: &mut Vec<i64>) -> usize {
        if cols.len() == n {
            return 1;
        }
        let row = cols.len() as i64;
        let mut total = 0;
        for c in 1..=n as i64 {
            let ok = cols.iter().enumerate().all(|(r, &cc)| {
                cc != c && (row - r as i64) != (c - cc).abs()
            });
            if ok {
                cols.push(c);
                total += rec(n, cols);
                cols.pop();
            }
        }
        total
    }
    rec(n, &mut Vec::new())
}

#[test]
fn queens_model_counts_match_the_oracle() {
    for n in 4..=6 {
        let program = parse_program(&queens_source(n)).unwrap();
        let g = ground(&program).unwrap();
        let result = solve_stable(&g.program, Mode::Count, None).unwrap();
        let expected = queens_count_oracle(n) as u64;
        assert_eq!(result.count, expected, "queens n={n}");
    }
    assert_eq!(queens_count_oracle(6), 4);
}

fn model_names(gp: &GroundProgram, models: &[stable_core::Model]) -> BTreeSet<BTreeSet<String>> {
    models
        .iter()
        .map(|m| m.iter().map(|id| gp.atoms.get(*id).to_string()).collect())
        .collect()
}

#[test]
fn production_and_naive_grounders_have_equal_models() {
    let cases = [
        "d(1..3). 1 {q(X):d(X)} 2. :- q(1), q(2).",
        "d(1..2). p(X) :- d(X), not q(X). 0 {q(X):d(X)} 2.",
        "d(1..2). e(1,2). :- e(X,Y), d(X), d(Y), X < Y, not ok. 0 {ok} 1.",
        "d(1..3). h :- 2 #count {q(X) : d(X)}. 0 {q(X):d(X)} 3.",
        "d(1..2). q(X) :- d(X).",
    ];
    for src in cases {
        let program = parse_program(src).unwrap();
        let prod = ground(&program).unwrap().program;
        let naive = ground_naive(&program).unwrap();
        let prod_models = solve_stable(&prod, Mode::All, None).unwrap();
        let naive_models = solve_stable(&naive, Mode::All, None).unwrap();
        assert_eq!(
            model_names(&prod, &prod_models.models),
            model_names(&naive, &naive_models.models),
            "grounder mismatch on `{src}`"
        );
    }
}

/// Builds a toy one-task schedule over two placements whose minimal
/// reserves are 15 and 20, then forbids placements below the bound.
fn toy_reserve_program(bound: i64) -> GroundProgram {
    let mut src = String::from("1 {r(15); r(20)} 1.\n");
    for v in [15i64, 20] {
        if v < bound {
            src.push_str(&format!(":- r({v}).\n"));
        }
    }
    let program = parse_program(&src).unwrap();
    ground(&program).unwrap().program
}

fn reserve_of(gp: &GroundProgram, model: &stable_core::Model) -> i64 {
    model
        .iter()
        .map(|id| gp.atoms.get(*id))
        .find(|a| a.pred == "r")
        .map(|a| a.args[0])
        .expect("one r atom per model")
}

#[test]
fn iterated_bound_reaches_the_best_reserve() {
    // exhaustive check of both schedules
    assert_eq!([15i64, 20].iter().max(), Some(&20));
    let out = optimize_iterated(
        toy_reserve_program,
        |m| reserve_of(&toy_reserve_program(0), m),
        0,
        1,
        None,
    )
    .unwrap();
    let (_, value) = out.best.expect("feasible");
    assert_eq!(value, 20);
    assert!(out.incumbents.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn bound_above_optimum_is_absent() {
    let out = optimize_iterated(
        toy_reserve_program,
        |m| reserve_of(&toy_reserve_program(0), m),
        21,
        1,
        None,
    )
    .unwrap();
    assert!(out.best.is_none());
    assert_eq!(out.calls, 1);
}

#[test]
fn single_feasible_model_takes_exactly_two_calls() {
    let build = |bound: i64| {
        let mut src = String::from("1 {r(7)} 1.\n");
        if 7 < bound {
            src.push_str(":- r(7).\n");
        }
        ground(&parse_program(&src).unwrap()).unwrap().program
    };
    let out = optimize_iterated(build, |m| reserve_of(&build(0), m), 0, 1, None).unwrap();
    assert_eq!(out.calls, 2);
    assert_eq!(out.best.map(|(_, v)| v), Some(7));
}

#[test]
fn ground_text_is_consumable_by_the_solver() {
    let program = parse_program(&queens_source(4)).unwrap();
    let g = ground(&program).unwrap();
    let text = grounder::to_text(&g.program);
    let back = grounder::parse_text(&text).unwrap();
    let direct = solve_stable(&g.program, Mode::Count, None).unwrap();
    let via_text = solve_stable(&back, Mode::Count, None).unwrap();
    assert_eq!(direct.count, via_text.count);
    assert_eq!(direct.count, 2);
}

#[test]
fn deterministic_solving() {
    let program = parse_program(&queens_source(5)).unwrap();
    let g = ground(&program).unwrap();
    let a = solve_stable(&g.program, Mode::All, None).unwrap();
    let b = solve_stable(&g.program, Mode::All, None).unwrap();
    assert_eq!(a.models, b.models);
    assert_eq!(a.stats.nodes, b.stats.nodes);
    assert_eq!(a.stats.backtracks, b.stats.backtracks);
}
