//! Grounding of the queens rule program, checked against direct
//! enumeration of the instantiation space.

use grounder::{ground, GroundRule};
use lp_lang::parse_program;

fn queens_source(n: usize) -> String {
    format!(
        "d(1..{n}).\n\
         1 {{pos(X,Y):d(Y)}} 1 :- d(X).\n\
         1 {{pos(X,Y):d(X)}} 1 :- d(Y).\n\
         :- d(X1), d(Y1), d(X2), d(Y2), pos(X1,Y1), pos(X2,Y2), X1 < X2, X2 - X1 = abs(Y1 - Y2).\n"
    )
}

/// Enumeration script for the diagonal constraint: quadruples surviving
/// the symmetry guard `X1 < X2` and the builtin `X2 - X1 = |Y1 - Y2|`.
fn expected_diagonal_instances(n: i64) -> usize {
    let mut count = 0;
    for x1 in 1..=n {
        for y1 in 1..=n {
            for x2 in 1..=n {
                for y2 in 1..=n {
                    if x1 < x2 && x2 - x1 == (y1 - y2).abs() {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[test]
fn queens_4_diagonal_constraint_count_matches_enumeration() {
    let program = parse_program(&queens_source(4)).unwrap();
    let g = ground(&program).unwrap();
    let constraints = g
        .program
        .rules
        .iter()
        .filter(|r| matches!(r, GroundRule::Constraint { .. }))
        .count();
    let expected = expected_diagonal_instances(4);
    assert_eq!(expected, 28);
    assert_eq!(constraints, expected);
}

#[test]
fn queens_choice_rules_expand_one_per_row_and_column() {
    let program = parse_program(&queens_source(4)).unwrap();
    let g = ground(&program).unwrap();
    let choices: Vec<&GroundRule> = g
        .program
        .rules
        .iter()
        .filter(|r| matches!(r, GroundRule::Choice { .. }))
        .collect();
    assert_eq!(choices.len(), 8); // 4 rows + 4 columns
    for c in choices {
        let GroundRule::Choice {
            lower,
            heads,
            upper,
            pos,
            neg,
        } = c
        else {
            unreachable!()
        };
        assert_eq!((*lower, *upper), (1, 1));
        assert_eq!(heads.len(), 4);
        assert!(pos.is_empty() && neg.is_empty(), "domain body is absorbed");
    }
}

#[test]
fn grounding_is_deterministic() {
    let program = parse_program(&queens_source(5)).unwrap();
    let a = ground(&program).unwrap();
    let b = ground(&program).unwrap();
    assert_eq!(grounder::to_text(&a.program), grounder::to_text(&b.program));
    assert_eq!(a.stats.rule_count, b.stats.rule_count);
    assert_eq!(a.stats.atom_count, b.stats.atom_count);
}

#[test]
fn grounding_size_reported_in_stats() {
    let program = parse_program(&queens_source(4)).unwrap();
    let g = ground(&program).unwrap();
    assert_eq!(g.stats.rule_count, g.program.rules.len());
    assert_eq!(g.stats.atom_count, g.program.atoms.len());
    assert_eq!(g.stats.fact_count, g.program.facts.len());
    assert_eq!(g.stats.atom_count, 4 + 16); // d(1..4) plus pos(1..4,1..4)
}
