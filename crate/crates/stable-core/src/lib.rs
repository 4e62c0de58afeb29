//! Stable-model computation over ground programs.
//!
//! Choice rules are translated away with complement atoms, search
//! interleaves deterministic consequences (and unfounded falsification on
//! non-tight programs) with binary branching in atom id order, and every
//! candidate passes the Gelfond-Lifschitz reduct check before emission.
//! Complement atoms never appear in output.

mod check;
mod normalize;
mod optimize;
mod solver;

pub use check::check_stable;
pub use normalize::{normalize, NormalizeError, NormalizedProgram};
pub use optimize::{optimize_iterated, IteratedOutcome};
pub use solver::{
    solve_stable, Mode, Model, SolveOutcome, SolveStats, StableResult, StableSolver, TruthState,
};

#[cfg(test)]
mod tests {
    use super::*;
    use grounder::ground;
    use lp_lang::parse_program;
    use std::collections::BTreeSet;

    fn models_of(src: &str) -> Vec<BTreeSet<String>> {
        let program = parse_program(src).unwrap();
        let g = ground(&program).unwrap();
        let result = solve_stable(&g.program, Mode::All, None).unwrap();
        result
            .models
            .iter()
            .map(|m| {
                m.iter()
                    .map(|id| g.program.atoms.get(*id).to_string())
                    .collect()
            })
            .collect()
    }

    fn name_sets(items: &[&[&str]]) -> Vec<BTreeSet<String>> {
        items
            .iter()
            .map(|m| m.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn exactly_one_choice_has_two_models() {
        let mut got = models_of("1 {a; b} 1.");
        let mut want = name_sets(&[&["a"], &["b"]]);
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn zero_zero_choice_forces_empty() {
        let got = models_of("0 {a} 0.");
        assert_eq!(got, name_sets(&[&[]]));
    }

    #[test]
    fn saturated_choice_has_one_full_model() {
        let got = models_of("2 {a; b} 2.");
        assert_eq!(got, name_sets(&[&["a", "b"]]));
    }

    #[test]
    fn even_loop_has_two_models() {
        let mut got = models_of("a :- not b. b :- not a.");
        let mut want = name_sets(&[&["a"], &["b"]]);
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn positive_self_loop_is_unfounded() {
        let got = models_of("a :- a.");
        assert_eq!(got, name_sets(&[&[]]));
    }

    #[test]
    fn fact_must_be_in_the_model() {
        let program = parse_program("a.").unwrap();
        let g = ground(&program).unwrap();
        assert!(!check_stable(&g.program, &BTreeSet::new()));
        let a = g
            .program
            .atoms
            .lookup(&grounder::GroundAtom::new("a", vec![]))
            .unwrap();
        assert!(check_stable(&g.program, &BTreeSet::from([a])));
    }

    #[test]
    fn check_stable_examples() {
        // a :- not b.
        let program = parse_program("a :- not b.").unwrap();
        let g = ground(&program).unwrap();
        let a = g
            .program
            .atoms
            .lookup(&grounder::GroundAtom::new("a", vec![]))
            .unwrap();
        let b = g
            .program
            .atoms
            .lookup(&grounder::GroundAtom::new("b", vec![]))
            .unwrap();
        assert!(check_stable(&g.program, &BTreeSet::from([a])));
        assert!(!check_stable(&g.program, &BTreeSet::from([b])));

        // violated constraint
        let program = parse_program("1 {a} 1. :- a.").unwrap();
        let g = ground(&program).unwrap();
        let a = g
            .program
            .atoms
            .lookup(&grounder::GroundAtom::new("a", vec![]))
            .unwrap();
        assert!(!check_stable(&g.program, &BTreeSet::from([a])));
    }

    #[test]
    fn emitted_models_pass_check_stable() {
        let src = "d(1..3). 1 {q(X):d(X)} 2. :- q(1), q(2).";
        let program = parse_program(src).unwrap();
        let g = ground(&program).unwrap();
        let result = solve_stable(&g.program, Mode::All, None).unwrap();
        assert!(!result.models.is_empty());
        for m in &result.models {
            assert!(check_stable(&g.program, m));
        }
    }

    #[test]
    fn count_mode_matches_all_mode() {
        let src = "d(1..4). 1 {q(X):d(X)} 3.";
        let program = parse_program(src).unwrap();
        let g = ground(&program).unwrap();
        let all = solve_stable(&g.program, Mode::All, None).unwrap();
        let count = solve_stable(&g.program, Mode::Count, None).unwrap();
        assert_eq!(all.count, count.count);
        assert!(count.models.is_empty());
        // C(4,1)+C(4,2)+C(4,3) = 4+6+4
        assert_eq!(all.count, 14);
    }

    #[test]
    fn weight_body_rule_derives_head() {
        // h iff at least 2 of {a,b,c}; exactly-2 via choice
        let src = "2 {a; b; c} 2. h :- 2 #count {a; b; c}.";
        let got = models_of(src);
        assert_eq!(got.len(), 3);
        for m in got {
            assert!(m.contains("h"));
        }
    }

    #[test]
    fn weight_constraint_prunes_models() {
        let src = "0 {a; b; c} 3. :- 2 #count {a; b; c}.";
        let got = models_of(src);
        // only models with at most one of a,b,c survive
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn negative_weight_elements_count_absence() {
        // forbid: (a false) contributing 1 reaching bound 1 => a must be true
        let src = "0 {a} 1. :- 1 #sum {not a = 1}.";
        let got = models_of(src);
        assert_eq!(got, name_sets(&[&["a"]]));
    }
}
