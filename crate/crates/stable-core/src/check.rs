//! Stability checking via the Gelfond-Lifschitz reduct.

use std::collections::BTreeSet;

use grounder::{AtomId, GroundProgram};

use crate::normalize::{normalize, NormalizedProgram};

/// Extends a candidate over original atoms to the full normalized
/// signature. Complement and applied atoms are functions of the candidate:
/// `ci` is true iff the choice body holds and the head is out, `applied`
/// iff the body holds.
pub(crate) fn extend_candidate(np: &NormalizedProgram, original: &[bool]) -> Vec<bool> {
    let mut truth = vec![false; np.n_total];
    truth[..np.n_original].copy_from_slice(original);
    for choice in &np.choices {
        let body_holds = choice.pos.iter().all(|&p| truth[p])
            && choice.neg.iter().all(|&n| !truth[n]);
        for (&head, &comp) in choice.heads.iter().zip(&choice.complements) {
            truth[comp] = body_holds && !truth[head];
        }
        if let Some(marker) = choice.applied {
            truth[marker] = body_holds;
        }
    }
    truth
}

/// Classical satisfaction of the integrity and weight constraints.
pub(crate) fn constraints_hold(np: &NormalizedProgram, truth: &[bool]) -> bool {
    for c in &np.constraints {
        if c.pos.iter().all(|&p| truth[p]) && c.neg.iter().all(|&n| !truth[n]) {
            return false;
        }
    }
    for w in &np.weight_constraints {
        let sum: i128 = w
            .elements
            .iter()
            .filter(|(a, positive, _)| truth[*a] == *positive)
            .map(|&(_, _, weight)| weight as i128)
            .sum();
        if sum >= w.lower as i128 {
            return false;
        }
    }
    true
}

/// Least model of the reduct with respect to `truth`, over normal rules
/// and weight rules (negative weight elements are evaluated against
/// `truth` and folded into the bound).
pub(crate) fn reduct_least_model(np: &NormalizedProgram, truth: &[bool]) -> Vec<bool> {
    let mut lm = vec![false; np.n_total];
    for &f in &np.facts {
        lm[f] = true;
    }
    // reduct: delete rules whose negative body intersects the candidate
    let rules: Vec<(usize, &Vec<usize>)> = np
        .rules
        .iter()
        .filter(|r| r.neg.iter().all(|&n| !truth[n]))
        .map(|r| (r.head, &r.pos))
        .collect();
    let weight_rules: Vec<(usize, i128, Vec<(usize, i64)>)> = np
        .weight_rules
        .iter()
        .map(|r| {
            let satisfied_neg: i128 = r
                .elements
                .iter()
                .filter(|(a, positive, _)| !positive && !truth[*a])
                .map(|&(_, _, w)| w as i128)
                .sum();
            let positives: Vec<(usize, i64)> = r
                .elements
                .iter()
                .filter(|(_, positive, _)| *positive)
                .map(|&(a, _, w)| (a, w))
                .collect();
            (r.head, r.lower as i128 - satisfied_neg, positives)
        })
        .collect();
    loop {
        let mut changed = false;
        for (head, pos) in &rules {
            if !lm[*head] && pos.iter().all(|&p| lm[p]) {
                lm[*head] = true;
                changed = true;
            }
        }
        for (head, bound, positives) in &weight_rules {
            if !lm[*head] {
                let sum: i128 = positives
                    .iter()
                    .filter(|(a, _)| lm[*a])
                    .map(|&(_, w)| w as i128)
                    .sum();
                if sum >= *bound {
                    lm[*head] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    lm
}

/// Full stability test on a complete normalized assignment.
pub(crate) fn is_stable_full(np: &NormalizedProgram, truth: &[bool]) -> bool {
    if !constraints_hold(np, truth) {
        return false;
    }
    let lm = reduct_least_model(np, truth);
    lm == truth
}

/// True iff `candidate` satisfies every integrity and weight constraint
/// and equals the least model of the Gelfond-Lifschitz reduct of the
/// normalized program (complement atoms extended deterministically).
pub fn check_stable(gp: &GroundProgram, candidate: &BTreeSet<AtomId>) -> bool {
    let Ok(np) = normalize(gp) else {
        return false;
    };
    let n = np.n_original;
    let mut original = vec![false; n];
    for a in candidate {
        if a.0 == 0 || a.index() >= n {
            return false;
        }
        original[a.index()] = true;
    }
    let truth = extend_candidate(&np, &original);
    is_stable_full(&np, &truth)
}
