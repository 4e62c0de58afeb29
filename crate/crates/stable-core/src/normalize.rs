//! Choice-rule elimination: every choice rule becomes complement-atom
//! pairs plus weight constraints enforcing its bounds.
//!
//! For `l { a1..an } u <- B`, each head gets a fresh complement `ci` with
//! `ai <- B, not ci` and `ci <- B, not ai`. The lower bound forbids
//! `n-l+1` complements being true (complements already encode `B`); the
//! upper bound forbids `u+1` heads being true, conditioned on an auxiliary
//! `applied <- B` atom when the body is not empty. Projecting the stable
//! models of the result onto original atoms realizes the choice semantics.

use thiserror::Error;

use grounder::{GroundProgram, GroundRule};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("weight element on atom {atom} has non-positive weight {weight}")]
    NonPositiveWeight { atom: u32, weight: i64 },
    #[error("choice bounds {lower}..{upper} over {heads} heads are malformed")]
    BadChoiceBounds { lower: i64, upper: i64, heads: usize },
}

/// `head <- pos, not neg` over normalized atom indices (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalRule {
    pub head: usize,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

/// Headless `<- pos, not neg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BodyConstraint {
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

/// Forbidden-form weight constraint: fails when the sum of satisfied
/// element weights reaches `lower`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightConstraint {
    pub lower: i64,
    pub elements: Vec<(usize, bool, i64)>,
}

/// `head <- lower <= weighted sum` rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightRule {
    pub head: usize,
    pub lower: i64,
    pub elements: Vec<(usize, bool, i64)>,
}

/// Book-keeping for one source choice rule, used when extending a
/// candidate over original atoms to the full normalized signature.
#[derive(Clone, Debug)]
pub struct ChoiceInfo {
    pub heads: Vec<usize>,
    pub complements: Vec<usize>,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
    pub applied: Option<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct NormalizedProgram {
    /// Original atoms are indices `0..n_original`; introduced complement
    /// and auxiliary atoms sit above and stay hidden from output.
    pub n_original: usize,
    pub n_total: usize,
    pub facts: Vec<usize>,
    pub rules: Vec<NormalRule>,
    pub constraints: Vec<BodyConstraint>,
    pub weight_constraints: Vec<WeightConstraint>,
    pub weight_rules: Vec<WeightRule>,
    pub choices: Vec<ChoiceInfo>,
    /// True when the positive dependency graph is acyclic; tight programs
    /// need no unfounded-set pass during propagation.
    pub tight: bool,
}

pub fn normalize(gp: &GroundProgram) -> Result<NormalizedProgram, NormalizeError> {
    let n_original = gp.atom_count();
    let mut np = NormalizedProgram {
        n_original,
        n_total: n_original,
        facts: gp.facts.iter().map(|f| f.index()).collect(),
        ..Default::default()
    };
    let ids = |v: &[grounder::AtomId]| -> Vec<usize> { v.iter().map(|a| a.index()).collect() };

    for rule in &gp.rules {
        match rule {
            GroundRule::Normal { head, pos, neg } => np.rules.push(NormalRule {
                head: head.index(),
                pos: ids(pos),
                neg: ids(neg),
            }),
            GroundRule::Constraint { pos, neg } => np.constraints.push(BodyConstraint {
                pos: ids(pos),
                neg: ids(neg),
            }),
            GroundRule::WeightBody {
                head,
                lower,
                elements,
            } => {
                let elems: Vec<(usize, bool, i64)> = elements
                    .iter()
                    .map(|(a, p, w)| {
                        if *w <= 0 {
                            Err(NormalizeError::NonPositiveWeight {
                                atom: a.0,
                                weight: *w,
                            })
                        } else {
                            Ok((a.index(), *p, *w))
                        }
                    })
                    .collect::<Result<_, _>>()?;
                match head {
                    Some(h) => np.weight_rules.push(WeightRule {
                        head: h.index(),
                        lower: *lower,
                        elements: elems,
                    }),
                    None => np.weight_constraints.push(WeightConstraint {
                        lower: *lower,
                        elements: elems,
                    }),
                }
            }
            GroundRule::Choice {
                lower,
                heads,
                upper,
                pos,
                neg,
            } => {
                let n = heads.len() as i64;
                if *lower < 0 || lower > upper {
                    return Err(NormalizeError::BadChoiceBounds {
                        lower: *lower,
                        upper: *upper,
                        heads: heads.len(),
                    });
                }
                let heads: Vec<usize> = ids(heads);
                let (pos, neg) = (ids(pos), ids(neg));
                let mut complements = Vec::with_capacity(heads.len());
                for &a in &heads {
                    let c = np.n_total;
                    np.n_total += 1;
                    complements.push(c);
                    let mut a_neg = neg.clone();
                    a_neg.push(c);
                    np.rules.push(NormalRule {
                        head: a,
                        pos: pos.clone(),
                        neg: a_neg,
                    });
                    let mut c_neg = neg.clone();
                    c_neg.push(a);
                    np.rules.push(NormalRule {
                        head: c,
                        pos: pos.clone(),
                        neg: c_neg,
                    });
                }
                // lower bound: complements already carry the body, so the
                // constraint can fire only when the body holds
                if *lower >= 1 {
                    np.weight_constraints.push(WeightConstraint {
                        lower: n - lower + 1,
                        elements: complements.iter().map(|&c| (c, true, 1)).collect(),
                    });
                }
                // upper bound: head atoms may be true without the body, so
                // condition on an applied-marker when the body is not empty
                let applied = if *upper < n {
                    if pos.is_empty() && neg.is_empty() {
                        np.weight_constraints.push(WeightConstraint {
                            lower: upper + 1,
                            elements: heads.iter().map(|&a| (a, true, 1)).collect(),
                        });
                        None
                    } else {
                        let marker = np.n_total;
                        np.n_total += 1;
                        np.rules.push(NormalRule {
                            head: marker,
                            pos: pos.clone(),
                            neg: neg.clone(),
                        });
                        let big = n + 1;
                        let mut elements = vec![(marker, true, big)];
                        elements.extend(heads.iter().map(|&a| (a, true, 1)));
                        np.weight_constraints.push(WeightConstraint {
                            lower: big + upper + 1,
                            elements,
                        });
                        Some(marker)
                    }
                } else {
                    None
                };
                np.choices.push(ChoiceInfo {
                    heads,
                    complements,
                    pos,
                    neg,
                    applied,
                });
            }
        }
    }
    np.tight = positive_graph_is_acyclic(&np);
    Ok(np)
}

fn positive_graph_is_acyclic(np: &NormalizedProgram) -> bool {
    // Kahn's algorithm over edges (pos body atom -> head).
    let n = np.n_total;
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    let add = |from: usize, to: usize, succ: &mut Vec<Vec<usize>>, indeg: &mut Vec<usize>| {
        succ[from].push(to);
        indeg[to] += 1;
    };
    for r in &np.rules {
        for &p in &r.pos {
            add(p, r.head, &mut succ, &mut indeg);
        }
    }
    for r in &np.weight_rules {
        for &(a, positive, _) in &r.elements {
            if positive {
                add(a, r.head, &mut succ, &mut indeg);
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0usize;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    seen == n
}
