//! Reference grounder: instantiates every rule over the full substitution
//! space (all program values for every variable) with no join pruning and
//! no fact absorption. Exists to audit the production grounder; the two
//! must produce programs with identical stable models.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use lp_lang::{Atom, Literal, Rule, RuleProgram, Term};

use crate::atoms::{AtomId, AtomTable, GroundAtom};
use crate::builtins::{eval_builtin, eval_term, Binding, GroundError};
use crate::rules::{GroundProgram, GroundRule};

pub fn ground_naive(program: &RuleProgram) -> Result<GroundProgram, GroundError> {
    let mut table = AtomTable::new();
    let mut facts: BTreeSet<AtomId> = BTreeSet::new();
    let empty = Binding::new();

    // universe: every integer named by a declaration interval or a fact
    let mut universe: BTreeSet<i64> = BTreeSet::new();
    for rule in program.rules() {
        match rule {
            Rule::DomainDecl { low, high, .. } => {
                universe.extend(*low..=*high);
            }
            Rule::Fact(atom) => {
                for t in &atom.args {
                    universe.insert(eval_term(t, &empty)?);
                }
            }
            _ => {}
        }
    }
    let universe: Vec<i64> = universe.into_iter().collect();

    for rule in program.rules() {
        match rule {
            Rule::DomainDecl { pred, low, high } => {
                for v in *low..=*high {
                    facts.insert(table.intern(GroundAtom::new(pred, vec![v])));
                }
            }
            Rule::Fact(atom) => {
                let args = atom
                    .args
                    .iter()
                    .map(|t| eval_term(t, &empty))
                    .collect::<Result<Vec<_>, _>>()?;
                facts.insert(table.intern(GroundAtom::new(&atom.pred, args)));
            }
            _ => {}
        }
    }
    let fact_set = facts.clone();

    let mut rules = Vec::new();
    for rule in program.rules() {
        if matches!(rule, Rule::DomainDecl { .. } | Rule::Fact(_)) {
            continue;
        }
        let vars = rule_level_vars(rule);
        let mut binding = Binding::new();
        instantiate(
            rule,
            &vars,
            0,
            &universe,
            &mut binding,
            &mut table,
            &fact_set,
            &mut rules,
            &mut facts,
        )?;
    }

    Ok(GroundProgram {
        atoms: table,
        rules,
        facts,
    })
}

/// Rule-level variables in sorted order; element-local variables (bound by
/// their guards) expand separately.
fn rule_level_vars(rule: &Rule) -> Vec<String> {
    let mut vars: BTreeSet<String> = BTreeSet::new();
    match rule {
        Rule::Normal { head, body } => {
            head.vars(&mut vars);
            for l in body {
                l.vars(&mut vars);
            }
        }
        Rule::Constraint { body } => {
            for l in body {
                l.vars(&mut vars);
            }
        }
        Rule::Choice {
            elements, body, ..
        } => {
            for l in body {
                l.vars(&mut vars);
            }
            for e in elements {
                element_exposed_vars(&e.atom, &e.guards, &mut vars);
            }
        }
        Rule::Aggregate {
            head,
            elements,
            body,
            ..
        } => {
            if let Some(h) = head {
                h.vars(&mut vars);
            }
            for l in body {
                l.vars(&mut vars);
            }
            for e in elements {
                element_exposed_vars(&e.atom, &e.guards, &mut vars);
            }
        }
        _ => {}
    }
    vars.into_iter().collect()
}

fn element_exposed_vars(atom: &Atom, guards: &[Atom], out: &mut BTreeSet<String>) {
    let mut local: BTreeSet<String> = BTreeSet::new();
    atom.vars(&mut local);
    for g in guards {
        g.vars(&mut local);
    }
    let mut guard_bound: BTreeSet<String> = BTreeSet::new();
    for g in guards {
        for t in &g.args {
            if let Term::Var(v) = t {
                guard_bound.insert(v.clone());
            }
        }
    }
    for v in local.difference(&guard_bound) {
        out.insert(v.clone());
    }
}

fn element_local_vars(atom: &Atom, guards: &[Atom], binding: &Binding) -> Vec<String> {
    let mut local: BTreeSet<String> = BTreeSet::new();
    atom.vars(&mut local);
    for g in guards {
        g.vars(&mut local);
    }
    local
        .into_iter()
        .filter(|v| !binding.contains_key(v))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn instantiate(
    rule: &Rule,
    vars: &[String],
    depth: usize,
    universe: &[i64],
    binding: &mut Binding,
    table: &mut AtomTable,
    fact_set: &BTreeSet<AtomId>,
    rules: &mut Vec<GroundRule>,
    facts: &mut BTreeSet<AtomId>,
) -> Result<(), GroundError> {
    if depth < vars.len() {
        for &v in universe {
            binding.insert(vars[depth].clone(), v);
            instantiate(
                rule, vars, depth + 1, universe, binding, table, fact_set, rules, facts,
            )?;
        }
        binding.remove(&vars[depth]);
        return Ok(());
    }
    emit(rule, binding, universe, table, fact_set, rules, facts)
}

fn intern(atom: &Atom, binding: &Binding, table: &mut AtomTable) -> Result<AtomId, GroundError> {
    let args = atom
        .args
        .iter()
        .map(|t| eval_term(t, binding))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(table.intern(GroundAtom::new(&atom.pred, args)))
}

/// Keeps every body literal; only builtins are evaluated away.
fn plain_body(
    body: &[Literal],
    binding: &Binding,
    table: &mut AtomTable,
) -> Result<Option<(Vec<AtomId>, Vec<AtomId>)>, GroundError> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for lit in body {
        match lit {
            Literal::Builtin { rel, lhs, rhs } => {
                if !eval_builtin(*rel, lhs, rhs, binding)? {
                    return Ok(None);
                }
            }
            Literal::Pos(a) => pos.push(intern(a, binding, table)?),
            Literal::Neg(a) => neg.push(intern(a, binding, table)?),
        }
    }
    pos.sort_unstable();
    pos.dedup();
    neg.sort_unstable();
    neg.dedup();
    Ok(Some((pos, neg)))
}

/// Expands one guarded element over the universe, keeping instances whose
/// guards are all facts.
fn expand(
    atom: &Atom,
    guards: &[Atom],
    binding: &mut Binding,
    universe: &[i64],
    table: &mut AtomTable,
    fact_set: &BTreeSet<AtomId>,
    out: &mut Vec<AtomId>,
) -> Result<(), GroundError> {
    let locals = element_local_vars(atom, guards, binding);
    expand_rec(atom, guards, &locals, 0, binding, universe, table, fact_set, out)
}

#[allow(clippy::too_many_arguments)]
fn expand_rec(
    atom: &Atom,
    guards: &[Atom],
    locals: &[String],
    depth: usize,
    binding: &mut Binding,
    universe: &[i64],
    table: &mut AtomTable,
    fact_set: &BTreeSet<AtomId>,
    out: &mut Vec<AtomId>,
) -> Result<(), GroundError> {
    if depth < locals.len() {
        for &v in universe {
            binding.insert(locals[depth].clone(), v);
            expand_rec(
                atom, guards, locals, depth + 1, binding, universe, table, fact_set, out,
            )?;
        }
        binding.remove(&locals[depth]);
        return Ok(());
    }
    for g in guards {
        let id = intern(g, binding, table)?;
        if !fact_set.contains(&id) {
            return Ok(());
        }
    }
    out.push(intern(atom, binding, table)?);
    Ok(())
}

fn emit(
    rule: &Rule,
    binding: &mut Binding,
    universe: &[i64],
    table: &mut AtomTable,
    fact_set: &BTreeSet<AtomId>,
    rules: &mut Vec<GroundRule>,
    facts: &mut BTreeSet<AtomId>,
) -> Result<(), GroundError> {
    match rule {
        Rule::Normal { head, body } => {
            let Some((pos, neg)) = plain_body(body, binding, table)? else {
                return Ok(());
            };
            let head = intern(head, binding, table)?;
            if pos.contains(&head) {
                return Ok(());
            }
            if neg.contains(&head) {
                rules.push(GroundRule::Constraint { pos, neg });
                return Ok(());
            }
            if pos.is_empty() && neg.is_empty() {
                facts.insert(head);
                return Ok(());
            }
            rules.push(GroundRule::Normal { head, pos, neg });
        }
        Rule::Constraint { body } => {
            let Some((pos, neg)) = plain_body(body, binding, table)? else {
                return Ok(());
            };
            rules.push(GroundRule::Constraint { pos, neg });
        }
        Rule::Choice {
            lower,
            elements,
            upper,
            body,
        } => {
            let Some((pos, neg)) = plain_body(body, binding, table)? else {
                return Ok(());
            };
            let mut heads = Vec::new();
            for e in elements {
                expand(&e.atom, &e.guards, binding, universe, table, fact_set, &mut heads)?;
            }
            let mut seen = HashSet::new();
            heads.retain(|h| seen.insert(*h));
            let n = heads.len() as i64;
            let lower = lower.unwrap_or(0);
            let upper = upper.unwrap_or(n).min(n);
            if lower > n {
                rules.push(GroundRule::Constraint { pos, neg });
                return Ok(());
            }
            if heads.is_empty() {
                return Ok(());
            }
            rules.push(GroundRule::Choice {
                lower,
                heads,
                upper,
                pos,
                neg,
            });
        }
        Rule::Aggregate {
            head,
            lower,
            elements,
            body,
            ..
        } => {
            // the plain part may only hold domain atoms and builtins; both
            // are decided against the fact set here
            for lit in body {
                match lit {
                    Literal::Builtin { rel, lhs, rhs } => {
                        if !eval_builtin(*rel, lhs, rhs, binding)? {
                            return Ok(());
                        }
                    }
                    Literal::Pos(a) => {
                        let id = intern(a, binding, table)?;
                        if !fact_set.contains(&id) {
                            return Ok(());
                        }
                    }
                    Literal::Neg(a) => {
                        let id = intern(a, binding, table)?;
                        if fact_set.contains(&id) {
                            return Ok(());
                        }
                    }
                }
            }
            let mut ground_elements = Vec::new();
            for e in elements {
                if e.weight <= 0 {
                    return Err(GroundError::NonPositiveWeight {
                        atom: e.atom.pred.clone(),
                        weight: e.weight,
                    });
                }
                let mut ids = Vec::new();
                expand(&e.atom, &e.guards, binding, universe, table, fact_set, &mut ids)?;
                for id in ids {
                    ground_elements.push((id, e.positive, e.weight));
                }
            }
            let head = head
                .as_ref()
                .map(|h| intern(h, binding, table))
                .transpose()?;
            if ground_elements.is_empty() {
                match head {
                    Some(h) if *lower <= 0 => {
                        facts.insert(h);
                    }
                    None if *lower <= 0 => {
                        rules.push(GroundRule::Constraint {
                            pos: vec![],
                            neg: vec![],
                        });
                    }
                    _ => {}
                }
                return Ok(());
            }
            rules.push(GroundRule::WeightBody {
                head,
                lower: *lower,
                elements: ground_elements,
            });
        }
        Rule::DomainDecl { .. } | Rule::Fact(_) => {}
    }
    Ok(())
}

/// Readable atom names of a model, for cross-grounder comparison.
pub fn model_names(program: &GroundProgram, atoms: &BTreeSet<AtomId>) -> BTreeSet<String> {
    atoms
        .iter()
        .map(|id| program.atoms.get(*id).to_string())
        .collect()
}

/// Groups of data useful when comparing groundings structurally.
pub fn rule_histogram(program: &GroundProgram) -> BTreeMap<&'static str, usize> {
    let mut h = BTreeMap::new();
    for r in &program.rules {
        let k = match r {
            GroundRule::Normal { .. } => "normal",
            GroundRule::Choice { .. } => "choice",
            GroundRule::Constraint { .. } => "constraint",
            GroundRule::WeightBody { .. } => "weight",
        };
        *h.entry(k).or_insert(0) += 1;
    }
    h
}
