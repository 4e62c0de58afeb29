//! Production grounder: joins substitutions over domain-predicate
//! extensions, evaluates builtins away, expands guarded elements, absorbs
//! facts out of rule bodies, and emits a propositional program.
//!
//! Rule instances stream straight into the output; the substitution space
//! is never materialized.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use lp_lang::{Atom, ChoiceElement, Literal, Rule, RuleProgram, Term, WeightedElement};

use crate::atoms::{AtomId, AtomTable, GroundAtom};
use crate::builtins::{eval_builtin, eval_term, try_eval_term, Binding, GroundError};
use crate::rules::{GroundProgram, GroundRule};

#[derive(Clone, Debug, Default)]
pub struct GroundStats {
    pub atom_count: usize,
    pub rule_count: usize,
    pub fact_count: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Grounding {
    pub program: GroundProgram,
    pub stats: GroundStats,
}

#[derive(Clone, Debug, Default)]
struct Extension {
    tuples: Vec<Vec<i64>>,
    set: HashSet<Vec<i64>>,
}

impl Extension {
    fn insert(&mut self, tuple: Vec<i64>) {
        if self.set.insert(tuple.clone()) {
            self.tuples.push(tuple);
        }
    }

    fn finish(&mut self) {
        self.tuples.sort();
    }
}

type Extensions = BTreeMap<String, Extension>;

struct Grounder<'p> {
    source: &'p RuleProgram,
    ext: Extensions,
    table: AtomTable,
    facts: BTreeSet<AtomId>,
    rules: Vec<GroundRule>,
    warnings: Vec<String>,
}

pub fn ground(program: &RuleProgram) -> Result<Grounding, GroundError> {
    let mut g = Grounder {
        source: program,
        ext: Extensions::new(),
        table: AtomTable::new(),
        facts: BTreeSet::new(),
        rules: Vec::new(),
        warnings: Vec::new(),
    };
    g.collect_facts()?;
    for ext in g.ext.values_mut() {
        ext.finish();
    }
    for (idx, rule) in program.rules().iter().enumerate() {
        g.ground_rule(idx, rule)?;
    }
    let stats = GroundStats {
        atom_count: g.table.len(),
        rule_count: g.rules.len(),
        fact_count: g.facts.len(),
        warnings: g.warnings,
    };
    Ok(Grounding {
        program: GroundProgram {
            atoms: g.table,
            rules: g.rules,
            facts: g.facts,
        },
        stats,
    })
}

impl<'p> Grounder<'p> {
    /// Interval declarations and facts populate the atom table, the fact
    /// set, and the extensions of domain predicates, in program order.
    fn collect_facts(&mut self) -> Result<(), GroundError> {
        let empty = Binding::new();
        for rule in self.source.rules() {
            match rule {
                Rule::DomainDecl { pred, low, high } => {
                    for v in *low..=*high {
                        self.add_fact(pred, vec![v]);
                    }
                }
                Rule::Fact(atom) => {
                    let args = atom
                        .args
                        .iter()
                        .map(|t| eval_term(t, &empty))
                        .collect::<Result<Vec<_>, _>>()?;
                    self.add_fact(&atom.pred, args);
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn add_fact(&mut self, pred: &str, args: Vec<i64>) {
        let id = self.table.intern(GroundAtom::new(pred, args.clone()));
        self.facts.insert(id);
        if self.source.is_domain_pred(pred) {
            self.ext.entry(pred.to_string()).or_default().insert(args);
        }
    }

    fn warn_empty(&mut self, idx: usize, pred: &str) {
        self.warnings.push(format!(
            "rule {}: domain predicate `{pred}` has an empty extension; the rule vanishes",
            idx + 1
        ));
    }

    /// Positive body atoms over domain predicates, used to drive the join.
    fn binding_atoms<'r>(&self, body: &'r [Literal]) -> Vec<&'r Atom> {
        body.iter()
            .filter_map(|l| match l {
                Literal::Pos(a) if self.source.is_domain_pred(&a.pred) => Some(a),
                _ => None,
            })
            .collect()
    }

    fn ground_rule(&mut self, idx: usize, rule: &Rule) -> Result<(), GroundError> {
        let body: &[Literal] = match rule {
            Rule::DomainDecl { .. } | Rule::Fact(_) => return Ok(()),
            Rule::Normal { body, .. }
            | Rule::Choice { body, .. }
            | Rule::Constraint { body }
            | Rule::Aggregate { body, .. } => body,
        };
        let binding_atoms = self.binding_atoms(body);
        for a in &binding_atoms {
            if self.ext.get(&a.pred).map_or(true, |e| e.tuples.is_empty()) {
                self.warn_empty(idx, &a.pred);
                return Ok(());
            }
        }
        // The join drives candidate substitutions; ground_body re-verifies
        // every literal, so deferred checks on compound arguments resolve
        // there.
        let mut binding = Binding::new();
        self.join_and_emit(rule, idx, &binding_atoms, 0, &mut binding)
    }

    fn join_and_emit(
        &mut self,
        rule: &Rule,
        idx: usize,
        binding_atoms: &[&Atom],
        depth: usize,
        binding: &mut Binding,
    ) -> Result<(), GroundError> {
        if depth == binding_atoms.len() {
            return self.emit_instance(rule, idx, binding);
        }
        let atom = binding_atoms[depth];
        let tuples = match self.ext.get(&atom.pred) {
            Some(e) => e.tuples.clone(),
            None => return Ok(()),
        };
        'tuples: for tuple in &tuples {
            let mut bound_here: Vec<String> = Vec::new();
            for (term, &value) in atom.args.iter().zip(tuple) {
                match term {
                    Term::Var(name) => match binding.get(name) {
                        Some(&v) => {
                            if v != value {
                                for b in &bound_here {
                                    binding.remove(b);
                                }
                                continue 'tuples;
                            }
                        }
                        None => {
                            binding.insert(name.clone(), value);
                            bound_here.push(name.clone());
                        }
                    },
                    other => {
                        if let Some(v) = try_eval_term(other, binding)? {
                            if v != value {
                                for b in &bound_here {
                                    binding.remove(b);
                                }
                                continue 'tuples;
                            }
                        }
                    }
                }
            }
            self.join_and_emit(rule, idx, binding_atoms, depth + 1, binding)?;
            for b in &bound_here {
                binding.remove(b);
            }
        }
        Ok(())
    }

    /// Evaluates builtins and fact-absorbs a body under a full binding.
    /// `None` means the instance is dropped (a builtin or known literal is
    /// false, or the body is self-contradictory).
    fn ground_body(
        &mut self,
        body: &[Literal],
        binding: &Binding,
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
                Literal::Pos(a) => {
                    let id = self.intern_atom(a, binding)?;
                    if self.facts.contains(&id) {
                        continue; // trivially true
                    }
                    if self.source.is_domain_pred(&a.pred) {
                        return Ok(None); // domain atom outside its extension
                    }
                    pos.push(id);
                }
                Literal::Neg(a) => {
                    let id = self.intern_atom(a, binding)?;
                    if self.facts.contains(&id) {
                        return Ok(None); // negation of a fact
                    }
                    if self.source.is_domain_pred(&a.pred) {
                        continue; // negation of a non-fact domain atom
                    }
                    neg.push(id);
                }
            }
        }
        pos.sort_unstable();
        pos.dedup();
        neg.sort_unstable();
        neg.dedup();
        if pos.iter().any(|p| neg.binary_search(p).is_ok()) {
            return Ok(None); // a and not a can never hold together
        }
        Ok(Some((pos, neg)))
    }

    fn intern_atom(&mut self, atom: &Atom, binding: &Binding) -> Result<AtomId, GroundError> {
        let args = atom
            .args
            .iter()
            .map(|t| eval_term(t, binding))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.table.intern(GroundAtom::new(&atom.pred, args)))
    }

    /// Expands `atom : guards` over the guards' extensions under the rule
    /// binding, yielding one ground atom per guard solution.
    fn expand_element(
        &mut self,
        atom: &Atom,
        guards: &[Atom],
        idx: usize,
        binding: &mut Binding,
        out: &mut Vec<AtomId>,
    ) -> Result<(), GroundError> {
        for g in guards {
            if self.ext.get(&g.pred).map_or(true, |e| e.tuples.is_empty()) {
                self.warn_empty(idx, &g.pred);
                return Ok(());
            }
        }
        self.expand_element_rec(atom, guards, 0, binding, out)
    }

    fn expand_element_rec(
        &mut self,
        atom: &Atom,
        guards: &[Atom],
        depth: usize,
        binding: &mut Binding,
        out: &mut Vec<AtomId>,
    ) -> Result<(), GroundError> {
        if depth == guards.len() {
            // re-verify every guard under the complete binding
            for g in guards {
                let args = g
                    .args
                    .iter()
                    .map(|t| eval_term(t, binding))
                    .collect::<Result<Vec<_>, _>>()?;
                if !self.ext[&g.pred].set.contains(&args) {
                    return Ok(());
                }
            }
            let id = self.intern_atom(atom, binding)?;
            out.push(id);
            return Ok(());
        }
        let guard = &guards[depth];
        let tuples = self.ext[&guard.pred].tuples.clone();
        'tuples: for tuple in &tuples {
            let mut bound_here: Vec<String> = Vec::new();
            for (term, &value) in guard.args.iter().zip(tuple) {
                match term {
                    Term::Var(name) => match binding.get(name) {
                        Some(&v) => {
                            if v != value {
                                for b in &bound_here {
                                    binding.remove(b);
                                }
                                continue 'tuples;
                            }
                        }
                        None => {
                            binding.insert(name.clone(), value);
                            bound_here.push(name.clone());
                        }
                    },
                    other => {
                        if let Some(v) = try_eval_term(other, binding)? {
                            if v != value {
                                for b in &bound_here {
                                    binding.remove(b);
                                }
                                continue 'tuples;
                            }
                        }
                    }
                }
            }
            self.expand_element_rec(atom, guards, depth + 1, binding, out)?;
            for b in &bound_here {
                binding.remove(b);
            }
        }
        Ok(())
    }

    fn emit_instance(
        &mut self,
        rule: &Rule,
        idx: usize,
        binding: &mut Binding,
    ) -> Result<(), GroundError> {
        match rule {
            Rule::Normal { head, body } => {
                let Some((pos, neg)) = self.ground_body(body, binding)? else {
                    return Ok(());
                };
                let head = self.intern_atom(head, binding)?;
                if pos.contains(&head) {
                    return Ok(()); // tautology: provides no support
                }
                if neg.contains(&head) {
                    // `a :- B, not a` acts as `:- B, not a`
                    self.rules.push(GroundRule::Constraint { pos, neg });
                    return Ok(());
                }
                if pos.is_empty() && neg.is_empty() {
                    self.facts.insert(head);
                    return Ok(());
                }
                self.rules.push(GroundRule::Normal { head, pos, neg });
            }
            Rule::Constraint { body } => {
                let Some((pos, neg)) = self.ground_body(body, binding)? else {
                    return Ok(());
                };
                self.rules.push(GroundRule::Constraint { pos, neg });
            }
            Rule::Choice {
                lower,
                elements,
                upper,
                body,
            } => {
                let Some((pos, neg)) = self.ground_body(body, binding)? else {
                    return Ok(());
                };
                let mut heads: Vec<AtomId> = Vec::new();
                for ChoiceElement { atom, guards } in elements {
                    self.expand_element(atom, guards, idx, binding, &mut heads)?;
                }
                let mut seen = HashSet::new();
                heads.retain(|h| seen.insert(*h));
                let n = heads.len() as i64;
                let lower = lower.unwrap_or(0);
                let upper = upper.unwrap_or(n).min(n);
                if lower > n {
                    // the choice cannot reach its lower bound: the body
                    // must be false
                    self.rules.push(GroundRule::Constraint { pos, neg });
                    return Ok(());
                }
                if heads.is_empty() {
                    return Ok(());
                }
                self.rules.push(GroundRule::Choice {
                    lower,
                    heads,
                    upper,
                    pos,
                    neg,
                });
            }
            Rule::Aggregate {
                head,
                kind: _,
                lower,
                elements,
                body,
            } => {
                let Some((pos, neg)) = self.ground_body(body, binding)? else {
                    return Ok(());
                };
                debug_assert!(pos.is_empty() && neg.is_empty());
                let mut ground_elements: Vec<(AtomId, bool, i64)> = Vec::new();
                for WeightedElement {
                    positive,
                    atom,
                    guards,
                    weight,
                } in elements
                {
                    if *weight <= 0 {
                        return Err(GroundError::NonPositiveWeight {
                            atom: atom.pred.clone(),
                            weight: *weight,
                        });
                    }
                    let mut ids = Vec::new();
                    self.expand_element(atom, guards, idx, binding, &mut ids)?;
                    for id in ids {
                        ground_elements.push((id, *positive, *weight));
                    }
                }
                let head = head
                    .as_ref()
                    .map(|h| self.intern_atom(h, binding))
                    .transpose()?;
                if ground_elements.is_empty() {
                    match head {
                        Some(h) if *lower <= 0 => {
                            self.facts.insert(h);
                        }
                        None if *lower <= 0 => {
                            // an empty sum already reaches the bound
                            self.rules.push(GroundRule::Constraint {
                                pos: vec![],
                                neg: vec![],
                            });
                        }
                        _ => {}
                    }
                    return Ok(());
                }
                self.rules.push(GroundRule::WeightBody {
                    head,
                    lower: *lower,
                    elements: ground_elements,
                });
            }
            Rule::DomainDecl { .. } | Rule::Fact(_) => {}
        }
        Ok(())
    }
}
