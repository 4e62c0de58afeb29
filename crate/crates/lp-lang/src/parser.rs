//! Recursive-descent parser plus program validation (arity consistency,
//! range restriction, guard discipline).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{
    AggKind, Atom, ChoiceElement, Literal, Rel, Rule, RuleProgram, Term, WeightedElement,
};
use crate::lexer::{lex, Spanned, Tok};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: found {found}, expected {}", expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("{line}:{col}: {message}")]
    Lex {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}: predicate `{pred}` used with arity {found}, first seen with arity {expected}")]
    ArityClash {
        line: usize,
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}: variable `{var}` does not occur in a positive domain-predicate atom of its rule")]
    RangeRestriction { line: usize, var: String },
    #[error("{line}: expansion guard `{pred}` is not a domain predicate")]
    GuardNotDomain { line: usize, pred: String },
    #[error("{line}: choice bounds must satisfy 0 <= lower <= upper (got {lower}..{upper})")]
    BadChoiceBounds {
        line: usize,
        lower: i64,
        upper: i64,
    },
    #[error("{line}: at most one cardinality or sum body per rule")]
    MultipleAggregates { line: usize },
    #[error("{line}: the body of a rule with an aggregate may only add domain atoms or builtins")]
    AggregateBodyNotDomain { line: usize },
    #[error("term nesting too deep")]
    TooDeep,
}

const MAX_TERM_DEPTH: usize = 200;

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek2(&self) -> &Spanned {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            found: t.tok.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Spanned> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            self.error(&[what])
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    // ---- terms ------------------------------------------------------

    fn parse_int(&mut self) -> PResult<i64> {
        let neg = self.eat(Tok::Minus);
        match self.peek().tok.clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.error(&["integer"]),
        }
    }

    fn parse_primary(&mut self) -> PResult<Term> {
        self.depth += 1;
        if self.depth > MAX_TERM_DEPTH {
            return Err(ParseError::TooDeep);
        }
        let r = match self.peek().tok.clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Term::Int(v))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().tok.clone() {
                    Tok::Int(v) => {
                        self.bump();
                        Ok(Term::Int(-v))
                    }
                    _ => self.error(&["integer"]),
                }
            }
            Tok::Var(name) => {
                self.bump();
                Ok(Term::Var(name))
            }
            Tok::Abs => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.parse_term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::Abs(Box::new(inner)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.parse_term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => self.error(&["integer", "variable", "`abs`", "`(`"]),
        };
        self.depth -= 1;
        r
    }

    fn parse_term(&mut self) -> PResult<Term> {
        let mut lhs = self.parse_primary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_primary()?;
            lhs = if op {
                Term::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Term::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    // ---- atoms and literals ------------------------------------------

    fn parse_atom(&mut self) -> PResult<Atom> {
        let name = match self.peek().tok.clone() {
            Tok::Ident(n) => {
                self.bump();
                n
            }
            _ => return self.error(&["predicate name"]),
        };
        let mut args = Vec::new();
        if self.eat(Tok::LParen) {
            loop {
                args.push(self.parse_term()?);
                if self.eat(Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RParen, "`)`")?;
                break;
            }
        }
        Ok(Atom { pred: name, args })
    }

    /// `rel` with `>` and `>=` normalized by swapping the operands.
    fn parse_rel(&mut self) -> PResult<(Rel, bool)> {
        let (rel, swap) = match self.peek().tok {
            Tok::Lt => (Rel::Lt, false),
            Tok::Le => (Rel::Le, false),
            Tok::Gt => (Rel::Lt, true),
            Tok::Ge => (Rel::Le, true),
            Tok::EqTok => (Rel::Eq, false),
            Tok::Ne => (Rel::Ne, false),
            _ => return self.error(&["`<`", "`<=`", "`>`", "`>=`", "`=`", "`!=`"]),
        };
        self.bump();
        Ok((rel, swap))
    }

    fn parse_literal(&mut self) -> PResult<Literal> {
        match self.peek().tok.clone() {
            Tok::Not => {
                self.bump();
                let atom = self.parse_atom()?;
                Ok(Literal::Neg(atom))
            }
            Tok::Ident(_) => Ok(Literal::Pos(self.parse_atom()?)),
            _ => {
                let lhs = self.parse_term()?;
                let (rel, swap) = self.parse_rel()?;
                let rhs = self.parse_term()?;
                let (lhs, rhs) = if swap { (rhs, lhs) } else { (lhs, rhs) };
                Ok(Literal::Builtin { rel, lhs, rhs })
            }
        }
    }

    // ---- rule forms ---------------------------------------------------

    fn parse_guards(&mut self) -> PResult<Vec<Atom>> {
        let mut guards = Vec::new();
        while self.eat(Tok::Colon) {
            guards.push(self.parse_atom()?);
        }
        Ok(guards)
    }

    fn parse_choice_elements(&mut self) -> PResult<Vec<ChoiceElement>> {
        let mut elements = Vec::new();
        loop {
            let atom = self.parse_atom()?;
            let guards = self.parse_guards()?;
            elements.push(ChoiceElement { atom, guards });
            if self.eat(Tok::Semi) || self.eat(Tok::Comma) {
                continue;
            }
            self.expect(Tok::RBrace, "`}`")?;
            break;
        }
        Ok(elements)
    }

    fn parse_aggregate(&mut self, lower: i64) -> PResult<(AggKind, i64, Vec<WeightedElement>)> {
        let kind = match self.peek().tok {
            Tok::HashCount => AggKind::Count,
            Tok::HashSum => AggKind::Sum,
            _ => return self.error(&["`#count`", "`#sum`"]),
        };
        self.bump();
        self.expect(Tok::LBrace, "`{`")?;
        let mut elements = Vec::new();
        loop {
            let positive = !self.eat(Tok::Not);
            let atom = self.parse_atom()?;
            let guards = self.parse_guards()?;
            let weight = if self.eat(Tok::EqTok) {
                if matches!(kind, AggKind::Count) {
                    return self.error(&["`;` (weights belong to #sum)"]);
                }
                self.parse_int()?
            } else {
                1
            };
            elements.push(WeightedElement {
                positive,
                atom,
                guards,
                weight,
            });
            if self.eat(Tok::Semi) || self.eat(Tok::Comma) {
                continue;
            }
            self.expect(Tok::RBrace, "`}`")?;
            break;
        }
        Ok((kind, lower, elements))
    }

    /// Body items; at most one aggregate, reported against `line`.
    fn parse_body(
        &mut self,
        line: usize,
    ) -> PResult<(Vec<Literal>, Option<(AggKind, i64, Vec<WeightedElement>)>)> {
        let mut lits = Vec::new();
        let mut agg = None;
        loop {
            let is_agg_start = match (&self.peek().tok, &self.peek2().tok) {
                (Tok::Int(_), Tok::HashCount | Tok::HashSum) => true,
                (Tok::Minus, Tok::Int(_)) => {
                    matches!(
                        self.toks
                            .get(self.pos + 2)
                            .map(|s| &s.tok)
                            .unwrap_or(&Tok::Eof),
                        Tok::HashCount | Tok::HashSum
                    )
                }
                _ => false,
            };
            if is_agg_start {
                let lower = self.parse_int()?;
                let parsed = self.parse_aggregate(lower)?;
                if agg.is_some() {
                    return Err(ParseError::MultipleAggregates { line });
                }
                agg = Some(parsed);
            } else {
                lits.push(self.parse_literal()?);
            }
            if self.eat(Tok::Comma) {
                continue;
            }
            break;
        }
        Ok((lits, agg))
    }

    /// One rule, ending at `.`; returns the rule with its source line.
    fn parse_rule(&mut self) -> PResult<(Rule, usize)> {
        let line = self.peek().line;
        // leading `:-`: integrity constraint (possibly aggregate-bodied)
        if self.eat(Tok::ColonDash) {
            let (body, agg) = self.parse_body(line)?;
            self.expect(Tok::Dot, "`.`")?;
            let rule = match agg {
                None => Rule::Constraint { body },
                Some((kind, lower, elements)) => Rule::Aggregate {
                    head: None,
                    kind,
                    lower,
                    elements,
                    body,
                },
            };
            return Ok((rule, line));
        }
        // choice rule, with or without a lower bound
        let starts_choice = matches!(self.peek().tok, Tok::LBrace)
            || (matches!(self.peek().tok, Tok::Int(_))
                && matches!(self.peek2().tok, Tok::LBrace));
        if starts_choice {
            let lower = match self.peek().tok {
                Tok::Int(v) => {
                    self.bump();
                    Some(v)
                }
                _ => None,
            };
            self.expect(Tok::LBrace, "`{`")?;
            let elements = self.parse_choice_elements()?;
            let upper = match self.peek().tok {
                Tok::Int(v) => {
                    self.bump();
                    Some(v)
                }
                _ => None,
            };
            let body = if self.eat(Tok::ColonDash) {
                let (body, agg) = self.parse_body(line)?;
                if agg.is_some() {
                    return Err(ParseError::MultipleAggregates { line });
                }
                body
            } else {
                Vec::new()
            };
            self.expect(Tok::Dot, "`.`")?;
            return Ok((
                Rule::Choice {
                    lower,
                    elements,
                    upper,
                    body,
                },
                line,
            ));
        }
        // head-first forms: domain decl, fact, normal rule, aggregate rule
        let name = match self.peek().tok.clone() {
            Tok::Ident(n) => n,
            _ => return self.error(&["`:-`", "`{`", "bound", "predicate name"]),
        };
        // interval declaration `d(1..8).`
        if self.peek2().tok == Tok::LParen {
            let mark = self.pos;
            self.bump(); // ident
            self.bump(); // (
            let is_interval = matches!(
                (&self.peek().tok, &self.peek2().tok),
                (Tok::Int(_), Tok::DotDot)
            ) || matches!(self.peek().tok, Tok::Minus);
            if is_interval {
                let low = self.parse_int()?;
                if self.eat(Tok::DotDot) {
                    let high = self.parse_int()?;
                    self.expect(Tok::RParen, "`)`")?;
                    self.expect(Tok::Dot, "`.`")?;
                    return Ok((
                        Rule::DomainDecl {
                            pred: name,
                            low,
                            high,
                        },
                        line,
                    ));
                }
            }
            self.pos = mark; // ordinary atom after all
        }
        let head = self.parse_atom()?;
        if self.eat(Tok::Dot) {
            return Ok((Rule::Fact(head), line));
        }
        self.expect(Tok::ColonDash, "`:-` or `.`")?;
        let (body, agg) = self.parse_body(line)?;
        self.expect(Tok::Dot, "`.`")?;
        let rule = match agg {
            None => Rule::Normal { head, body },
            Some((kind, lower, elements)) => Rule::Aggregate {
                head: Some(head),
                kind,
                lower,
                elements,
                body,
            },
        };
        Ok((rule, line))
    }
}

/// Parses and validates a program. Never panics on any input.
pub fn parse_program(source: &str) -> Result<RuleProgram, ParseError> {
    let toks = lex(source).map_err(|e| ParseError::Lex {
        line: e.line,
        col: e.col,
        message: e.message,
    })?;
    let mut parser = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let mut rules = Vec::new();
    let mut lines = Vec::new();
    while parser.peek().tok != Tok::Eof {
        let (rule, line) = parser.parse_rule()?;
        rules.push(rule);
        lines.push(line);
    }
    validate(rules, lines)
}

// ---------------------------------------------------------------------------
// Validation

fn atoms_of_rule(rule: &Rule) -> Vec<(&Atom, AtomPosition)> {
    let mut out = Vec::new();
    match rule {
        Rule::DomainDecl { .. } => {}
        Rule::Fact(a) => out.push((a, AtomPosition::Defining)),
        Rule::Normal { head, body } => {
            out.push((head, AtomPosition::Defining));
            for l in body {
                if let Literal::Pos(a) | Literal::Neg(a) = l {
                    out.push((a, AtomPosition::Body));
                }
            }
        }
        Rule::Choice { elements, body, .. } => {
            for e in elements {
                out.push((&e.atom, AtomPosition::Defining));
                for g in &e.guards {
                    out.push((g, AtomPosition::Guard));
                }
            }
            for l in body {
                if let Literal::Pos(a) | Literal::Neg(a) = l {
                    out.push((a, AtomPosition::Body));
                }
            }
        }
        Rule::Constraint { body } => {
            for l in body {
                if let Literal::Pos(a) | Literal::Neg(a) = l {
                    out.push((a, AtomPosition::Body));
                }
            }
        }
        Rule::Aggregate {
            head,
            elements,
            body,
            ..
        } => {
            if let Some(h) = head {
                out.push((h, AtomPosition::Defining));
            }
            for e in elements {
                out.push((&e.atom, AtomPosition::Body));
                for g in &e.guards {
                    out.push((g, AtomPosition::Guard));
                }
            }
            for l in body {
                if let Literal::Pos(a) | Literal::Neg(a) = l {
                    out.push((a, AtomPosition::Body));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum AtomPosition {
    /// Head, fact, or choice element: the predicate is defined here.
    Defining,
    Body,
    Guard,
}

fn validate(rules: Vec<Rule>, lines: Vec<usize>) -> Result<RuleProgram, ParseError> {
    // arity consistency
    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    for (rule, line) in rules.iter().zip(&lines) {
        let mut check = |pred: &str, arity: usize| -> Result<(), ParseError> {
            match arities.get(pred) {
                Some(&a) if a != arity => Err(ParseError::ArityClash {
                    line: *line,
                    pred: pred.to_string(),
                    expected: a,
                    found: arity,
                }),
                Some(_) => Ok(()),
                None => {
                    arities.insert(pred.to_string(), arity);
                    Ok(())
                }
            }
        };
        if let Rule::DomainDecl { pred, .. } = rule {
            check(pred, 1)?;
        }
        for (atom, _) in atoms_of_rule(rule) {
            check(&atom.pred, atom.args.len())?;
        }
    }

    // domain predicates: defined only by facts and interval declarations
    let mut fact_defined: BTreeSet<String> = BTreeSet::new();
    let mut rule_defined: BTreeSet<String> = BTreeSet::new();
    for rule in &rules {
        match rule {
            Rule::DomainDecl { pred, .. } => {
                fact_defined.insert(pred.clone());
            }
            Rule::Fact(a) => {
                fact_defined.insert(a.pred.clone());
            }
            _ => {
                for (atom, pos) in atoms_of_rule(rule) {
                    if pos == AtomPosition::Defining {
                        rule_defined.insert(atom.pred.clone());
                    }
                }
            }
        }
    }
    let domain_preds: BTreeSet<String> =
        fact_defined.difference(&rule_defined).cloned().collect();

    // guards must be domain predicates; range restriction per rule
    for (rule, line) in rules.iter().zip(&lines) {
        for (atom, pos) in atoms_of_rule(rule) {
            if pos == AtomPosition::Guard && !domain_preds.contains(&atom.pred) {
                return Err(ParseError::GuardNotDomain {
                    line: *line,
                    pred: atom.pred.clone(),
                });
            }
        }
        if let Rule::Choice { lower, upper, .. } = rule {
            let l = lower.unwrap_or(0);
            if l < 0 || upper.is_some_and(|u| u < l) {
                return Err(ParseError::BadChoiceBounds {
                    line: *line,
                    lower: l,
                    upper: upper.unwrap_or(l),
                });
            }
        }
        if let Rule::Aggregate { body, .. } = rule {
            // the plain part of an aggregate rule's body must vanish at
            // grounding time, so only domain atoms and builtins are allowed
            for l in body {
                match l {
                    Literal::Pos(a) if domain_preds.contains(&a.pred) => {}
                    Literal::Builtin { .. } => {}
                    _ => {
                        return Err(ParseError::AggregateBodyNotDomain { line: *line });
                    }
                }
            }
        }
        check_range_restriction(rule, &domain_preds, *line)?;
    }

    Ok(RuleProgram::new(rules, arities, domain_preds))
}

/// Every variable of the rule must occur in a positive domain-predicate
/// atom of the rule body; element-local variables may instead be bound by
/// their own expansion guards.
fn check_range_restriction(
    rule: &Rule,
    domain_preds: &BTreeSet<String>,
    line: usize,
) -> Result<(), ParseError> {
    let body: &[Literal] = match rule {
        Rule::Normal { body, .. }
        | Rule::Choice { body, .. }
        | Rule::Constraint { body }
        | Rule::Aggregate { body, .. } => body,
        Rule::DomainDecl { .. } => return Ok(()),
        Rule::Fact(atom) => {
            let mut vs = BTreeSet::new();
            atom.vars(&mut vs);
            return match vs.into_iter().next() {
                Some(var) => Err(ParseError::RangeRestriction { line, var }),
                None => Ok(()),
            };
        }
    };

    // Only a variable standing directly as an argument of a positive
    // domain atom is bound by enumeration; `d(X+1)` binds nothing.
    let mut bound: BTreeSet<String> = BTreeSet::new();
    for l in body {
        if let Literal::Pos(a) = l {
            if domain_preds.contains(&a.pred) {
                for t in &a.args {
                    if let Term::Var(v) = t {
                        bound.insert(v.clone());
                    }
                }
            }
        }
    }

    let mut rule_vars: BTreeSet<String> = BTreeSet::new();
    match rule {
        Rule::Normal { head, body } => {
            head.vars(&mut rule_vars);
            for l in body {
                l.vars(&mut rule_vars);
            }
        }
        Rule::Constraint { body } => {
            for l in body {
                l.vars(&mut rule_vars);
            }
        }
        Rule::Choice {
            elements, body, ..
        } => {
            for l in body {
                l.vars(&mut rule_vars);
            }
            for e in elements {
                element_rule_vars(&e.atom, &e.guards, &mut rule_vars);
            }
        }
        Rule::Aggregate {
            head,
            elements,
            body,
            ..
        } => {
            if let Some(h) = head {
                h.vars(&mut rule_vars);
            }
            for l in body {
                l.vars(&mut rule_vars);
            }
            for e in elements {
                element_rule_vars(&e.atom, &e.guards, &mut rule_vars);
            }
        }
        _ => {}
    }

    for var in rule_vars.difference(&bound) {
        return Err(ParseError::RangeRestriction {
            line,
            var: var.clone(),
        });
    }
    Ok(())
}

/// Variables an element exposes at rule level: everything in the atom or
/// guards that no guard binds directly.
fn element_rule_vars(atom: &Atom, guards: &[Atom], rule_vars: &mut BTreeSet<String>) {
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
        rule_vars.insert(v.clone());
    }
}
