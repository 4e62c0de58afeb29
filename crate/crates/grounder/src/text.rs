//! Textual ground format: an atom-table section followed by one rule per
//! line. See `docs/formats.md` for the full description.
//!
//! ```text
//! #atom 1 d(1)
//! #atom 2 pos(1,1)
//! #fact d(1).
//! pos(1,1) :- d(1), not q(2).
//! :- pos(1,1), pos(2,2).
//! #choice 1 {pos(1,1); pos(1,2)} 1 :- d(1), not q(2).
//! #weight h 2 [pos(1,1) = 3; not q(2) = 1].
//! #weight _ 1 [pos(1,1) = 1].
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::atoms::{AtomId, AtomTable, GroundAtom};
use crate::rules::{GroundProgram, GroundRule};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("ground text line {line}: {message}")]
pub struct TextError {
    pub line: usize,
    pub message: String,
}

pub fn to_text(program: &GroundProgram) -> String {
    let mut out = String::new();
    for (id, atom) in program.atoms.iter() {
        let _ = writeln!(out, "#atom {id} {atom}");
    }
    for f in &program.facts {
        let _ = writeln!(out, "#fact {}.", program.atoms.get(*f));
    }
    let name = |id: &AtomId| program.atoms.get(*id).to_string();
    let body_text = |pos: &[AtomId], neg: &[AtomId]| {
        let mut parts: Vec<String> = pos.iter().map(&name).collect();
        parts.extend(neg.iter().map(|id| format!("not {}", name(id))));
        parts.join(", ")
    };
    for rule in &program.rules {
        match rule {
            GroundRule::Normal { head, pos, neg } => {
                let _ = writeln!(out, "{} :- {}.", name(head), body_text(pos, neg));
            }
            GroundRule::Constraint { pos, neg } => {
                let _ = writeln!(out, ":- {}.", body_text(pos, neg));
            }
            GroundRule::Choice {
                lower,
                heads,
                upper,
                pos,
                neg,
            } => {
                let heads_text = heads.iter().map(&name).collect::<Vec<_>>().join("; ");
                let _ = write!(out, "#choice {lower} {{{heads_text}}} {upper}");
                if !pos.is_empty() || !neg.is_empty() {
                    let _ = write!(out, " :- {}", body_text(pos, neg));
                }
                let _ = writeln!(out, ".");
            }
            GroundRule::WeightBody {
                head,
                lower,
                elements,
            } => {
                let head_text = head.as_ref().map_or("_".to_string(), &name);
                let elems = elements
                    .iter()
                    .map(|(id, positive, w)| {
                        if *positive {
                            format!("{} = {w}", name(id))
                        } else {
                            format!("not {} = {w}", name(id))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                let _ = writeln!(out, "#weight {head_text} {lower} [{elems}].");
            }
        }
    }
    out
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    source: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line,
            source: text,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, TextError> {
        Err(TextError {
            line: self.line,
            message: format!("{} (in `{}`)", message.into(), self.source.trim_end()),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TextError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        let w: Vec<char> = word.chars().collect();
        if self.chars[self.pos..].starts_with(&w) {
            self.pos += w.len();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64, TextError> {
        self.skip_ws();
        let start = self.pos;
        if self.chars.get(self.pos) == Some(&'-') {
            self.pos += 1;
        }
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.pos == start || (self.pos == start + 1 && self.chars[start] == '-') {
            return self.err("expected an integer");
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().or_else(|_| self.err("integer out of range"))
    }

    fn atom(&mut self) -> Result<GroundAtom, TextError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an atom");
        }
        let pred: String = self.chars[start..self.pos].iter().collect();
        let mut args = Vec::new();
        if self.eat('(') {
            loop {
                args.push(self.int()?);
                if self.eat(',') {
                    continue;
                }
                self.expect(')')?;
                break;
            }
        }
        Ok(GroundAtom { pred, args })
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// Parses the ground format back into a program. Every atom referenced by
/// a rule must appear in the `#atom` table, whose ids must be dense from 1
/// in order.
pub fn parse_text(text: &str) -> Result<GroundProgram, TextError> {
    let mut table = AtomTable::new();
    let mut facts = BTreeSet::new();
    let mut rules = Vec::new();

    let lookup = |table: &AtomTable, cur: &mut Cursor<'_>| -> Result<AtomId, TextError> {
        let atom = cur.atom()?;
        match table.lookup(&atom) {
            Some(id) => Ok(id),
            None => cur.err(format!("atom `{atom}` is not in the atom table")),
        }
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut cur = Cursor::new(line, lineno + 1);
        if cur.eat_word("#atom") {
            let id = cur.int()?;
            let atom = cur.atom()?;
            let interned = table.intern(atom);
            if interned.0 as i64 != id {
                return cur.err(format!(
                    "atom table ids must be dense and ordered (got {id}, expected {interned})"
                ));
            }
            continue;
        }
        if cur.eat_word("#fact") {
            let id = lookup(&table, &mut cur)?;
            cur.expect('.')?;
            facts.insert(id);
            continue;
        }
        if cur.eat_word("#choice") {
            let lower = cur.int()?;
            cur.expect('{')?;
            let mut heads = Vec::new();
            loop {
                heads.push(lookup(&table, &mut cur)?);
                if cur.eat(';') {
                    continue;
                }
                cur.expect('}')?;
                break;
            }
            let upper = cur.int()?;
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            if cur.eat(':') {
                cur.expect('-')?;
                parse_body(&table, &mut cur, &mut pos, &mut neg)?;
            }
            cur.expect('.')?;
            rules.push(GroundRule::Choice {
                lower,
                heads,
                upper,
                pos,
                neg,
            });
            continue;
        }
        if cur.eat_word("#weight") {
            let head = if cur.eat('_') {
                None
            } else {
                Some(lookup(&table, &mut cur)?)
            };
            let lower = cur.int()?;
            cur.expect('[')?;
            let mut elements = Vec::new();
            loop {
                let positive = !cur.eat_word("not ");
                let id = lookup(&table, &mut cur)?;
                cur.expect('=')?;
                let w = cur.int()?;
                elements.push((id, positive, w));
                if cur.eat(';') {
                    continue;
                }
                cur.expect(']')?;
                break;
            }
            cur.expect('.')?;
            rules.push(GroundRule::WeightBody {
                head,
                lower,
                elements,
            });
            continue;
        }
        // `:- body.` or `head :- body.`
        if cur.eat(':') {
            cur.expect('-')?;
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            if cur.peek() != Some('.') {
                parse_body(&table, &mut cur, &mut pos, &mut neg)?;
            }
            cur.expect('.')?;
            rules.push(GroundRule::Constraint { pos, neg });
            continue;
        }
        let head = lookup(&table, &mut cur)?;
        cur.expect(':')?;
        cur.expect('-')?;
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        parse_body(&table, &mut cur, &mut pos, &mut neg)?;
        cur.expect('.')?;
        if !cur.at_end() {
            return cur.err("trailing input after rule");
        }
        rules.push(GroundRule::Normal { head, pos, neg });
    }
    Ok(GroundProgram {
        atoms: table,
        rules,
        facts,
    })
}

fn parse_body(
    table: &AtomTable,
    cur: &mut Cursor<'_>,
    pos: &mut Vec<AtomId>,
    neg: &mut Vec<AtomId>,
) -> Result<(), TextError> {
    loop {
        if cur.eat_word("not ") {
            let atom = cur.atom()?;
            match table.lookup(&atom) {
                Some(id) => neg.push(id),
                None => return cur.err(format!("atom `{atom}` is not in the atom table")),
            }
        } else {
            let atom = cur.atom()?;
            match table.lookup(&atom) {
                Some(id) => pos.push(id),
                None => return cur.err(format!("atom `{atom}` is not in the atom table")),
            }
        }
        if cur.eat(',') {
            continue;
        }
        break;
    }
    pos.sort_unstable();
    pos.dedup();
    neg.sort_unstable();
    neg.dedup();
    Ok(())
}
