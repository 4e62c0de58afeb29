//! AST of the rule language: domain declarations, facts, normal rules,
//! choice rules with bounds and expansion guards, integrity constraints,
//! and rules with a cardinality or sum body.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Int(i64),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Abs(Box<Term>),
}

impl Term {
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Int(_) => {}
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Term::Abs(a) => a.vars(out),
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut vs = BTreeSet::new();
        self.vars(&mut vs);
        vs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        for a in &self.args {
            a.vars(out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    Builtin { rel: Rel, lhs: Term, rhs: Term },
}

impl Literal {
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a.vars(out),
            Literal::Builtin { lhs, rhs, .. } => {
                lhs.vars(out);
                rhs.vars(out);
            }
        }
    }
}

/// `atom : guard1 : guard2` inside a choice rule's braces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceElement {
    pub atom: Atom,
    pub guards: Vec<Atom>,
}

/// `[not] atom : guards = weight` inside an aggregate body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedElement {
    pub positive: bool,
    pub atom: Atom,
    pub guards: Vec<Atom>,
    pub weight: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggKind {
    Count,
    Sum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `d(1..8).`
    DomainDecl { pred: String, low: i64, high: i64 },
    /// `p(1,2).`
    Fact(Atom),
    /// `head :- body.`
    Normal { head: Atom, body: Vec<Literal> },
    /// `l { elements } u :- body.` with optional bounds.
    Choice {
        lower: Option<i64>,
        elements: Vec<ChoiceElement>,
        upper: Option<i64>,
        body: Vec<Literal>,
    },
    /// `:- body.`
    Constraint { body: Vec<Literal> },
    /// `head :- lower #count { elements }, body.` (head optional; at most
    /// one aggregate per rule, weights only for `#sum`).
    Aggregate {
        head: Option<Atom>,
        kind: AggKind,
        lower: i64,
        elements: Vec<WeightedElement>,
        body: Vec<Literal>,
    },
}

/// A parsed, validated program: strongly range restricted, arities
/// consistent, expansion guards are domain predicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleProgram {
    rules: Vec<Rule>,
    arities: BTreeMap<String, usize>,
    domain_preds: BTreeSet<String>,
}

impl RuleProgram {
    pub(crate) fn new(
        rules: Vec<Rule>,
        arities: BTreeMap<String, usize>,
        domain_preds: BTreeSet<String>,
    ) -> Self {
        RuleProgram {
            rules,
            arities,
            domain_preds,
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.arities.get(pred).copied()
    }

    pub fn arities(&self) -> &BTreeMap<String, usize> {
        &self.arities
    }

    /// Predicates defined only by facts and interval declarations.
    pub fn domain_preds(&self) -> &BTreeSet<String> {
        &self.domain_preds
    }

    pub fn is_domain_pred(&self, pred: &str) -> bool {
        self.domain_preds.contains(pred)
    }
}

// ---------------------------------------------------------------------------
// Rendering. `parse(render(p))` is structurally identical to `p`.

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Sub(a, b) => write!(f, "({a} - {b})"),
            Term::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "not {a}"),
            Literal::Builtin { rel, lhs, rhs } => {
                write!(f, "{} {} {}", lhs, rel.symbol(), rhs)
            }
        }
    }
}

impl fmt::Display for ChoiceElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)?;
        for g in &self.guards {
            write!(f, " : {g}")?;
        }
        Ok(())
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, body: &[Literal], lead: bool) -> fmt::Result {
    for (i, l) in body.iter().enumerate() {
        if i > 0 || lead {
            write!(f, ", ")?;
        }
        write!(f, "{l}")?;
    }
    Ok(())
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::DomainDecl { pred, low, high } => write!(f, "{pred}({low}..{high})."),
            Rule::Fact(a) => write!(f, "{a}."),
            Rule::Normal { head, body } => {
                write!(f, "{head} :- ")?;
                write_body(f, body, false)?;
                write!(f, ".")
            }
            Rule::Choice {
                lower,
                elements,
                upper,
                body,
            } => {
                if let Some(l) = lower {
                    write!(f, "{l} ")?;
                }
                write!(f, "{{")?;
                for (i, e) in elements.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")?;
                if let Some(u) = upper {
                    write!(f, " {u}")?;
                }
                if !body.is_empty() {
                    write!(f, " :- ")?;
                    write_body(f, body, false)?;
                }
                write!(f, ".")
            }
            Rule::Constraint { body } => {
                write!(f, ":- ")?;
                write_body(f, body, false)?;
                write!(f, ".")
            }
            Rule::Aggregate {
                head,
                kind,
                lower,
                elements,
                body,
            } => {
                if let Some(h) = head {
                    write!(f, "{h} ")?;
                }
                write!(f, ":- {lower} ")?;
                match kind {
                    AggKind::Count => write!(f, "#count {{")?,
                    AggKind::Sum => write!(f, "#sum {{")?,
                }
                for (i, e) in elements.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    if !e.positive {
                        write!(f, "not ")?;
                    }
                    write!(f, "{}", e.atom)?;
                    for g in &e.guards {
                        write!(f, " : {g}")?;
                    }
                    if matches!(kind, AggKind::Sum) {
                        write!(f, " = {}", e.weight)?;
                    }
                }
                write!(f, "}}")?;
                write_body(f, body, true)?;
                write!(f, ".")
            }
        }
    }
}

impl fmt::Display for RuleProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Renders a program to its canonical text form.
pub fn render(program: &RuleProgram) -> String {
    program.to_string()
}
