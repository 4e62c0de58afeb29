//! Tokenizer. Total over arbitrary byte sequences: every failure is a
//! positioned diagnostic, never a panic.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Dot,
    DotDot,
    Comma,
    Semi,
    Colon,
    ColonDash,
    Lt,
    Le,
    Gt,
    Ge,
    EqTok,
    Ne,
    Plus,
    Minus,
    Not,
    Abs,
    HashCount,
    HashSum,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Var(s) => return write!(f, "variable `{s}`"),
            Tok::Int(i) => return write!(f, "integer `{i}`"),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Dot => "`.`",
            Tok::DotDot => "`..`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::ColonDash => "`:-`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::EqTok => "`=`",
            Tok::Ne => "`!=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Not => "`not`",
            Tok::Abs => "`abs`",
            Tok::HashCount => "`#count`",
            Tok::HashSum => "`#sum`",
            Tok::Eof => "end of input",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub fn lex(source: &str) -> Result<Vec<Spanned>, LexError> {
    let chars: Vec<char> = source.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;

    let err = |line: usize, col: usize, message: String| LexError { line, col, message };

    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| {
            toks.push(Spanned {
                tok,
                line: tline,
                col: tcol,
            })
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '{' => push(Tok::LBrace),
            '}' => push(Tok::RBrace),
            ',' => push(Tok::Comma),
            ';' => push(Tok::Semi),
            '+' => push(Tok::Plus),
            '-' => push(Tok::Minus),
            '=' => push(Tok::EqTok),
            '.' => {
                if i + 1 < chars.len() && chars[i + 1] == '.' {
                    push(Tok::DotDot);
                    i += 2;
                    col += 2;
                    continue;
                }
                push(Tok::Dot);
            }
            ':' => {
                if i + 1 < chars.len() && chars[i + 1] == '-' {
                    push(Tok::ColonDash);
                    i += 2;
                    col += 2;
                    continue;
                }
                push(Tok::Colon);
            }
            '<' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push(Tok::Le);
                    i += 2;
                    col += 2;
                    continue;
                }
                push(Tok::Lt);
            }
            '>' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push(Tok::Ge);
                    i += 2;
                    col += 2;
                    continue;
                }
                push(Tok::Gt);
            }
            '!' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push(Tok::Ne);
                    i += 2;
                    col += 2;
                    continue;
                }
                return Err(err(line, col, "`!` must be followed by `=`".into()));
            }
            '#' => {
                let rest: String = chars[i + 1..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphabetic())
                    .collect();
                match rest.as_str() {
                    "count" => {
                        push(Tok::HashCount);
                        i += 6;
                        col += 6;
                        continue;
                    }
                    "sum" => {
                        push(Tok::HashSum);
                        i += 4;
                        col += 4;
                        continue;
                    }
                    other => {
                        return Err(err(
                            line,
                            col,
                            format!("unknown directive `#{other}` (expected #count or #sum)"),
                        ))
                    }
                }
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let value: i64 = text
                    .parse()
                    .map_err(|_| err(line, col, format!("integer `{text}` out of range")))?;
                push(Tok::Int(value));
                col += j - i;
                i = j;
                continue;
            }
            a if a.is_ascii_lowercase() => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_')
                {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                match text.as_str() {
                    "not" => push(Tok::Not),
                    "abs" => push(Tok::Abs),
                    _ => push(Tok::Ident(text.clone())),
                }
                col += j - i;
                i = j;
                continue;
            }
            a if a.is_ascii_uppercase() => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_')
                {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                push(Tok::Var(text));
                col += j - i;
                i = j;
                continue;
            }
            other => {
                return Err(err(line, col, format!("unexpected character `{other}`")));
            }
        }
        i += 1;
        col += 1;
    }
    toks.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(toks)
}
