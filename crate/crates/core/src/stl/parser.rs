//! Text grammar for STL formulas.
//!
//! ```text
//! expr    ::= conj ('|' conj)*
//! conj    ::= unary ('&' unary)*
//! unary   ::= 'TRUE'
//!           | ident                      (atom)
//!           | '!' ident                  (negated atom)
//!           | 'F' '[' int ',' int ']' unary
//!           | 'G' '[' int ',' int ']' unary
//!           | '(' expr ('U' '[' int ',' int ']' expr)? ')'
//! ```
//!
//! Whitespace is insignificant; `F`/`G` act as operators only when followed
//! by `[`. The canonical printer (`Display` for [`Formula`]) round-trips
//! through this grammar.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Formula, Predicate, Step, TimeInterval};

/// Map from atom names to their predicates.
pub type PredicateTable = BTreeMap<String, Predicate>;

#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    /// Lexical or grammatical error at a byte position in the input.
    Syntax { pos: usize, message: String },
    UnknownPredicate { pos: usize, name: String },
    BadInterval { pos: usize, a: Step, b: Step },
    /// Until-left breaks the Prenex restriction.
    PrenexViolation { pos: usize },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { pos, message } => write!(f, "syntax error at {}: {}", pos, message),
            ParseError::UnknownPredicate { pos, name } => {
                write!(f, "unknown predicate `{}` at {}", name, pos)
            }
            ParseError::BadInterval { pos, a, b } => {
                write!(f, "invalid interval [{},{}] at {}: need 0 <= a <= b", a, b, pos)
            }
            ParseError::PrenexViolation { pos } => write!(
                f,
                "until-left at {} may only contain always/conjunction over atoms",
                pos
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(i64),
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let start = self.pos;
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.pos += 1;
                    continue;
                }
                b'!' => out.push((start, Tok::Bang)),
                b'&' => out.push((start, Tok::Amp)),
                b'|' => out.push((start, Tok::Pipe)),
                b'(' => out.push((start, Tok::LParen)),
                b')' => out.push((start, Tok::RParen)),
                b'[' => out.push((start, Tok::LBracket)),
                b']' => out.push((start, Tok::RBracket)),
                b',' => out.push((start, Tok::Comma)),
                b'0'..=b'9' => {
                    let mut end = self.pos;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    let text = core::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    let n = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                        pos: start,
                        message: "integer out of range".to_owned(),
                    })?;
                    out.push((start, Tok::Number(n)));
                    self.pos = end;
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let text = core::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    out.push((start, Tok::Ident(text.to_owned())));
                    self.pos = end;
                    continue;
                }
                other => {
                    return Err(ParseError::Syntax {
                        pos: start,
                        message: format_char_error(other),
                    })
                }
            }
            self.pos += 1;
        }
        Ok(out)
    }
}

fn format_char_error(c: u8) -> String {
    let mut s = String::from("unexpected character `");
    s.push(c as char);
    s.push('`');
    s
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    table: &'a PredicateTable,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(ParseError::Syntax {
                pos: self.toks.get(self.idx.saturating_sub(1)).map(|(p, _)| *p).unwrap_or(self.end),
                message: alloc::format!("expected {}", what),
            }),
        }
    }

    fn parse_expr(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.parse_conj()?;
        while matches!(self.peek(), Some(Tok::Pipe)) {
            self.bump();
            let r = self.parse_conj()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn parse_conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.parse_unary()?;
        while matches!(self.peek(), Some(Tok::Amp)) {
            self.bump();
            let r = self.parse_unary()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn parse_interval(&mut self) -> Result<TimeInterval, ParseError> {
        let pos = self.pos();
        self.expect(Tok::LBracket, "`[`")?;
        let a = match self.bump() {
            Some(Tok::Number(n)) => n,
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    message: "expected interval start".to_owned(),
                })
            }
        };
        self.expect(Tok::Comma, "`,`")?;
        let b = match self.bump() {
            Some(Tok::Number(n)) => n,
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    message: "expected interval end".to_owned(),
                })
            }
        };
        self.expect(Tok::RBracket, "`]`")?;
        TimeInterval::new(a, b).map_err(|_| ParseError::BadInterval { pos, a, b })
    }

    fn lookup(&self, name: &str, pos: usize) -> Result<Predicate, ParseError> {
        self.table
            .get(name)
            .cloned()
            .ok_or_else(|| ParseError::UnknownPredicate {
                pos,
                name: name.to_owned(),
            })
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(name)) => {
                if name == "TRUE" {
                    return Ok(Formula::True);
                }
                // F / G act as operators only when directly followed by `[`.
                if (name == "F" || name == "G") && matches!(self.peek(), Some(Tok::LBracket)) {
                    let interval = self.parse_interval()?;
                    let child = self.parse_unary()?;
                    return Ok(if name == "F" {
                        Formula::eventually(interval, child)
                    } else {
                        Formula::always(interval, child)
                    });
                }
                Ok(Formula::Atom(self.lookup(&name, pos)?))
            }
            Some(Tok::Bang) => match self.bump() {
                Some(Tok::Ident(name)) => Ok(Formula::NegAtom(self.lookup(&name, pos)?)),
                _ => Err(ParseError::Syntax {
                    pos,
                    message: "`!` must be followed by a predicate name".to_owned(),
                }),
            },
            Some(Tok::LParen) => {
                let left = self.parse_expr()?;
                match self.peek() {
                    Some(Tok::Ident(u)) if u == "U" => {
                        let upos = self.pos();
                        self.bump();
                        let interval = self.parse_interval()?;
                        let right = self.parse_expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        if left.contains_eventually_or_until_pub() {
                            return Err(ParseError::PrenexViolation { pos: upos });
                        }
                        Ok(Formula::until(interval, left, right))
                    }
                    _ => {
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(left)
                    }
                }
            }
            _ => Err(ParseError::Syntax {
                pos,
                message: "expected formula".to_owned(),
            }),
        }
    }
}

impl Formula {
    fn contains_eventually_or_until_pub(&self) -> bool {
        match self {
            Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => false,
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.contains_eventually_or_until_pub() || r.contains_eventually_or_until_pub()
            }
            Formula::Always(_, f) => f.contains_eventually_or_until_pub(),
            Formula::Eventually(_, _) | Formula::Until(_, _, _) => true,
        }
    }
}

/// Parses `text` against the grammar, resolving atom names in `table`.
pub fn parse_formula(text: &str, table: &PredicateTable) -> Result<Formula, ParseError> {
    let toks = Lexer {
        src: text.as_bytes(),
        pos: 0,
    }
    .tokens()?;
    let end = text.len();
    let mut p = Parser {
        toks,
        idx: 0,
        table,
        end,
    };
    let f = p.parse_expr()?;
    if p.idx != p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            message: "trailing input".to_owned(),
        });
    }
    Ok(f)
}

// Canonical printer. Binary operators print left-associatively; a
// right-nested operator of the same level is parenthesized so the printed
// form re-parses to the identical tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_or(self, f)
    }
}

fn fmt_or(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::Or(l, r) => {
            fmt_or(l, f)?;
            write!(f, " | ")?;
            fmt_and(r, f)
        }
        _ => fmt_and(formula, f),
    }
}

fn fmt_and(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::And(l, r) => {
            fmt_and(l, f)?;
            write!(f, " & ")?;
            fmt_unary(r, f)
        }
        Formula::Or(_, _) => {
            write!(f, "(")?;
            fmt_or(formula, f)?;
            write!(f, ")")
        }
        _ => fmt_unary(formula, f),
    }
}

fn fmt_unary(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::True => write!(f, "TRUE"),
        Formula::Atom(p) => write!(f, "{}", p.name),
        Formula::NegAtom(p) => write!(f, "!{}", p.name),
        Formula::Eventually(i, c) => {
            write!(f, "F{}", i)?;
            fmt_unary(c, f)
        }
        Formula::Always(i, c) => {
            write!(f, "G{}", i)?;
            fmt_unary(c, f)
        }
        Formula::Until(i, l, r) => {
            write!(f, "(")?;
            fmt_or(l, f)?;
            write!(f, " U{} ", i)?;
            fmt_or(r, f)?;
            write!(f, ")")
        }
        Formula::And(_, _) | Formula::Or(_, _) => {
            write!(f, "(")?;
            fmt_or(formula, f)?;
            write!(f, ")")
        }
    }
}
