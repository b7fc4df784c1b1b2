//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := iff
//! iff     := imp ("<->" imp)*
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | quant | "(" formula ")" | atom
//! quant   := ("all" | "ex") ident ":" ("p" | "i") "." formula
//! atom    := ident "(" ident "," ident ")"
//! ```

use std::collections::HashMap;

use thiserror::Error;

use super::Formula;
use crate::relations::{RelationSymbol, Sort};

/// Parse and sort-checking errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown relation `{name}` at {pos}")]
    UnknownRelation { name: String, pos: usize },
    #[error("sort error in `{atom}`: {msg}")]
    Sort { atom: String, msg: String },
    #[error("unbound variable `{0}`")]
    Unbound(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        } else if text[i..].starts_with("<->") {
            i += 3;
            Tok::Iff
        } else if text[i..].starts_with("->") {
            i += 2;
            Tok::Implies
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                '~' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                _ => {
                    return Err(ParseError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg: msg.to_string() }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s != "all" && s != "ex" => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(&format!("expected {what}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(q) if q == "all" || q == "ex" => {
                self.bump();
                let var = self.ident("a variable after the quantifier")?;
                self.expect(Tok::Colon, "`:` after the bound variable")?;
                let sort = match self.peek().clone() {
                    Tok::Ident(s) if s == "p" => Sort::Point,
                    Tok::Ident(s) if s == "i" => Sort::Interval,
                    _ => return Err(self.err("expected sort `p` or `i`")),
                };
                self.bump();
                self.expect(Tok::Dot, "`.` after the sort")?;
                let body = self.formula()?;
                Ok(if q == "all" {
                    Formula::forall(&var, sort, body)
                } else {
                    Formula::exists(&var, sort, body)
                })
            }
            Tok::Ident(_) => {
                let pos = self.pos();
                let name = self.ident("a relation name")?;
                let rel: RelationSymbol = name
                    .parse()
                    .map_err(|_| ParseError::UnknownRelation { name: name.clone(), pos })?;
                self.expect(Tok::LParen, "`(` after the relation name")?;
                let lhs = self.ident("a variable")?;
                self.expect(Tok::Comma, "`,`")?;
                let rhs = self.ident("a variable")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::Atom { rel, lhs, rhs })
            }
            _ => Err(self.err("expected a formula")),
        }
    }
}

fn check_sorts(
    f: &Formula,
    scope: &mut Vec<(String, Sort)>,
    free: &mut HashMap<String, Sort>,
    declared: bool,
) -> Result<(), ParseError> {
    match f {
        Formula::Atom { rel, lhs, rhs } => {
            let (s1, s2) = rel.sorts();
            for (v, s) in [(lhs, s1), (rhs, s2)] {
                let known = scope
                    .iter()
                    .rev()
                    .find(|(n, _)| n == v)
                    .map(|(_, s)| *s)
                    .or_else(|| free.get(v).copied());
                match known {
                    Some(k) if k != s => {
                        return Err(ParseError::Sort {
                            atom: format!("{}({},{})", rel.name(), lhs, rhs),
                            msg: format!("`{v}` is a {k} but {} expects a {s} here", rel.name()),
                        })
                    }
                    Some(_) => {}
                    None if declared => return Err(ParseError::Unbound(v.clone())),
                    None => {
                        free.insert(v.clone(), s);
                    }
                }
            }
            if lhs == rhs && s1 != s2 {
                return Err(ParseError::Sort {
                    atom: format!("{}({},{})", rel.name(), lhs, rhs),
                    msg: format!("`{lhs}` cannot be both a {s1} and a {s2}"),
                });
            }
            Ok(())
        }
        Formula::Not(a) => check_sorts(a, scope, free, declared),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            check_sorts(a, scope, free, declared)?;
            check_sorts(b, scope, free, declared)
        }
        Formula::Forall { var, sort, body } | Formula::Exists { var, sort, body } => {
            scope.push((var.clone(), *sort));
            let r = check_sorts(body, scope, free, declared);
            scope.pop();
            r
        }
    }
}

fn parse_raw(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// Parses a formula, inferring sorts of free variables from their atoms.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let f = parse_raw(text)?;
    check_sorts(&f, &mut Vec::new(), &mut HashMap::new(), false)?;
    Ok(f)
}

/// Parses a formula whose free variables must all be declared.
pub fn parse_with_free(text: &str, free: &[(&str, Sort)]) -> Result<Formula, ParseError> {
    let f = parse_raw(text)?;
    let mut decl: HashMap<String, Sort> = free.iter().map(|(v, s)| (v.to_string(), *s)).collect();
    check_sorts(&f, &mut Vec::new(), &mut decl, true)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let f = parse("~ii24(x,y) & ex z:i. (ii24(x,z) & ii24(z,y))").unwrap();
        match f {
            Formula::And(_, b) => {
                assert!(matches!(*b, Formula::Exists { sort: Sort::Interval, .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
        let f = parse("all z:p. (ip2(x,z) <-> ip2(y,z))").unwrap();
        assert!(matches!(f, Formula::Forall { sort: Sort::Point, .. }));
    }

    #[test]
    fn sort_errors() {
        assert!(matches!(parse("ip2(x,x)"), Err(ParseError::Sort { .. })));
        assert!(matches!(parse("ip2(x,y) & ip2(y,x)"), Err(ParseError::Sort { .. })));
        assert!(matches!(parse("all z:p. ii44(z,x)"), Err(ParseError::Sort { .. })));
    }

    #[test]
    fn other_errors() {
        assert!(matches!(parse("ip9(x,y)"), Err(ParseError::UnknownRelation { .. })));
        assert!(matches!(parse("ip2(x,y"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("ip2(x,y) $"), Err(ParseError::Syntax { pos: 9, .. })));
        assert!(matches!(
            parse_with_free("ip2(x,z)", &[("x", Sort::Interval)]),
            Err(ParseError::Unbound(v)) if v == "z"
        ));
    }

    #[test]
    fn precedence_and_scope() {
        let f = parse("lt(a,b) | lt(b,a) & eqp(a,b)").unwrap();
        assert!(matches!(f, Formula::Or(..)));
        let f = parse("lt(a,b) -> lt(b,a) -> eqp(a,b)").unwrap();
        match f {
            Formula::Implies(_, r) => assert!(matches!(*r, Formula::Implies(..))),
            other => panic!("unexpected {other:?}"),
        }
        let f = parse("all z:p. lt(z,a) & lt(a,z)").unwrap();
        match f {
            Formula::Forall { body, .. } => assert!(matches!(*body, Formula::And(..))),
            other => panic!("unexpected {other:?}"),
        }
        let f = parse("~lt(a,b) & lt(b,a)").unwrap();
        assert!(matches!(f, Formula::And(..)));
        let f = parse("lt(a,b) <-> lt(b,a) -> eqp(a,b)").unwrap();
        assert!(matches!(f, Formula::Iff(..)));
    }
}
