//! Recursive-descent parser for the concrete LTL syntax.
//!
//! Binding strength, loosest first: `U` (right associative), `->` (right
//! associative), `|`, `&`, then the prefix operators `!`, `X`, `F`, `G`.
//! Identifiers match `[a-zA-Z_][a-zA-Z0-9_]*`; the words `X`, `U`, `F`,
//! `G`, `true` and `false` are reserved.

use super::LtlFormula;
use crate::error::RvError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Bang,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    NextKw,
    UntilKw,
    FinallyKw,
    GloballyKw,
    TrueKw,
    FalseKw,
    Ident(String),
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Bang => "'!'".into(),
        Tok::Amp => "'&'".into(),
        Tok::Pipe => "'|'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::NextKw => "'X'".into(),
        Tok::UntilKw => "'U'".into(),
        Tok::FinallyKw => "'F'".into(),
        Tok::GloballyKw => "'G'".into(),
        Tok::TrueKw => "'true'".into(),
        Tok::FalseKw => "'false'".into(),
        Tok::Ident(name) => format!("identifier '{name}'"),
    }
}

fn parse_err(pos: usize, msg: impl Into<String>) -> RvError {
    RvError::Parse { pos, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, RvError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            _ if c.is_ascii_whitespace() => i += 1,
            '!' => {
                toks.push((Tok::Bang, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, i));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(parse_err(i, "expected '->'"));
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "X" => Tok::NextKw,
                    "U" => Tok::UntilKw,
                    "F" => Tok::FinallyKw,
                    "G" => Tok::GloballyKw,
                    "true" => Tok::TrueKw,
                    "false" => Tok::FalseKw,
                    _ => Tok::Ident(word.to_owned()),
                };
                toks.push((tok, start));
            }
            other => return Err(parse_err(i, format!("unexpected character '{other}'"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(tok, _)| tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |&(_, pos)| pos)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn until(&mut self) -> Result<LtlFormula, RvError> {
        let lhs = self.implies()?;
        if self.eat(&Tok::UntilKw) {
            let rhs = self.until()?;
            Ok(LtlFormula::until(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn implies(&mut self) -> Result<LtlFormula, RvError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            Ok(LtlFormula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<LtlFormula, RvError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            lhs = LtlFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<LtlFormula, RvError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = LtlFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<LtlFormula, RvError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.at += 1;
                Ok(LtlFormula::negate(self.unary()?))
            }
            Some(Tok::NextKw) => {
                self.at += 1;
                Ok(LtlFormula::next(self.unary()?))
            }
            Some(Tok::FinallyKw) => {
                self.at += 1;
                Ok(LtlFormula::eventually(self.unary()?))
            }
            Some(Tok::GloballyKw) => {
                self.at += 1;
                Ok(LtlFormula::always(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<LtlFormula, RvError> {
        let pos = self.pos();
        match self.toks.get(self.at).map(|(tok, _)| tok.clone()) {
            Some(Tok::TrueKw) => {
                self.at += 1;
                Ok(LtlFormula::True)
            }
            Some(Tok::FalseKw) => {
                self.at += 1;
                Ok(LtlFormula::ff())
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                Ok(LtlFormula::Prop(name))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.until()?;
                if self.eat(&Tok::RParen) {
                    Ok(inner)
                } else {
                    Err(parse_err(self.pos(), "expected ')'"))
                }
            }
            Some(other) => Err(parse_err(pos, format!("unexpected {}", describe(&other)))),
            None => Err(parse_err(pos, "unexpected end of formula")),
        }
    }
}

/// Parses the concrete LTL syntax into a normalized core-grammar formula.
pub fn parse_ltl(text: &str) -> Result<LtlFormula, RvError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(parse_err(0, "empty formula"));
    }
    let mut parser = Parser { toks, at: 0, end: text.len() };
    let formula = parser.until()?;
    if let Some(tok) = parser.peek() {
        let msg = format!("unexpected {} after formula", describe(tok));
        return Err(parse_err(parser.pos(), msg));
    }
    Ok(formula)
}
