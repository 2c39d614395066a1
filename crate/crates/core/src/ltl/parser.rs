//! Recursive-descent parser for the co-safe LTL text grammar.
//!
//! Precedence from tightest to loosest: `!`/`F`, `U` (right associative),
//! `&`, `|`.

use std::collections::BTreeSet;

use super::{Formula, LtlError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    Not,
    And,
    Or,
    Until,
    Eventually,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, LtlError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let simple = match c {
            '!' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, line: tl, col: tc });
            col += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "F" => Tok::Eventually,
                "U" => Tok::Until,
                "true" => Tok::True,
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        return Err(LtlError::Syntax { line: tl, col: tc, message: format!("unexpected character '{c}'") });
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    known: Option<&'a BTreeSet<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> LtlError {
        let t = self.peek();
        LtlError::Syntax { line: t.line, col: t.col, message: message.into() }
    }

    fn or(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.and()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.until()?;
        while self.peek().tok == Tok::And {
            self.bump();
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if self.peek().tok == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        match self.peek().tok {
            Tok::Not => {
                let at = self.bump();
                match self.unary()? {
                    Formula::Atom(name) => Ok(Formula::Not(name)),
                    _ => Err(LtlError::NegatedCompound { line: at.line, col: at.col }),
                }
            }
            Tok::Eventually => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, LtlError> {
        let t = self.bump();
        match t.tok {
            Tok::True => Ok(Formula::True),
            Tok::Ident(name) => {
                if let Some(known) = self.known {
                    if !known.contains(&name) {
                        return Err(LtlError::UnknownAtom { name, line: t.line, col: t.col });
                    }
                }
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                let inner = self.or()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error("expected ')'"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(LtlError::Syntax { line: t.line, col: t.col, message: "unexpected end of input".into() }),
            other => Err(LtlError::Syntax {
                line: t.line,
                col: t.col,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parses co-safe LTL text without checking atom names.
pub fn parse_cosafe_ltl(text: &str) -> Result<Formula, LtlError> {
    parse_inner(text, None)
}

/// Parses co-safe LTL text, rejecting atoms not in `known`.
pub fn parse_cosafe_ltl_with_atoms(text: &str, known: &BTreeSet<String>) -> Result<Formula, LtlError> {
    parse_inner(text, Some(known))
}

fn parse_inner(text: &str, known: Option<&BTreeSet<String>>) -> Result<Formula, LtlError> {
    let mut p = Parser { tokens: lex(text)?, pos: 0, known };
    let f = p.or()?;
    if p.peek().tok != Tok::End {
        return Err(p.error("trailing input"));
    }
    Ok(f)
}
