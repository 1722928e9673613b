//! Recursive-descent parser for the infix expression grammar.
//!
//! Precedence, tightest first: `^`, unary minus, `* /`, `+ -`; operators of
//! equal precedence associate left. A leading minus on a numeric literal is
//! folded into the constant so that printed trees re-parse structurally
//! identical.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{BinOp, Expression, UnaryOp};

/// Syntax error with the byte offset where parsing failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at offset {}: {}", self.offset, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                break;
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(start),
                other => {
                    return Err(ParseError {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
        Ok(out)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. `2*e` would be an ident);
                // back off and let the literal end before the `e`.
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError {
            offset: start,
            message: format!("invalid numeric literal `{text}`"),
        })
    }

    fn ident(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Tok::Ident(text.to_string())
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

pub(super) fn parse(text: &str) -> Result<Expression, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            message: "empty input".to_string(),
        });
    }
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let e = p.sum()?;
    if let Some((_, off)) = p.peek() {
        return Err(ParseError {
            offset: off,
            message: "unexpected trailing input".to_string(),
        });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<(&Tok, usize)> {
        self.toks.get(self.idx).map(|(t, o)| (t, *o))
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|(_, o)| o).unwrap_or(self.end)
    }

    fn expect_operand_err(&self) -> ParseError {
        ParseError {
            offset: self.here(),
            message: "expected an operand".to_string(),
        }
    }

    fn sum(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.product()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.product()?;
            lhs = Expression::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.next();
            let inner = self.unary()?;
            return Ok(negate(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.atom()?;
        while let Some((Tok::Caret, _)) = self.peek() {
            self.next();
            let rhs = self.exponent()?;
            lhs = Expression::Binary(BinOp::Pow, Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    /// Exponent position: allow a leading unary minus (`x^-2`) even though
    /// `^` binds tighter than unary minus elsewhere.
    fn exponent(&mut self) -> Result<Expression, ParseError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.next();
            let inner = self.exponent()?;
            return Ok(negate(inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let (tok, off) = match self.next() {
            Some(t) => t,
            None => return Err(self.expect_operand_err()),
        };
        match tok {
            Tok::Num(v) => Ok(Expression::Const(v)),
            Tok::Ident(name) => {
                if let Some((Tok::LParen, _)) = self.peek() {
                    let op = UnaryOp::from_name(&name).ok_or_else(|| ParseError {
                        offset: off,
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.next(); // consume '('
                    let arg = self.sum()?;
                    self.close_paren()?;
                    Ok(Expression::Unary(op, Arc::new(arg)))
                } else if name == "pi" {
                    Ok(Expression::Const(core::f64::consts::PI))
                } else {
                    Ok(Expression::Var(name))
                }
            }
            Tok::LParen => {
                let e = self.sum()?;
                self.close_paren()?;
                Ok(e)
            }
            _ => Err(ParseError {
                offset: off,
                message: "expected an operand".to_string(),
            }),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        match self.next() {
            Some((Tok::RParen, _)) => Ok(()),
            Some((_, off)) => Err(ParseError {
                offset: off,
                message: "expected `)`".to_string(),
            }),
            None => Err(ParseError {
                offset: self.end,
                message: "expected `)`".to_string(),
            }),
        }
    }
}

/// Unary minus from the grammar. A minus applied directly to a numeric
/// literal folds into the constant, so printed negative constants re-parse
/// to the same node.
fn negate(e: Expression) -> Expression {
    match e {
        Expression::Const(c) => Expression::Const(-c),
        other => Expression::Unary(UnaryOp::Neg, Arc::new(other)),
    }
}
