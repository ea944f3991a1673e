//! Expression parser for algebra elements.
//!
//! Grammar, whitespace insensitive:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | postfix
//! postfix := atom ('^' '-' '1')*
//! atom    := INT ('/' INT)? | 'i' | IDENT | '(' expr ')' | 'star' '(' expr ')'
//! ```
//!
//! `i` is the imaginary unit and `star` the adjoint, unless the automaton
//! defines a state of that name, which then wins. `^-1` inverts a single
//! monomial; sums have no inverse here. Positions in errors are 0-based byte
//! offsets into the input.

use crate::algebra::AlgebraElement;
use crate::automaton::Automaton;
use crate::scalar::GaussianRational;
use crate::words::{Letter, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {position} (line {line}, column {column}): {message}")]
    Syntax {
        position: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown generator `{name}` at position {position}")]
    UnknownGenerator { position: usize, name: String },
}

pub fn parse_expression(aut: &Automaton, text: &str) -> Result<AlgebraElement, ExprError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        aut,
        text,
        tokens,
        pos: 0,
    };
    let value = p.expr()?;
    match p.peek() {
        None => Ok(value),
        Some(tok) => Err(p.syntax(tok.start, "unexpected trailing input")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    kind: TokKind,
    start: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let b = bytes[k];
        let start = k;
        let kind = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                k += 1;
                continue;
            }
            b'+' => TokKind::Plus,
            b'-' => TokKind::Minus,
            b'*' => TokKind::Star,
            b'/' => TokKind::Slash,
            b'^' => TokKind::Caret,
            b'(' => TokKind::LParen,
            b')' => TokKind::RParen,
            b'0'..=b'9' => {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                let digits = &text[start..k];
                out.push(Token {
                    kind: TokKind::Int(digits.parse().expect("ascii digits")),
                    start,
                });
                continue;
            }
            _ if ident_start(b) => {
                while k < bytes.len() && ident_continue(bytes[k]) {
                    k += 1;
                }
                out.push(Token {
                    kind: TokKind::Ident(text[start..k].to_string()),
                    start,
                });
                continue;
            }
            _ => {
                return Err(syntax_at(
                    text,
                    start,
                    &format!("unexpected character `{}`", &text[start..][..1]),
                ))
            }
        };
        out.push(Token { kind, start });
        k += 1;
    }
    Ok(out)
}

fn ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'~'
}

fn syntax_at(text: &str, position: usize, message: &str) -> ExprError {
    let prefix = &text[..position.min(text.len())];
    let line = prefix.bytes().filter(|&b| b == b'\n').count() + 1;
    let column = position - prefix.rfind('\n').map_or(0, |k| k + 1) + 1;
    ExprError::Syntax {
        position,
        line,
        column,
        message: message.to_string(),
    }
}

struct Parser<'a> {
    aut: &'a Automaton,
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.text.len(), |t| t.start)
    }

    fn syntax(&self, position: usize, message: &str) -> ExprError {
        syntax_at(self.text, position, message)
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> Result<Token, ExprError> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.bump().unwrap()),
            _ => Err(self.syntax(self.here(), &format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<AlgebraElement, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().map(|t| t.kind.clone()) {
                Some(TokKind::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?, self.aut);
                }
                Some(TokKind::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?, self.aut);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<AlgebraElement, ExprError> {
        let mut acc = self.factor()?;
        while self.peek().map(|t| &t.kind) == Some(&TokKind::Star) {
            self.bump();
            acc = acc.mul(&self.factor()?, self.aut);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<AlgebraElement, ExprError> {
        if self.peek().map(|t| &t.kind) == Some(&TokKind::Minus) {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<AlgebraElement, ExprError> {
        let mut value = self.atom()?;
        while self.peek().map(|t| &t.kind) == Some(&TokKind::Caret) {
            let caret = self.bump().unwrap();
            self.expect(TokKind::Minus, "`-1` after `^`")?;
            match self.peek() {
                Some(Token {
                    kind: TokKind::Int(n),
                    ..
                }) if *n == BigInt::from(1) => {
                    self.bump();
                }
                _ => return Err(self.syntax(self.here(), "expected `-1` after `^`")),
            }
            value = self.invert(value, caret.start)?;
        }
        Ok(value)
    }

    fn invert(&self, value: AlgebraElement, at: usize) -> Result<AlgebraElement, ExprError> {
        let terms = value.terms();
        if terms.len() != 1 {
            let what = if terms.is_empty() { "zero" } else { "a sum" };
            return Err(self.syntax(at, &format!("cannot invert {what}; `^-1` needs a single scaled word")));
        }
        let (w, c) = &terms[0];
        let cinv = c.inv().expect("nonzero by the term invariant");
        Ok(AlgebraElement::monomial(cinv, w.inverse()))
    }

    fn atom(&mut self) -> Result<AlgebraElement, ExprError> {
        let tok = match self.bump() {
            Some(t) => t,
            None => return Err(self.syntax(self.text.len(), "expected an operand, found end of input")),
        };
        match tok.kind {
            TokKind::Int(num) => {
                if self.peek().map(|t| &t.kind) == Some(&TokKind::Slash) {
                    self.bump();
                    let den_pos = self.here();
                    match self.bump() {
                        Some(Token {
                            kind: TokKind::Int(den),
                            ..
                        }) => {
                            if den.is_zero() {
                                return Err(self.syntax(den_pos, "zero denominator"));
                            }
                            Ok(AlgebraElement::scalar(GaussianRational::from_rational(
                                BigRational::new(num, den),
                            )))
                        }
                        _ => Err(self.syntax(den_pos, "expected an integer denominator")),
                    }
                } else {
                    Ok(AlgebraElement::scalar(GaussianRational::from_rational(
                        BigRational::from_integer(num),
                    )))
                }
            }
            TokKind::Ident(name) => {
                if let Some(id) = self.aut.state_id(&name) {
                    return Ok(AlgebraElement::from_word(Word::from_letters([
                        Letter::new(id, false),
                    ])));
                }
                match name.as_str() {
                    "i" => Ok(AlgebraElement::scalar(GaussianRational::i())),
                    "star" => {
                        self.expect(TokKind::LParen, "`(` after `star`")?;
                        let inner = self.expr()?;
                        self.expect(TokKind::RParen, "`)`")?;
                        Ok(inner.star())
                    }
                    _ => Err(ExprError::UnknownGenerator {
                        position: tok.start,
                        name,
                    }),
                }
            }
            TokKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokKind::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.syntax(tok.start, "expected an operand")),
        }
    }
}
