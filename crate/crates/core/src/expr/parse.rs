//! Recursive-descent parser for the infix expression syntax.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' '2')*
//! primary := number | variable | func '(' expr (',' expr)? ')' | '(' expr ')'
//! ```
//!
//! A minus sign directly in front of a numeric literal (and not followed by
//! `^`) produces a signed constant leaf rather than a `neg` node.

use super::{BinaryOp, Expr, UnaryOp, Var};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    InvalidNumber(String),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownIdentifier(String),
    WrongArity { name: String, expected: usize, found: usize },
    UnsupportedExponent(String),
}

/// Syntax error at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}")?,
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number {s:?}")?,
            ParseErrorKind::UnexpectedToken(s) => write!(f, "unexpected {s:?}")?,
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input")?,
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier {s:?}")?,
            ParseErrorKind::WrongArity {
                name,
                expected,
                found,
            } => write!(f, "{name} takes {expected} argument(s), got {found}")?,
            ParseErrorKind::UnsupportedExponent(s) => {
                write!(f, "only ^2 is supported, got ^{s}")?
            }
        }
        write!(f, " at position {}", self.position)
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(_, s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
        }
    }
}

fn tokenize(input: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, i)),
            b'-' => out.push((Tok::Minus, i)),
            b'*' => out.push((Tok::Star, i)),
            b'/' => out.push((Tok::Slash, i)),
            b'^' => out.push((Tok::Caret, i)),
            b'(' => out.push((Tok::LParen, i)),
            b')' => out.push((Tok::RParen, i)),
            b',' => out.push((Tok::Comma, i)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &input[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::InvalidNumber(text.into()),
                    position: start,
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        kind: ParseErrorKind::InvalidNumber(text.into()),
                        position: start,
                    });
                }
                out.push((Tok::Num(value, text.into()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(input[start..i].into()), start));
                continue;
            }
            _ => {
                let ch = input[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedChar(ch),
                    position: i,
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            position: self.offset(),
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => self.err(ParseErrorKind::UnexpectedToken(t.text())),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Add,
                Some(Tok::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinaryOp::Mul,
                Some(Tok::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                if let Some(Tok::Num(v, _)) = self.peek_at(1) {
                    if self.peek_at(2) != Some(&Tok::Caret) {
                        let v = *v;
                        self.pos += 2;
                        return Ok(Expr::Const(-v));
                    }
                }
                self.pos += 1;
                Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Num(v, _)) if *v == 2.0 => {
                    self.pos += 1;
                    base = Expr::unary(UnaryOp::Square, base);
                }
                Some(t) => {
                    return Err(self.err(ParseErrorKind::UnsupportedExponent(t.text())));
                }
                None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some((tok, at)) = self.toks.get(self.pos).cloned() else {
            return Err(self.err(ParseErrorKind::UnexpectedEnd));
        };
        match tok {
            Tok::Num(v, _) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.call(&name, at)
                } else {
                    Var::from_name(&name).map(Expr::Var).ok_or(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        position: at,
                    })
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        enum Func {
            Unary(UnaryOp),
            Binary(BinaryOp),
        }
        let lower = name.to_ascii_lowercase();
        let func = match lower.as_str() {
            "exp" => Func::Unary(UnaryOp::Exp),
            "log" => Func::Unary(UnaryOp::Log),
            "sqrt" => Func::Unary(UnaryOp::Sqrt),
            "square" => Func::Unary(UnaryOp::Square),
            "sign" => Func::Unary(UnaryOp::Sign),
            "neg" => Func::Unary(UnaryOp::Neg),
            "max" => Func::Binary(BinaryOp::Max),
            "min" => Func::Binary(BinaryOp::Min),
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name.into()),
                    position: at,
                })
            }
        };
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            args.push(self.expr()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                args.push(self.expr()?);
            }
        }
        self.expect(Tok::RParen)?;
        let expected = match func {
            Func::Unary(_) => 1,
            Func::Binary(_) => 2,
        };
        if args.len() != expected {
            return Err(ParseError {
                kind: ParseErrorKind::WrongArity {
                    name: lower,
                    expected,
                    found: args.len(),
                },
                position: at,
            });
        }
        let mut args = args.into_iter();
        let a = args.next().unwrap();
        Ok(match func {
            Func::Unary(op) => Expr::unary(op, a),
            Func::Binary(op) => Expr::binary(op, a, args.next().unwrap()),
        })
    }
}

/// Parses infix text into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Expr {
        Expr::Const(v)
    }
    fn v(x: Var) -> Expr {
        Expr::Var(x)
    }

    #[test]
    fn table_row_structure() {
        let e = parse("-0.041*Dst - Ey").unwrap();
        let want = Expr::binary(
            BinaryOp::Sub,
            Expr::binary(BinaryOp::Mul, c(-0.041), v(Var::Dst)),
            v(Var::Ey),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn ddm4_structure() {
        let e = parse("min(-0.0443*Dst, (0.621+sqrt(Pdyn))*(-0.0443*Dst - Ey)) + 0.194").unwrap();
        let decay = Expr::binary(BinaryOp::Mul, c(-0.0443), v(Var::Dst));
        let want = Expr::binary(
            BinaryOp::Add,
            Expr::binary(
                BinaryOp::Min,
                decay.clone(),
                Expr::binary(
                    BinaryOp::Mul,
                    Expr::binary(
                        BinaryOp::Add,
                        c(0.621),
                        Expr::unary(UnaryOp::Sqrt, v(Var::Pdyn)),
                    ),
                    Expr::binary(BinaryOp::Sub, decay, v(Var::Ey)),
                ),
            ),
            c(0.194),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("Dst - Ey - PB").unwrap(),
            Expr::binary(
                BinaryOp::Sub,
                Expr::binary(BinaryOp::Sub, v(Var::Dst), v(Var::Ey)),
                v(Var::PB)
            )
        );
        assert_eq!(
            parse("Dst + Ey*PB").unwrap(),
            Expr::binary(
                BinaryOp::Add,
                v(Var::Dst),
                Expr::binary(BinaryOp::Mul, v(Var::Ey), v(Var::PB))
            )
        );
        assert_eq!(
            parse("-Ey*Dst").unwrap(),
            Expr::binary(
                BinaryOp::Mul,
                Expr::unary(UnaryOp::Neg, v(Var::Ey)),
                v(Var::Dst)
            )
        );
    }

    #[test]
    fn square_spellings() {
        let want = Expr::unary(UnaryOp::Square, v(Var::Ey));
        assert_eq!(parse("Ey^2").unwrap(), want);
        assert_eq!(parse("square(Ey)").unwrap(), want);
        // '^' binds tighter than unary minus
        assert_eq!(
            parse("-2^2").unwrap(),
            Expr::unary(UnaryOp::Neg, Expr::unary(UnaryOp::Square, c(2.0)))
        );
        assert!(matches!(
            parse("Ey^3").unwrap_err().kind,
            ParseErrorKind::UnsupportedExponent(_)
        ));
    }

    #[test]
    fn signed_literal_vs_negation() {
        assert_eq!(parse("-2").unwrap(), c(-2.0));
        assert_eq!(parse("-(2)").unwrap(), Expr::unary(UnaryOp::Neg, c(2.0)));
        assert_eq!(parse("1.5e-3").unwrap(), c(1.5e-3));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("max(Ey").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(e.position, 6);

        let e = parse("Dst + Foo").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("Foo".into()));
        assert_eq!(e.position, 6);

        let e = parse("Dst $ 2").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('$'));

        assert!(matches!(
            parse("max(Ey)").unwrap_err().kind,
            ParseErrorKind::WrongArity { expected: 2, found: 1, .. }
        ));
        assert!(matches!(
            parse("Dst Ey").unwrap_err().kind,
            ParseErrorKind::UnexpectedToken(_)
        ));
        assert!(parse("").is_err());
        assert!(parse("1..2").is_err());
    }
}
