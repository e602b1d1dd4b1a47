//! Lexer and recursive-descent parser for the textual formula syntax shared by
//! scalar coefficients, parameter bindings, bracket right-hand sides and
//! coproduct trees.
//!
//! The parser produces an untyped [`RawExpr`]; callers lower it into
//! [`crate::scalars::ScalarExpr`] or [`crate::ncpoly::ExprTree`].
//!
//! Precedence, loosest first: `+ -`, the tensor separator `o`, `* /`,
//! unary minus, `^`.

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("unexpected character '{ch}' at offset {pos} in \"{src}\"")]
    BadChar { ch: char, pos: usize, src: String },
    #[error("unexpected {found} at offset {pos} in \"{src}\" (expected {expected})")]
    Unexpected {
        found: String,
        expected: &'static str,
        pos: usize,
        src: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::End => "end of input".to_string(),
        }
    }
}

/// Untyped syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub enum RawExpr {
    Int(BigInt),
    Ident(String),
    Call(String, Vec<RawExpr>),
    Neg(Box<RawExpr>),
    Add(Box<RawExpr>, Box<RawExpr>),
    Sub(Box<RawExpr>, Box<RawExpr>),
    Mul(Box<RawExpr>, Box<RawExpr>),
    Div(Box<RawExpr>, Box<RawExpr>),
    Pow(Box<RawExpr>, Box<RawExpr>),
    Tensor(Box<RawExpr>, Box<RawExpr>),
}

impl RawExpr {
    /// Interprets the node as a signed integer literal (used for exponents).
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            RawExpr::Int(n) => i64::try_from(n.clone()).ok(),
            RawExpr::Neg(inner) => inner.as_integer().map(|v| -v),
            _ => None,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '√'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().map(|(_, c)| *c).collect();
            let n: BigInt = digits.parse().expect("digit run parses");
            out.push((Tok::Int(n), pos));
        } else if is_ident_start(c) {
            let start = i;
            i += 1;
            while i < chars.len() && is_ident_continue(chars[i].1) {
                i += 1;
            }
            let word: String = chars[start..i].iter().map(|(_, c)| *c).collect();
            out.push((Tok::Ident(word), pos));
        } else if "+-*/^()[];,".contains(c) || c == '−' || c == '⊗' || c == '·' {
            let op = match c {
                '−' => '-',
                '⊗' => 'o',
                '·' => '*',
                other => other,
            };
            if op == 'o' {
                out.push((Tok::Ident("o".to_string()), pos));
            } else {
                out.push((Tok::Op(op), pos));
            }
            i += 1;
        } else {
            return Err(SyntaxError::BadChar {
                ch: c,
                pos,
                src: src.to_string(),
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &'static str) -> SyntaxError {
        let (tok, pos) = &self.toks[self.at];
        SyntaxError::Unexpected {
            found: tok.describe(),
            expected,
            pos: *pos,
            src: self.src.to_string(),
        }
    }

    fn expect_op(&mut self, op: char, expected: &'static str) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn is_tensor_sep(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "o")
    }

    fn sum(&mut self) -> Result<RawExpr, SyntaxError> {
        let mut lhs = self.tensor()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    let rhs = self.tensor()?;
                    lhs = RawExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Op('-') => {
                    self.bump();
                    let rhs = self.tensor()?;
                    lhs = RawExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn tensor(&mut self) -> Result<RawExpr, SyntaxError> {
        let mut lhs = self.term()?;
        while self.is_tensor_sep() {
            self.bump();
            let rhs = self.term()?;
            lhs = RawExpr::Tensor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<RawExpr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = RawExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Op('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = RawExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<RawExpr, SyntaxError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(RawExpr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RawExpr, SyntaxError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(RawExpr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<RawExpr, SyntaxError> {
        match self.bump() {
            Tok::Int(n) => Ok(RawExpr::Int(n)),
            Tok::Ident(name) if name == "o" => {
                self.at -= 1;
                Err(self.error("an operand"))
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    self.bump();
                    let mut args = vec![self.sum()?];
                    while matches!(self.peek(), Tok::Op(';') | Tok::Op(',')) {
                        self.bump();
                        args.push(self.sum()?);
                    }
                    self.expect_op(')', "')' closing the argument list")?;
                    Ok(RawExpr::Call(name, args))
                } else if let Some(rest) = name.strip_prefix('√') {
                    // `√ω` shorthand
                    let arg = if rest.is_empty() {
                        self.primary()?
                    } else {
                        RawExpr::Ident(rest.to_string())
                    };
                    Ok(RawExpr::Call("sqrt".to_string(), vec![arg]))
                } else {
                    Ok(RawExpr::Ident(name))
                }
            }
            Tok::Op('(') => {
                let inner = self.sum()?;
                self.expect_op(')', "')'")?;
                Ok(inner)
            }
            Tok::Op('[') => {
                let inner = self.sum()?;
                self.expect_op(']', "']'")?;
                Ok(inner)
            }
            _ => {
                self.at = self.at.saturating_sub(1);
                Err(self.error("an operand"))
            }
        }
    }
}

/// Parses a complete formula.
pub fn parse(src: &str) -> Result<RawExpr, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, at: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> Box<RawExpr> {
        Box::new(RawExpr::Ident(s.to_string()))
    }

    #[test]
    fn tensor_binds_looser_than_product() {
        let e = parse("z*x1 o x2 - x2 o x1").unwrap();
        let lhs = RawExpr::Tensor(Box::new(RawExpr::Mul(id("z"), id("x1"))), id("x2"));
        let rhs = RawExpr::Tensor(id("x2"), id("x1"));
        assert_eq!(e, RawExpr::Sub(Box::new(lhs), Box::new(rhs)));
    }

    #[test]
    fn calls_accept_semicolon_arguments() {
        let e = parse("sinhc(1; -lambda*x0 + X0)").unwrap();
        match e {
            RawExpr::Call(name, args) => {
                assert_eq!(name, "sinhc");
                assert_eq!(args.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unicode_aliases_lex() {
        assert!(parse("√ω").is_ok());
        assert!(parse("x1 ⊗ x2 − x2 ⊗ x1").is_ok());
        assert!(parse("sqrt(1+λ^2)").is_ok());
    }

    #[test]
    fn errors_carry_position() {
        let err = parse("x0 + * x1").unwrap_err();
        assert!(matches!(err, SyntaxError::Unexpected { pos: 5, .. }), "{err:?}");
        assert!(parse("x0 $ x1").is_err());
        assert!(parse("(x0").is_err());
    }

    #[test]
    fn negative_exponent_is_integer() {
        match parse("z^-1").unwrap() {
            RawExpr::Pow(_, e) => assert_eq!(e.as_integer(), Some(-1)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
