//! Recursive-descent parser for the surface grammar
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := base ('^' '-'? number)?
//! base   := number | ident | '(' expr ')' | func '(' expr ')'
//! func   := sin | cos | exp | ln | sqrt
//! ident  := x<digits> | y<digits>
//! ```
//!
//! The parser builds nodes verbatim (no folding), except that a minus sign
//! directly in front of a bare numeric literal yields a negative constant.

use super::{Dimensions, Expr, Func, Node, Var};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable index out of range: `{name}` at byte {offset} (dims n={n}, m={m})")]
    IndexOutOfRange { offset: usize, name: String, n: usize, m: usize },
}

pub fn parse(text: &str, dims: Dimensions) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, dims };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dims: Dimensions,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Expr::raw(Node::Add(lhs, rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Expr::raw(Node::Sub(lhs, rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Expr::raw(Node::Mul(lhs, rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = Expr::raw(Node::Div(lhs, rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        Ok(self.unary_inner()?.0)
    }

    /// Returns the expression and whether it is a bare numeric literal.
    fn unary_inner(&mut self) -> Result<(Expr, bool), ParseError> {
        if self.eat(b'-') {
            let (inner, literal) = self.unary_inner()?;
            if literal {
                if let Some(c) = inner.as_const() {
                    return Ok((Expr::constant(-c), false));
                }
            }
            return Ok((Expr::raw(Node::Neg(inner)), false));
        }
        self.power()
    }

    fn power(&mut self) -> Result<(Expr, bool), ParseError> {
        let (base, literal) = self.base()?;
        if self.eat(b'^') {
            let negative = self.eat(b'-');
            self.skip_ws();
            let exp = self.number()?;
            let exp = if negative { -exp } else { exp };
            return Ok((Expr::raw(Node::Pow(base, exp)), false));
        }
        Ok((base, literal))
    }

    fn base(&mut self) -> Result<(Expr, bool), ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok((Expr::constant(self.number()?), true)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok((e, false))
            }
            Some(c) if c.is_ascii_alphabetic() => Ok((self.identifier()?, false)),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.syntax("expected a number"));
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map_err(|_| ParseError::Syntax { offset: start, message: format!("malformed number `{text}`") })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(b'(') {
                return Err(self.syntax(format!("expected `(` after `{name}`")));
            }
            self.pos += 1;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::raw(Node::Func(func, arg)));
        }
        let unknown = || ParseError::UnknownIdentifier { offset: start, name: name.to_string() };
        let (kind, index) = name.split_at(1);
        if index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = index.parse().map_err(|_| unknown())?;
        let var = match (kind, index) {
            (_, 0) => return Err(unknown()),
            ("x", i) => Var::X(i - 1),
            ("y", a) => Var::Y(a - 1),
            _ => return Err(unknown()),
        };
        if !self.dims.contains(var) {
            return Err(ParseError::IndexOutOfRange {
                offset: start,
                name: name.to_string(),
                n: self.dims.n,
                m: self.dims.m,
            });
        }
        Ok(Expr::var(var))
    }
}
