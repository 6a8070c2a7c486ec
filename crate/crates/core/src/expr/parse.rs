//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' rational)?
//! base   := number | symbol | func '(' expr (',' expr)? ')' | '(' expr ')' | '-' base
//! ```
//!
//! Whitespace is insignificant. Exponents are restricted to rational
//! constants so differentiation stays closed form.

use super::{Coords, Node, Ratio, UnaryFn};
use crate::error::{Error, Result};

pub(super) fn parse_node(text: &str, coords: &Coords) -> Result<Node> {
    let mut p = Parser {
        input: text.as_bytes(),
        pos: 0,
        coords,
    };
    p.skip_ws();
    let node = p.expr()?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(node)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    coords: &'a Coords,
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Node::Add(lhs.into(), rhs.into());
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Node::Sub(lhs.into(), rhs.into());
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                lhs = Node::Mul(lhs.into(), rhs.into());
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                lhs = Node::Div(lhs.into(), rhs.into());
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.base()?;
        if self.eat(b'^') {
            let exp = self.rational()?;
            Ok(Node::Pow(base.into(), exp))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.base()?;
                // fold negated literals so "-2" is the constant -2
                match inner {
                    Node::Num(c) => Ok(Node::Num(-c)),
                    other => Ok(Node::Neg(other.into())),
                }
            }
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.symbol_or_call(),
            _ => Err(self.syntax("expected a number, symbol, function call or `(`")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // `e` belonged to a following symbol, not an exponent
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("invalid number literal `{text}`"),
        })?;
        self.skip_ws();
        Ok(Node::Num(value))
    }

    fn symbol_or_call(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.input[start..self.pos]).unwrap().to_string();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            self.skip_ws();
            let first = self.expr()?;
            if name == "atan2" {
                self.expect(b',')?;
                let second = self.expr()?;
                self.expect(b')')?;
                return Ok(Node::Atan2(first.into(), second.into()));
            }
            let func = UnaryFn::from_name(&name).ok_or_else(|| Error::Syntax {
                position: start,
                message: format!("unknown function `{name}`"),
            })?;
            self.expect(b')')?;
            Ok(Node::Unary(func, first.into()))
        } else {
            let idx = self.coords.index_of(&name).ok_or(Error::UndeclaredSymbol {
                name,
                position: start,
            })?;
            Ok(Node::Var(idx))
        }
    }

    /// Rational exponent: `2`, `-1`, `2.5` bare; fractions such as `(1/2)`
    /// must be parenthesized so `x^2/x` stays a quotient of factors.
    fn rational(&mut self) -> Result<Ratio> {
        if self.eat(b'(') {
            let r = self.rational_body(true)?;
            self.expect(b')')?;
            Ok(r)
        } else {
            self.rational_body(false)
        }
    }

    fn rational_body(&mut self, allow_fraction: bool) -> Result<Ratio> {
        let negative = self.eat(b'-');
        let start = self.pos;
        let int_part = self.digits()?;
        let mut ratio = if self.peek() == Some(b'.') {
            self.pos += 1;
            let frac_start = self.pos;
            let frac = self.digits()?;
            let scale = 10i64
                .checked_pow((self.pos - frac_start) as u32)
                .ok_or_else(|| self.syntax("exponent literal too long"))?;
            Ratio::new(int_part * scale + frac, scale)?
        } else {
            Ratio::integer(int_part)
        };
        self.skip_ws();
        if allow_fraction && self.eat(b'/') {
            let den = self.digits()?;
            if den == 0 {
                return Err(Error::Syntax {
                    position: start,
                    message: "zero denominator in exponent".into(),
                });
            }
            ratio = ratio * Ratio::new(1, den)?;
        }
        self.skip_ws();
        Ok(if negative { -ratio } else { ratio })
    }

    fn digits(&mut self) -> Result<i64> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.syntax("expected a rational constant exponent"));
        }
        std::str::from_utf8(&self.input[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Syntax {
                position: start,
                message: "exponent literal too long".into(),
            })
    }
}
