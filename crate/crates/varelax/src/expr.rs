//! Whitelisted closed-form expressions for problem files.
//!
//! Grammar: numeric literals, named variables, `+ - * ^`, division by a
//! numeric literal, `abs(e)`, `min(e, e)`, `max(e, e)`, parentheses and unary
//! minus. Exponents are non-negative integer literals. Anything else is
//! rejected; there is deliberately no general evaluator behind this.

use std::fmt;

#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Division by a constant only.
    DivConst(Box<Expr>, f64),
    Pow(Box<Expr>, u32),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub at: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.at, self.message)
    }
}

impl std::error::Error for ParseError {}

impl Expr {
    /// Parses an expression over the given variable names (e.g. `["x"]`,
    /// `["x1", "x2"]` or `["t"]`).
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            vars,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => args[*i],
            Expr::Neg(e) => -e.eval(args),
            Expr::Add(a, b) => a.eval(args) + b.eval(args),
            Expr::Sub(a, b) => a.eval(args) - b.eval(args),
            Expr::Mul(a, b) => a.eval(args) * b.eval(args),
            Expr::DivConst(a, c) => a.eval(args) / c,
            Expr::Pow(e, n) => e.eval(args).powi(*n as i32),
            Expr::Abs(e) => e.eval(args).abs(),
            Expr::Min(a, b) => a.eval(args).min(b.eval(args)),
            Expr::Max(a, b) => a.eval(args).max(b.eval(args)),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError {
            at: self.pos,
            message: message.to_string(),
        }
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

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                self.skip_ws();
                let neg = self.eat(b'-');
                let c = self.number()?;
                let c = if neg { -c } else { c };
                if c == 0.0 {
                    return Err(self.err("division by zero"));
                }
                lhs = Expr::DivConst(Box::new(lhs), c);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("exponent must be a non-negative integer"));
            }
            let n: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent out of range"))?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                Ok(Expr::Const(v))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                match name.as_str() {
                    "abs" => {
                        let e = self.args1()?;
                        Ok(Expr::Abs(Box::new(e)))
                    }
                    "min" => {
                        let (a, b) = self.args2()?;
                        Ok(Expr::Min(Box::new(a), Box::new(b)))
                    }
                    "max" => {
                        let (a, b) = self.args2()?;
                        Ok(Expr::Max(Box::new(a), Box::new(b)))
                    }
                    _ => match self.vars.iter().position(|v| *v == name) {
                        Some(i) => Ok(Expr::Var(i)),
                        None => Err(ParseError {
                            at: self.pos,
                            message: format!(
                                "unknown name '{name}' (allowed: {}, abs, min, max)",
                                self.vars.join(", ")
                            ),
                        }),
                    },
                }
            }
            _ => Err(self.err("expected a number, variable, function or '('")),
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || self.src[self.pos] == b'e'
                || self.src[self.pos] == b'E'
                || ((self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                    && self.pos > start
                    && (self.src[self.pos - 1] == b'e' || self.src[self.pos - 1] == b'E')))
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("invalid number"))
    }

    fn args1(&mut self) -> Result<Expr, ParseError> {
        if !self.eat(b'(') {
            return Err(self.err("expected '('"));
        }
        let e = self.expr()?;
        if !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        Ok(e)
    }

    fn args2(&mut self) -> Result<(Expr, Expr), ParseError> {
        if !self.eat(b'(') {
            return Err(self.err("expected '('"));
        }
        let a = self.expr()?;
        if !self.eat(b',') {
            return Err(self.err("expected ','"));
        }
        let b = self.expr()?;
        if !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        Ok((a, b))
    }
}
