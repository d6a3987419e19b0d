//! Closed-form `f(u, v)` from text, evaluated over Taylor numbers so that
//! partial derivatives come out exactly.
//!
//! Grammar: `+ - * / ^`, parentheses, numbers, the variables `u` and `v`,
//! the constants `pi` and `e`, and the functions `abs exp log sqrt sin cos`.
//! `^` binds tighter than unary minus and associates to the right.

use std::fmt;

use relgeo_core::Taylor;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    U,
    V,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.position)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let x = text.parse::<f64>().map_err(|_| ParseError {
                position: start,
                message: format!("bad number `{text}`"),
            })?;
            out.push((start, Tok::Num(x)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError {
                position: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(Expr::Num(x))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "u" => return Ok(Expr::U),
                    "v" => return Ok(Expr::V),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Num(std::f64::consts::E)),
                    _ => {}
                }
                let Some(func) = Func::from_name(&name) else {
                    self.pos -= 1;
                    return self.err(format!("unknown name `{name}`"));
                };
                if !self.eat('(') {
                    return self.err(format!("`{name}` needs a parenthesized argument"));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of expression"),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl Expr {
    /// Value when the expression does not mention `u` or `v`.
    fn constant(&self) -> Option<f64> {
        match self {
            Expr::Num(x) => Some(*x),
            Expr::U | Expr::V => None,
            Expr::Neg(a) => a.constant().map(|x| -x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.constant()?, b.constant()?);
                Some(match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                })
            }
            Expr::Call(f, a) => {
                let a = a.constant()?;
                Some(match f {
                    Func::Abs => a.abs(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                })
            }
        }
    }

    pub fn eval(&self, u: &Taylor, v: &Taylor) -> Taylor {
        let order = u.order();
        match self {
            Expr::Num(x) => Taylor::constant(*x, order),
            Expr::U => *u,
            Expr::V => *v,
            Expr::Neg(a) => -a.eval(u, v),
            Expr::Bin(Op::Pow, a, b) => {
                let base = a.eval(u, v);
                match b.constant() {
                    Some(p) if p == p.trunc() && p.abs() <= 64.0 => base.powi(p as i32),
                    Some(p) => base.powf(p),
                    None => (b.eval(u, v) * base.ln()).exp(),
                }
            }
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(u, v), b.eval(u, v));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => unreachable!(),
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(u, v);
                match f {
                    Func::Abs => a.abs(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
        }
    }

    pub fn eval_f64(&self, u: f64, v: f64) -> f64 {
        self.eval(&Taylor::constant(u, 0), &Taylor::constant(v, 0))
            .value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(src: &str, u: f64, v: f64) -> f64 {
        parse(src).unwrap().eval_f64(u, v)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(at("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(at("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(at("-2 ^ 2", 0.0, 0.0), -4.0);
        assert_eq!(at("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(at("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(at("u - v - 1", 5.0, 2.0), 2.0);
        assert_eq!(at("1.5e2 + 2E-1", 0.0, 0.0), 150.2);
    }

    #[test]
    fn functions_and_constants() {
        assert!((at("sqrt(v) * exp(0) + log(e)", 0.0, 4.0) - 3.0).abs() < 1e-15);
        assert!((at("sin(pi/2) + cos(0) + abs(u)", -2.0, 0.0) - 4.0).abs() < 1e-15);
        assert!((at("v ^ u", 0.5, 9.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn partials_are_exact() {
        let e = parse("u * v ^ 2 + sin(u)").unwrap();
        let t = e.eval(&Taylor::var_u(0.3, 3), &Taylor::var_v(2.0, 3));
        assert!((t.partial(1, 0) - (4.0 + 0.3f64.cos())).abs() < 1e-14);
        assert!((t.partial(1, 1) - 4.0).abs() < 1e-14);
        assert!((t.partial(0, 2) - 0.6).abs() < 1e-14);
        assert!((t.partial(3, 0) + 0.3f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse("u + w").unwrap_err().position, 4);
        assert_eq!(parse("u +").unwrap_err().position, 3);
        assert!(parse("u v").is_err());
        assert!(parse("sqrt u").is_err());
        assert!(parse("(u").is_err());
        assert!(parse("u $ v").is_err());
        assert!(parse("").is_err());
    }
}
