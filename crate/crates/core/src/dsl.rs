//! A small expression language for entering symbols as text.
//!
//! Grammar (whitespace-insensitive, `^` binds tighter than `*` binds tighter
//! than `+`/`-`):
//!
//! ```text
//! expr     = [ sign ] term { sign term } ;
//! sign     = "+" | "-" ;
//! term     = factor { "*" factor } ;
//! factor   = atom [ "^" exponent ] ;
//! exponent = integer | "(" [ "-" ] integer ")" | "(" "-" "s" ")" ;
//! atom     = number | "i" | "log" "(" integer ")" | "s" | "(" expr ")" ;
//! number   = integer [ "/" integer ] | decimal ;
//! ```
//!
//! `n^(-s)` with an integer literal base is the Dirichlet monomial; `s` can
//! only enter linearly (a `k*s` additive term with a nonnegative integer
//! `k`), which is exactly the symbol shape `c₀s + ψ(s)`. `log` takes a
//! positive integer literal, keeping coefficients in the field the worked
//! examples use. Parse errors carry 1-based line:column positions.

use num_complex::Complex64;

use crate::dirichlet::{DirichletPolynomial, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::symbols::Symbol;

const MAX_INPUT: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Integer(u64),
    Decimal(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    at: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), at: 0, line: 1, col: 1 }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.at];
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn tokens(mut self) -> Result<Vec<(Token, Pos)>> {
        let mut out = Vec::new();
        while self.at < self.src.len() {
            let b = self.src[self.at];
            if b.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            let pos = Pos { line: self.line, col: self.col };
            let token = match b {
                b'+' => { self.bump(); Token::Plus }
                b'-' => { self.bump(); Token::Minus }
                b'*' => { self.bump(); Token::Star }
                b'^' => { self.bump(); Token::Caret }
                b'/' => { self.bump(); Token::Slash }
                b'(' => { self.bump(); Token::LParen }
                b')' => { self.bump(); Token::RParen }
                b'0'..=b'9' | b'.' => self.number()?,
                b'a'..=b'z' | b'A'..=b'Z' => self.ident(),
                other => return Err(self.error(format!("unexpected character `{}`", other as char))),
            };
            out.push((token, pos));
        }
        Ok(out)
    }

    fn number(&mut self) -> Result<Token> {
        let start = self.at;
        let mut saw_dot = false;
        while self.at < self.src.len() {
            match self.src[self.at] {
                b'0'..=b'9' => { self.bump(); }
                b'.' if !saw_dot => {
                    saw_dot = true;
                    self.bump();
                }
                _ => break,
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.at]).expect("ascii digits");
        if saw_dot {
            text.parse::<f64>()
                .map(Token::Decimal)
                .map_err(|_| self.error(format!("invalid number `{text}`")))
        } else {
            text.parse::<u64>()
                .map(Token::Integer)
                .map_err(|_| self.error(format!("integer `{text}` out of range")))
        }
    }

    fn ident(&mut self) -> Token {
        let start = self.at;
        while self.at < self.src.len() && self.src[self.at].is_ascii_alphanumeric() {
            self.bump();
        }
        Token::Ident(String::from_utf8_lossy(&self.src[start..self.at]).into_owned())
    }
}

/// Evaluation value: `s_coeff · s + poly(s)`.
#[derive(Debug, Clone)]
struct LinValue {
    s_coeff: Complex64,
    poly: DirichletPolynomial,
}

impl LinValue {
    fn scalar(c: Complex64) -> Self {
        Self { s_coeff: Complex64::new(0.0, 0.0), poly: DirichletPolynomial::constant(c, DEFAULT_TRUNCATION) }
    }

    fn has_s(&self) -> bool {
        self.s_coeff.norm() != 0.0
    }

    fn as_constant(&self) -> Option<Complex64> {
        if self.has_s() || !self.poly.is_constant() {
            None
        } else {
            Some(self.poly.coefficient(1))
        }
    }
}

struct Parser {
    tokens: Vec<(Token, Pos)>,
    at: usize,
}

impl Parser {
    fn pos(&self) -> Pos {
        self.tokens
            .get(self.at)
            .or_else(|| self.tokens.last())
            .map(|&(_, p)| p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let p = self.pos();
        Error::Parse { line: p.line, col: p.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<()> {
        if self.eat(&token) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<LinValue> {
        let mut negate = false;
        if self.eat(&Token::Minus) {
            negate = true;
        } else {
            self.eat(&Token::Plus);
        }
        let mut acc = self.term()?;
        if negate {
            acc.s_coeff = -acc.s_coeff;
            acc.poly = acc.poly.scale(Complex64::new(-1.0, 0.0));
        }
        loop {
            if self.eat(&Token::Plus) {
                let rhs = self.term()?;
                acc.s_coeff += rhs.s_coeff;
                acc.poly = acc.poly.add(&rhs.poly);
            } else if self.eat(&Token::Minus) {
                let rhs = self.term()?;
                acc.s_coeff -= rhs.s_coeff;
                acc.poly = acc.poly.sub(&rhs.poly);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<LinValue> {
        let mut acc = self.factor()?;
        while self.eat(&Token::Star) {
            let rhs = self.factor()?;
            acc = self.multiply(acc, rhs)?;
        }
        Ok(acc)
    }

    fn multiply(&self, a: LinValue, b: LinValue) -> Result<LinValue> {
        match (a.has_s(), b.has_s()) {
            (false, false) => Ok(LinValue {
                s_coeff: Complex64::new(0.0, 0.0),
                poly: a.poly.multiply(&b.poly),
            }),
            (true, true) => Err(self.error("`s` used nonlinearly (s*s)")),
            (true, false) => {
                let c = b
                    .as_constant()
                    .ok_or_else(|| self.error("`s` may only be scaled by constants"))?;
                Ok(LinValue { s_coeff: a.s_coeff * c, poly: a.poly.scale(c) })
            }
            (false, true) => self.multiply(b, a),
        }
    }

    fn factor(&mut self) -> Result<LinValue> {
        let (value, int_literal) = self.atom()?;
        if !self.eat(&Token::Caret) {
            return Ok(value);
        }
        match self.exponent()? {
            Exponent::MinusS => {
                let n = int_literal.ok_or_else(|| {
                    self.error("the base of `^(-s)` must be an integer literal")
                })?;
                if n == 0 {
                    return Err(self.error("the base of `^(-s)` must be positive"));
                }
                Ok(LinValue {
                    s_coeff: Complex64::new(0.0, 0.0),
                    poly: DirichletPolynomial::monomial(n, Complex64::new(1.0, 0.0), DEFAULT_TRUNCATION),
                })
            }
            Exponent::Integer(k) => {
                if value.has_s() {
                    return Err(self.error("`s` used nonlinearly (inside a power)"));
                }
                if k < 0 {
                    let c = value.as_constant().ok_or_else(|| {
                        self.error("negative powers apply only to constants")
                    })?;
                    if c.norm() == 0.0 {
                        return Err(self.error("division by zero in a negative power"));
                    }
                    return Ok(LinValue::scalar(c.powi(k as i32)));
                }
                let k = u32::try_from(k).expect("nonnegative");
                let poly = value.poly.power(k).map_err(|e| match e {
                    Error::PowerGuard(k, max) => {
                        self.error(format!("power {k} exceeds the guard {max}"))
                    }
                    other => other,
                })?;
                Ok(LinValue { s_coeff: Complex64::new(0.0, 0.0), poly })
            }
        }
    }

    fn exponent(&mut self) -> Result<Exponent> {
        match self.next() {
            Some(Token::Integer(k)) => Ok(Exponent::Integer(k as i64)),
            Some(Token::LParen) => {
                let negative = self.eat(&Token::Minus);
                match self.next() {
                    Some(Token::Integer(k)) => {
                        self.expect(Token::RParen, "`)` after the exponent")?;
                        let k = k as i64;
                        Ok(Exponent::Integer(if negative { -k } else { k }))
                    }
                    Some(Token::Ident(name)) if name == "s" => {
                        if !negative {
                            return Err(self.error("only `-s` may appear in an exponent"));
                        }
                        self.expect(Token::RParen, "`)` after `-s`")?;
                        Ok(Exponent::MinusS)
                    }
                    _ => Err(self.error("expected an integer or `-s` in the exponent")),
                }
            }
            _ => Err(self.error("expected an exponent after `^`")),
        }
    }

    /// Returns the value plus the raw integer when the atom was a bare
    /// integer literal (the only legal base for `^(-s)`).
    fn atom(&mut self) -> Result<(LinValue, Option<u64>)> {
        match self.next() {
            Some(Token::Integer(n)) => {
                if self.eat(&Token::Slash) {
                    match self.next() {
                        Some(Token::Integer(d)) if d > 0 => Ok((
                            LinValue::scalar(Complex64::new(n as f64 / d as f64, 0.0)),
                            None,
                        )),
                        _ => Err(self.error("expected a positive integer denominator")),
                    }
                } else {
                    Ok((LinValue::scalar(Complex64::new(n as f64, 0.0)), Some(n)))
                }
            }
            Some(Token::Decimal(x)) => Ok((LinValue::scalar(Complex64::new(x, 0.0)), None)),
            Some(Token::Ident(name)) => match name.as_str() {
                "i" => Ok((LinValue::scalar(Complex64::new(0.0, 1.0)), None)),
                "s" => Ok((
                    LinValue {
                        s_coeff: Complex64::new(1.0, 0.0),
                        poly: DirichletPolynomial::zero(DEFAULT_TRUNCATION),
                    },
                    None,
                )),
                "log" => {
                    self.expect(Token::LParen, "`(` after log")?;
                    let n = match self.next() {
                        Some(Token::Integer(n)) if n >= 1 => n,
                        _ => return Err(self.error("log takes a positive integer literal")),
                    };
                    self.expect(Token::RParen, "`)` after the log argument")?;
                    Ok((LinValue::scalar(Complex64::new((n as f64).ln(), 0.0)), None))
                }
                other => Err(self.error(format!("unknown name `{other}`"))),
            },
            Some(Token::LParen) => {
                let value = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok((value, None))
            }
            _ => Err(self.error("expected a number, `i`, `log(n)`, `s`, or `(`")),
        }
    }
}

enum Exponent {
    Integer(i64),
    MinusS,
}

/// Parses a symbol expression into `φ(s) = c₀s + ψ(s)`.
pub fn parse(text: &str) -> Result<Symbol> {
    if text.len() > MAX_INPUT {
        return Err(Error::Parse { line: 1, col: 1, msg: "input exceeds 64 KiB".into() });
    }
    let tokens = Lexer::new(text).tokens()?;
    if tokens.is_empty() {
        return Err(Error::Parse { line: 1, col: 1, msg: "empty input".into() });
    }
    let mut parser = Parser { tokens, at: 0 };
    let value = parser.expr()?;
    if parser.at != parser.tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    let c0 = value.s_coeff;
    if c0.im.abs() > 1e-9 || c0.re < -1e-9 || (c0.re - c0.re.round()).abs() > 1e-9 {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: format!("characteristic {c0} is not a nonnegative integer"),
        });
    }
    Ok(Symbol::new(c0.re.round() as u32, value.poly))
}

/// Parses an expression that must evaluate to a constant (used for
/// coefficients of linear combinations).
pub fn parse_scalar(text: &str) -> Result<Complex64> {
    let symbol = parse(text)?;
    if symbol.characteristic() != 0 || !symbol.psi().is_constant() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "expected a constant expression".into(),
        });
    }
    Ok(symbol.c1())
}

fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let text = format!("{x}");
    // Values beyond u64 print without a decimal point but cannot re-enter
    // through the integer token; a ".0" keeps them parseable.
    if !text.contains('.') && x.abs() > u64::MAX as f64 {
        format!("{text}.0")
    } else {
        text
    }
}

/// Renders a complex scalar so that evaluating it reproduces the value
/// exactly: plain decimal for reals, `x*i` for imaginaries, and a
/// parenthesized sum otherwise.
fn fmt_scalar(c: Complex64) -> String {
    if c.im == 0.0 {
        fmt_f64(c.re)
    } else if c.re == 0.0 {
        if c.im < 0.0 {
            format!("-{}*i", fmt_f64(-c.im))
        } else {
            format!("{}*i", fmt_f64(c.im))
        }
    } else if c.im < 0.0 {
        format!("({} - {}*i)", fmt_f64(c.re), fmt_f64(-c.im))
    } else {
        format!("({} + {}*i)", fmt_f64(c.re), fmt_f64(c.im))
    }
}

/// True when the rendered scalar can take a leading minus sign instead of a
/// binary one (real or pure imaginary values).
fn negatable(c: Complex64) -> Option<Complex64> {
    let negative_real = c.im == 0.0 && c.re < 0.0;
    let negative_imaginary = c.re == 0.0 && c.im < 0.0;
    (negative_real || negative_imaginary).then(|| -c)
}

/// Canonical rendering; `parse(format(φ))` returns a symbol with identical
/// coefficients.
pub fn format(phi: &Symbol) -> String {
    let mut pieces: Vec<(bool, String)> = Vec::new(); // (negative, body)
    match phi.characteristic() {
        0 => {}
        1 => pieces.push((false, "s".to_string())),
        c0 => pieces.push((false, format!("{c0}*s"))),
    }
    for (n, c) in phi.psi().terms() {
        let (neg, value) = match negatable(c) {
            Some(flipped) => (true, flipped),
            None => (false, c),
        };
        let body = if n == 1 {
            fmt_scalar(value)
        } else if value == Complex64::new(1.0, 0.0) {
            format!("{n}^(-s)")
        } else {
            format!("{}*{n}^(-s)", fmt_scalar(value))
        };
        pieces.push((neg, body));
    }
    if pieces.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (neg, body)) in pieces.iter().enumerate() {
        if i == 0 {
            if *neg {
                out.push('-');
            }
        } else {
            out.push_str(if *neg { " - " } else { " + " });
        }
        out.push_str(body);
    }
    out
}
