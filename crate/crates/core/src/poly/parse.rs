//! Recursive-descent parser for the POP text format.
//!
//! ```text
//! # comment
//! vars x y;
//! min 2*x*y + y^2;
//! s.t. x - 1 >= 0;
//!      x^2 + y^2 <= 4;
//!      x*y == 1/2;
//! ```
//!
//! Expressions support `+ - * / ^` and parentheses. Exponents are
//! nonnegative integer literals and divisors must be nonzero constants.

use super::{Coefficient, Polynomial, Pop};
use crate::error::{Error, Result};

/// Parses a POP with `f64` coefficients.
pub fn parse_pop(source: &str) -> Result<Pop> {
    parse_pop_with::<f64>(source)
}

/// Parses a POP with any coefficient type, e.g. `Rational64` for exact tests.
pub fn parse_pop_with<C: Coefficient>(source: &str) -> Result<Pop<C>> {
    let tokens = tokenize(source)?;
    Parser { tokens, pos: 0, names: Vec::new(), _c: std::marker::PhantomData }.pop()
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Vars,
    Min,
    St,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    Ge,
    Le,
    EqEq,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok, text: String| out.push(Token { tok, text, line: start_line, col: start_col });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "s" && chars[i..].starts_with(&['.', 't', '.']) {
                i += 3;
                push(Tok::St, "s.t.".into());
            } else {
                let tok = match word.as_str() {
                    "vars" => Tok::Vars,
                    "min" => Tok::Min,
                    _ => Tok::Ident(word.clone()),
                };
                push(tok, word);
            }
            col += i - start;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            push(Tok::Num(text.clone()), text);
            col += i - start;
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, len) = match two.as_str() {
            ">=" => (Tok::Ge, 2),
            "<=" => (Tok::Le, 2),
            "==" => (Tok::EqEq, 2),
            _ => match c {
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                '/' => (Tok::Slash, 1),
                '^' => (Tok::Caret, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                ';' => (Tok::Semi, 1),
                _ => {
                    return Err(Error::Syntax { line, col, msg: format!("unexpected character `{c}`") });
                }
            },
        };
        push(tok, chars[i..i + len].iter().collect());
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, text: "end of input".into(), line, col });
    Ok(out)
}

struct Parser<C> {
    tokens: Vec<Token>,
    pos: usize,
    names: Vec<String>,
    _c: std::marker::PhantomData<C>,
}

enum Relation {
    Ge,
    Le,
    Eq,
}

impl<C: Coefficient> Parser<C> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, tok: &Token, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { line: tok.line, col: tok.col, msg: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token> {
        let t = self.next();
        if t.tok != want {
            return self.error(&t, format!("expected {what}, found `{}`", t.text));
        }
        Ok(t)
    }

    fn pop(mut self) -> Result<Pop<C>> {
        self.expect(Tok::Vars, "`vars`")?;
        loop {
            let t = self.next();
            match t.tok {
                Tok::Ident(ref name) => {
                    if self.names.contains(name) {
                        return self.error(&t, format!("variable `{name}` declared twice"));
                    }
                    self.names.push(name.clone());
                }
                Tok::Semi if !self.names.is_empty() => break,
                _ => return self.error(&t, format!("expected variable name, found `{}`", t.text)),
            }
        }
        self.expect(Tok::Min, "`min`")?;
        let objective = self.expr()?;
        let (mut ineq, mut eq) = (Vec::new(), Vec::new());
        if !self.statement_end()? {
            let t = self.peek().clone();
            return self.error(&t, format!("expected `;`, found `{}`", t.text));
        }
        while self.peek().tok != Tok::Eof {
            if self.peek().tok == Tok::St {
                self.next();
                continue;
            }
            let lhs = self.expr()?;
            let rel_tok = self.next();
            let rel = match rel_tok.tok {
                Tok::Ge => Relation::Ge,
                Tok::Le => Relation::Le,
                Tok::EqEq => Relation::Eq,
                _ => return self.error(&rel_tok, format!("expected `>=`, `<=` or `==`, found `{}`", rel_tok.text)),
            };
            let rhs = self.expr()?;
            let diff = lhs.try_sub(&rhs)?;
            match rel {
                Relation::Ge => ineq.push(diff),
                Relation::Le => ineq.push(diff.scale(&-C::one())),
                Relation::Eq => eq.push(diff),
            }
            if !self.statement_end()? {
                let t = self.peek().clone();
                return self.error(&t, format!("expected `;`, found `{}`", t.text));
            }
        }
        Pop::new(self.names, objective, ineq, eq)
    }

    // Consumes a `;` or accepts end of input; false when neither is present.
    fn statement_end(&mut self) -> Result<bool> {
        match self.peek().tok {
            Tok::Semi => {
                self.next();
                Ok(true)
            }
            Tok::Eof | Tok::St => Ok(true),
            _ => Ok(false),
        }
    }

    fn expr(&mut self) -> Result<Polynomial<C>> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc = acc.try_add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.next();
                    acc = acc.try_sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial<C>> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    acc = acc.try_mul(&self.unary()?)?;
                }
                Tok::Slash => {
                    self.next();
                    let at = self.peek().clone();
                    let divisor = self.unary()?;
                    let c = match divisor.terms().next() {
                        Some((m, c)) if divisor.len() == 1 && m.is_one() => c.clone(),
                        None => return self.error(&at, "division by zero"),
                        _ => return self.error(&at, "divisor must be a constant"),
                    };
                    acc = acc.scale(&(C::one() / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial<C>> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(self.unary()?.scale(&-C::one()))
            }
            Tok::Plus => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial<C>> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let t = self.next();
        let bad = |found: String| Error::NonIntegerExponent { found, line: t.line, col: t.col };
        match &t.tok {
            Tok::Num(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                let e: u32 = s.parse().map_err(|_| bad(s.clone()))?;
                Ok(base.pow(e))
            }
            Tok::Minus => {
                let follow = self.peek().text.clone();
                Err(bad(format!("-{follow}")))
            }
            _ => Err(bad(t.text.clone())),
        }
    }

    fn atom(&mut self) -> Result<Polynomial<C>> {
        let n = self.names.len();
        let t = self.next();
        match &t.tok {
            Tok::Num(s) => match C::from_literal(s) {
                Some(c) => Ok(Polynomial::constant(n, c)),
                None => self.error(&t, format!("invalid number `{s}`")),
            },
            Tok::Ident(name) => match self.names.iter().position(|v| v == name) {
                Some(i) => Ok(Polynomial::var(n, i)),
                None => Err(Error::UndeclaredVariable { name: name.clone(), line: t.line, col: t.col }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => self.error(&t, format!("expected expression, found `{}`", t.text)),
        }
    }
}
