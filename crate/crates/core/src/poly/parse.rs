//! Expression parser.
//!
//! ```text
//! expr   := ('+'|'-')? term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := rational | ident | '(' expr ')'
//! rational := digits ('/' digits)?
//! ```
//!
//! Implicit multiplication is rejected. Columns in errors are 1-based.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{PolyError, Polynomial, Rational, VarSet};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn syntax(column: usize, message: impl Into<String>) -> PolyError {
    PolyError::Syntax {
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, PolyError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let num: String = chars[start..i].iter().collect();
                let mut value = Rational::from_integer(num.parse::<BigInt>().unwrap());
                if i < chars.len() && chars[i] == '/' {
                    i += 1;
                    let dstart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if dstart == i {
                        return Err(syntax(dstart + 1, "expected denominator digits after '/'"));
                    }
                    let den: String = chars[dstart..i].iter().collect();
                    let den = den.parse::<BigInt>().unwrap();
                    if den.is_zero() {
                        return Err(syntax(dstart + 1, "zero denominator"));
                    }
                    value /= Rational::from_integer(den);
                }
                out.push((Tok::Num(value), col));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            other => return Err(syntax(col, format!("unexpected character '{other}'"))),
        };
        out.push((tok, col));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    vars: &'a Arc<VarSet>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_col)
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                negate = true;
                self.pos += 1;
            }
            Some(Tok::Plus) => self.pos += 1,
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = &acc + &t;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = &acc - &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let col = self.col();
            match self.peek().cloned() {
                Some(Tok::Num(n)) if n.is_integer() => {
                    self.pos += 1;
                    let e: u32 = n
                        .to_integer()
                        .try_into()
                        .map_err(|_| syntax(col, "exponent out of range"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(syntax(col, "expected a non-negative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.vars, n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Polynomial::var_named(self.vars, &name)
                    .ok_or(PolyError::UnknownVariable { name, column: col })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(syntax(self.col(), "expected ')'")),
                }
            }
            Some(t) => Err(syntax(col, format!("unexpected token {t:?}"))),
            None => Err(syntax(col, "unexpected end of input")),
        }
    }
}

/// Parses `text` into a canonical polynomial over `vars`.
pub fn parse_poly(text: &str, vars: &Arc<VarSet>) -> Result<Polynomial, PolyError> {
    let toks = lex(text)?;
    let end_col = text.chars().count() + 1;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col,
        vars,
    };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        let what = match p.peek() {
            Some(Tok::Ident(_)) | Some(Tok::Num(_)) | Some(Tok::LParen) => {
                "implicit multiplication is not accepted; use '*'"
            }
            _ => "unexpected trailing input",
        };
        return Err(syntax(p.col(), what));
    }
    Ok(out)
}
