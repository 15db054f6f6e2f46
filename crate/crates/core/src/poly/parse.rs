//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := ('-' | '+') factor | atom ('^' uint)?
//! atom   := ident | number | 'I' | '(' expr ')'
//! number := decimal | int '/' int
//! ```
//!
//! `I` is the imaginary unit. Decimals may carry an exponent (`1.5e-3`).

use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::Complex;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
    /// Raw text, used to validate exponent literals.
    raw: String,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let (l0, c0) = (line, col);
        if ch == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let simple = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
                raw: ch.to_string(),
            });
            i += 1;
            col += 1;
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(s.clone()),
                line: l0,
                column: c0,
                raw: s,
            });
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_only = i < chars.len() && chars[i] == '/';
            let value;
            if int_only && i > start && i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                let p: String = chars[start..i].iter().collect();
                i += 1;
                let qs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let q: String = chars[qs..i].iter().collect();
                let (p, q): (f64, f64) = (p.parse().unwrap(), q.parse().unwrap());
                if q == 0.0 {
                    return Err(Error::Syntax {
                        line: l0,
                        column: c0,
                        message: "rational literal with zero denominator".into(),
                    });
                }
                value = p / q;
            } else {
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
                let s: String = chars[start..i].iter().collect();
                value = s.parse().map_err(|_| Error::Syntax {
                    line: l0,
                    column: c0,
                    message: format!("malformed number `{s}`"),
                })?;
            }
            if !value.is_finite() {
                return Err(Error::NonFinite("numeric literal"));
            }
            let raw: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned {
                tok: Tok::Num(value),
                line: l0,
                column: c0,
                raw,
            });
            continue;
        }
        return Err(Error::Syntax {
            line: l0,
            column: c0,
            message: format!("unexpected character `{ch}`"),
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
        raw: String::new(),
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        match self.peek().tok {
            Tok::Minus => {
                self.bump();
                return Ok(self.factor()?.neg());
            }
            Tok::Plus => {
                self.bump();
                return self.factor();
            }
            _ => {}
        }
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let t = self.bump();
            let valid = matches!(t.tok, Tok::Num(_)) && t.raw.chars().all(|c| c.is_ascii_digit());
            if !valid {
                return Err(Error::InvalidExponent {
                    line: t.line,
                    column: t.column,
                });
            }
            let e: u32 = t.raw.parse().map_err(|_| Error::InvalidExponent {
                line: t.line,
                column: t.column,
            })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let n = self.names.len();
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Polynomial::constant(n, Complex::new(v, 0.0))),
            Tok::Ident(ref s) if s == "I" => Ok(Polynomial::constant(n, Complex::i())),
            Tok::Ident(ref s) => match self.names.iter().position(|x| x == s) {
                Some(i) => Ok(Polynomial::variable(n, i)),
                None => Err(Error::UnknownIdentifier {
                    name: s.clone(),
                    line: t.line,
                    column: t.column,
                }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.err("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Eof => Err(Error::Syntax {
                line: t.line,
                column: t.column,
                message: "unexpected end of input".into(),
            }),
            _ => Err(Error::Syntax {
                line: t.line,
                column: t.column,
                message: format!("unexpected `{}`", t.raw),
            }),
        }
    }
}

/// Parses one expression over the given identifier list (variables then parameters).
pub fn parse_polynomial(text: &str, names: &[String]) -> Result<Polynomial> {
    if names.iter().any(|n| n == "I") {
        return Err(Error::InvalidInput("`I` is reserved for the imaginary unit".into()));
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        names,
    };
    let poly = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.err(format!("unexpected `{}`", p.peek().raw)));
    }
    poly.check_finite()?;
    Ok(poly)
}

/// Parses a constant complex expression such as `0.4 + 0.3*I` or `-1/3`.
pub fn parse_complex(text: &str) -> Result<Complex> {
    let p = parse_polynomial(text, &[])?;
    Ok(match p.terms() {
        [] => Complex::new(0.0, 0.0),
        [t] => t.coeff,
        _ => unreachable!("constant polynomial has at most one term"),
    })
}
