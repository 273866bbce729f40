//! Plain-text system input.
//!
//! One equation per line, each a signed sum of terms like
//! `2.5 * x1^2 * p1 - x2 + 3i`. Unknowns are `x1..xn` where `n` is the
//! number of equations; the parameter count is the largest `pj` index used.
//! `#` starts a comment; blank lines are ignored.

use super::{ParameterizedSystem, Term};
use crate::error::{Error, Result};
use crate::numcore::{c64, C64};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Var(char, usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct RawTerm {
    coeff: C64,
    xs: Vec<(usize, u32)>,
    ps: Vec<(usize, u32)>,
}

fn err(file: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

fn tokenize(src: &str, file: &str, line: usize) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            '+' => toks.push(Tok::Plus),
            '-' => toks.push(Tok::Minus),
            '*' => toks.push(Tok::Star),
            '^' => toks.push(Tok::Caret),
            '(' => toks.push(Tok::LParen),
            ')' => toks.push(Tok::RParen),
            'x' | 'p' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return Err(err(file, line, format!("'{ch}' must be followed by an index")));
                }
                let idx: usize = chars[start..j].iter().collect::<String>().parse().unwrap();
                if idx == 0 {
                    return Err(err(file, line, "variable indices start at 1"));
                }
                toks.push(Tok::Var(ch, idx));
                i = j;
                continue;
            }
            'i' => toks.push(Tok::Num(1.0, true)),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[start..j].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(file, line, format!("bad number '{text}'")))?;
                let imag = j < chars.len() && chars[j] == 'i';
                if imag {
                    j += 1;
                }
                toks.push(Tok::Num(v, imag));
                i = j;
                continue;
            }
            other => return Err(err(file, line, format!("unexpected character '{other}'"))),
        }
        i += 1;
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    file: &'a str,
    line: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(err(self.file, self.line, msg))
    }

    fn expression(&mut self) -> Result<Vec<RawTerm>> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        match self.peek() {
            Some(Tok::Minus) => {
                sign = -1.0;
                self.pos += 1;
            }
            Some(Tok::Plus) => self.pos += 1,
            _ => {}
        }
        loop {
            let mut t = self.term()?;
            t.coeff *= sign;
            terms.push(t);
            match self.next() {
                None => break,
                Some(Tok::Plus) => sign = 1.0,
                Some(Tok::Minus) => sign = -1.0,
                Some(other) => return self.fail(format!("expected '+' or '-', found {other:?}")),
            }
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut t = RawTerm {
            coeff: c64(1.0, 0.0),
            xs: Vec::new(),
            ps: Vec::new(),
        };
        loop {
            self.factor(&mut t)?;
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(t)
    }

    fn factor(&mut self, t: &mut RawTerm) -> Result<()> {
        match self.next() {
            Some(Tok::Num(v, imag)) => {
                t.coeff *= if imag { c64(0.0, v) } else { c64(v, 0.0) };
            }
            Some(Tok::LParen) => {
                let inner = self.parenthesized_constant()?;
                t.coeff *= inner;
            }
            Some(Tok::Var(kind, idx)) => {
                let mut e = 1u32;
                if self.peek() == Some(&Tok::Caret) {
                    self.pos += 1;
                    match self.next() {
                        Some(Tok::Num(v, false)) if v >= 0.0 && v.fract() == 0.0 => e = v as u32,
                        _ => return self.fail("exponent must be a nonnegative integer"),
                    }
                }
                if kind == 'x' {
                    t.xs.push((idx, e));
                } else {
                    t.ps.push((idx, e));
                }
            }
            Some(other) => return self.fail(format!("unexpected token {other:?}")),
            None => return self.fail("unexpected end of equation"),
        }
        Ok(())
    }

    /// `( a + b i )` style complex constants.
    fn parenthesized_constant(&mut self) -> Result<C64> {
        let mut total = c64(0.0, 0.0);
        let mut sign = 1.0;
        loop {
            match self.next() {
                Some(Tok::Minus) => sign = -sign,
                Some(Tok::Plus) => {}
                Some(Tok::Num(v, imag)) => {
                    total += if imag { c64(0.0, sign * v) } else { c64(sign * v, 0.0) };
                    sign = 1.0;
                }
                Some(Tok::RParen) => return Ok(total),
                _ => return self.fail("only numeric constants are allowed inside parentheses"),
            }
        }
    }
}

/// Parses the plain-text system format; `file` is used in diagnostics.
pub fn parse_system(text: &str, file: &str) -> Result<ParameterizedSystem> {
    let mut raw: Vec<(usize, Vec<RawTerm>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let toks = tokenize(content, file, lineno + 1)?;
        let mut parser = Parser {
            toks,
            pos: 0,
            file,
            line: lineno + 1,
        };
        raw.push((lineno + 1, parser.expression()?));
    }
    if raw.is_empty() {
        return Err(err(file, 0, "no equations found"));
    }
    let n = raw.len();
    let k = raw
        .iter()
        .flat_map(|(_, ts)| ts.iter().flat_map(|t| t.ps.iter().map(|&(j, _)| j)))
        .max()
        .unwrap_or(0);
    let mut equations = Vec::with_capacity(n);
    for (line, terms) in raw {
        let mut eq = Vec::with_capacity(terms.len());
        for t in terms {
            let mut x_exp = vec![0u32; n];
            for (i, e) in t.xs {
                if i > n {
                    return Err(err(
                        file,
                        line,
                        format!("x{i} used but the system has only {n} equations"),
                    ));
                }
                x_exp[i - 1] += e;
            }
            let mut p_exp = vec![0u32; k];
            for (j, e) in t.ps {
                p_exp[j - 1] += e;
            }
            eq.push(Term::new(t.coeff, x_exp, p_exp));
        }
        equations.push(eq);
    }
    ParameterizedSystem::new(n, k, equations)
}
