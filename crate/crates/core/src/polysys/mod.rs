//! Parameterized polynomial systems `f(x; p)` stored as explicit term lists.
//!
//! A system has `n` equations in `n` unknowns and `k` parameters. Every
//! equation is a list of [`Term`]s; partial derivatives with respect to each
//! unknown and each parameter are expanded once at construction, so
//! evaluation and exact Jacobians share one power table per call.

mod models;
mod parse;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numcore::{c64, CMat, CVec, C64};

pub use models::{kuramoto_system, ModelId};
pub use parse::parse_system;

/// One monomial `coeff * x^x_exp * p^p_exp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: C64,
    pub x_exp: Vec<u32>,
    pub p_exp: Vec<u32>,
}

impl Term {
    pub fn new(coeff: C64, x_exp: Vec<u32>, p_exp: Vec<u32>) -> Self {
        Self {
            coeff,
            x_exp,
            p_exp,
        }
    }

    pub fn real(coeff: f64, x_exp: Vec<u32>, p_exp: Vec<u32>) -> Self {
        Self::new(c64(coeff, 0.0), x_exp, p_exp)
    }

    pub fn x_degree(&self) -> u32 {
        self.x_exp.iter().sum()
    }
}

/// Sparse monomial over the stacked vector `z = [x; p]`.
#[derive(Clone, Debug)]
struct Monomial {
    coeff: C64,
    factors: Vec<(usize, u32)>,
}

#[derive(Clone, Debug, Default)]
struct Compiled(Vec<Monomial>);

impl Compiled {
    fn from_terms(terms: &[Term]) -> Self {
        Compiled(
            terms
                .iter()
                .map(|t| Monomial {
                    coeff: t.coeff,
                    factors: t
                        .x_exp
                        .iter()
                        .chain(t.p_exp.iter())
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(v, &e)| (v, e))
                        .collect(),
                })
                .collect(),
        )
    }

    fn eval(&self, pw: &PowerTable) -> C64 {
        let mut acc = c64(0.0, 0.0);
        for m in &self.0 {
            let mut v = m.coeff;
            for &(var, e) in &m.factors {
                v *= pw.get(var, e);
            }
            acc += v;
        }
        acc
    }
}

/// `z[v]^e` for every variable and every exponent that occurs.
struct PowerTable {
    offsets: Vec<usize>,
    values: Vec<C64>,
}

impl PowerTable {
    fn new(z: impl Iterator<Item = C64>, max_exp: &[u32]) -> Self {
        let mut offsets = Vec::with_capacity(max_exp.len());
        let mut values = Vec::new();
        for (zv, &me) in z.zip(max_exp) {
            offsets.push(values.len());
            let mut acc = c64(1.0, 0.0);
            values.push(acc);
            for _ in 0..me {
                acc *= zv;
                values.push(acc);
            }
        }
        Self { offsets, values }
    }

    #[inline]
    fn get(&self, var: usize, e: u32) -> C64 {
        self.values[self.offsets[var] + e as usize]
    }
}

/// A well-constrained family `f(x; p) = 0` with exact derivatives.
#[derive(Clone, Debug)]
pub struct ParameterizedSystem {
    n: usize,
    k: usize,
    equations: Vec<Vec<Term>>,
    degrees: Vec<u32>,
    max_exp: Vec<u32>,
    f: Vec<Compiled>,
    // [equation][unknown] and [equation][parameter]
    dfdx: Vec<Vec<Compiled>>,
    dfdp: Vec<Vec<Compiled>>,
}

/// Merges like terms and drops zero coefficients; deterministic order.
fn normalize(terms: Vec<Term>) -> Vec<Term> {
    let mut acc: BTreeMap<(Vec<u32>, Vec<u32>), C64> = BTreeMap::new();
    for t in terms {
        *acc.entry((t.x_exp, t.p_exp)).or_insert(c64(0.0, 0.0)) += t.coeff;
    }
    acc.into_iter()
        .filter(|(_, c)| c.norm() != 0.0)
        .map(|((x_exp, p_exp), coeff)| Term {
            coeff,
            x_exp,
            p_exp,
        })
        .collect()
}

fn differentiate(terms: &[Term], var: usize, n: usize) -> Vec<Term> {
    let out = terms.iter().filter_map(|t| {
        let e = if var < n {
            t.x_exp[var]
        } else {
            t.p_exp[var - n]
        };
        if e == 0 {
            return None;
        }
        let mut d = t.clone();
        d.coeff *= e as f64;
        if var < n {
            d.x_exp[var] -= 1;
        } else {
            d.p_exp[var - n] -= 1;
        }
        Some(d)
    });
    normalize(out.collect())
}

impl ParameterizedSystem {
    /// Builds a system from `n` equations over `n` unknowns and `k` parameters.
    pub fn new(n: usize, k: usize, equations: Vec<Vec<Term>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSystem("no unknowns".into()));
        }
        if equations.len() != n {
            return Err(Error::InvalidSystem(format!(
                "{} equations for {} unknowns; the system must be square",
                equations.len(),
                n
            )));
        }
        for (i, eq) in equations.iter().enumerate() {
            for t in eq {
                if t.x_exp.len() != n || t.p_exp.len() != k {
                    return Err(Error::InvalidSystem(format!(
                        "equation {}: exponent vector lengths ({}, {}) do not match (n, k) = ({n}, {k})",
                        i + 1,
                        t.x_exp.len(),
                        t.p_exp.len()
                    )));
                }
                if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                    return Err(Error::NonFinite("term coefficient"));
                }
            }
        }
        let equations: Vec<Vec<Term>> = equations.into_iter().map(normalize).collect();
        let degrees = equations
            .iter()
            .map(|eq| eq.iter().map(Term::x_degree).max().unwrap_or(0))
            .collect();
        let mut max_exp = vec![0u32; n + k];
        for t in equations.iter().flatten() {
            for (v, &e) in t.x_exp.iter().chain(t.p_exp.iter()).enumerate() {
                max_exp[v] = max_exp[v].max(e);
            }
        }
        let f = equations.iter().map(|eq| Compiled::from_terms(eq)).collect();
        let dfdx = equations
            .iter()
            .map(|eq| {
                (0..n)
                    .map(|j| Compiled::from_terms(&differentiate(eq, j, n)))
                    .collect()
            })
            .collect();
        let dfdp = equations
            .iter()
            .map(|eq| {
                (0..k)
                    .map(|j| Compiled::from_terms(&differentiate(eq, n + j, n)))
                    .collect()
            })
            .collect();
        Ok(Self {
            n,
            k,
            equations,
            degrees,
            max_exp,
            f,
            dfdx,
            dfdp,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn equations(&self) -> &[Vec<Term>] {
        &self.equations
    }

    /// Total degree in the unknowns, per equation.
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// True when every coefficient is real.
    pub fn has_real_coefficients(&self) -> bool {
        self.equations
            .iter()
            .flatten()
            .all(|t| t.coeff.im == 0.0)
    }

    fn powers(&self, x: &[C64], p: &[C64]) -> Result<PowerTable> {
        check_dim("unknowns", self.n, x.len())?;
        check_dim("parameters", self.k, p.len())?;
        Ok(PowerTable::new(
            x.iter().chain(p.iter()).copied(),
            &self.max_exp,
        ))
    }

    pub fn evaluate(&self, x: &[C64], p: &[C64]) -> Result<CVec> {
        let pw = self.powers(x, p)?;
        Ok(CVec::from_iterator(
            self.n,
            self.f.iter().map(|c| c.eval(&pw)),
        ))
    }

    /// `(J_x f, J_p f)` at `(x, p)`.
    pub fn jacobians(&self, x: &[C64], p: &[C64]) -> Result<(CMat, CMat)> {
        let pw = self.powers(x, p)?;
        Ok((self.jx(&pw), self.jp(&pw)))
    }

    /// Value, `J_x f` and `J_p f` from one shared power table.
    pub fn evaluate_all(&self, x: &[C64], p: &[C64]) -> Result<(CVec, CMat, CMat)> {
        let pw = self.powers(x, p)?;
        let f = CVec::from_iterator(self.n, self.f.iter().map(|c| c.eval(&pw)));
        Ok((f, self.jx(&pw), self.jp(&pw)))
    }

    /// Value and `J_x f` only.
    pub fn evaluate_with_jx(&self, x: &[C64], p: &[C64]) -> Result<(CVec, CMat)> {
        let pw = self.powers(x, p)?;
        let f = CVec::from_iterator(self.n, self.f.iter().map(|c| c.eval(&pw)));
        Ok((f, self.jx(&pw)))
    }

    fn jx(&self, pw: &PowerTable) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| self.dfdx[i][j].eval(pw))
    }

    fn jp(&self, pw: &PowerTable) -> CMat {
        CMat::from_fn(self.n, self.k, |i, j| self.dfdp[i][j].eval(pw))
    }

    /// Renders the system in the plain-text input format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for eq in &self.equations {
            let mut first = true;
            for t in eq {
                let (sep, coeff) = if t.coeff.im == 0.0 {
                    match (first, t.coeff.re < 0.0) {
                        (true, _) => ("", format!("{}", t.coeff.re)),
                        (false, true) => (" - ", format!("{}", -t.coeff.re)),
                        (false, false) => (" + ", format!("{}", t.coeff.re)),
                    }
                } else {
                    let sep = if first { "" } else { " + " };
                    (sep, format!("({}{:+}i)", t.coeff.re, t.coeff.im))
                };
                first = false;
                out.push_str(sep);
                out.push_str(&coeff);
                for (i, &e) in t.x_exp.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => out.push_str(&format!("*x{}", i + 1)),
                        e => out.push_str(&format!("*x{}^{e}", i + 1)),
                    }
                }
                for (j, &e) in t.p_exp.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => out.push_str(&format!("*p{}", j + 1)),
                        e => out.push_str(&format!("*p{}^{e}", j + 1)),
                    }
                }
            }
            if first {
                out.push('0');
            }
            out.push('\n');
        }
        out
    }
}
