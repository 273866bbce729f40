//! Witness points of the discriminant on real lines in parameter space.
//!
//! Restricting `f` to a line `p = q + λ u` and adding a singularity condition
//! gives a square "critical" system whose `λ`-coordinates are the points
//! where the line meets the discriminant. For `n ≥ 2` the condition is a
//! null vector `w` of `J_x f` normalized by a random patch `⟨a, w⟩ = 1`;
//! for one unknown it is simply `∂f/∂x = 0`.
//!
//! The critical system is itself a parameterized family with parameters
//! `(q, u)` or `(q, u, a)`, so it is solved once generically and then moved
//! to each real line by a parameter homotopy.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numcore::{c64, C64};
use crate::polysys::{ParameterizedSystem, Term};
use crate::region::ParamBox;
use crate::rng::{domain, random_gamma};
use crate::solver::{parameter_homotopy, solve_generic_in, GenericStart, SolveOptions};
use crate::tracker::{PathResult, PathStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    /// Unknowns `(x, λ)`; equations `f`, `∂f/∂x`. One unknown only.
    Det,
    /// Unknowns `(x, w, λ)`; equations `f`, `J_x f · w`, `⟨a, w⟩ - 1`.
    NullSpace,
}

#[derive(Clone, Debug)]
pub struct CriticalSystem {
    formulation: Formulation,
    n: usize,
    k: usize,
    system: ParameterizedSystem,
}

fn binomial(n: u32, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expands `term(x; q + λ u)` into terms over the critical unknowns and
/// parameters. `x_slot` maps original unknowns into the new unknown vector.
fn restrict_to_line(
    term: &Term,
    n_new: usize,
    k_new: usize,
    lambda_slot: usize,
    extra_x: Option<usize>,
) -> Vec<Term> {
    let n = term.x_exp.len();
    let k = term.p_exp.len();
    // (coefficient, λ power, q exponents, u exponents)
    let mut parts: Vec<(C64, u32, Vec<u32>, Vec<u32>)> = vec![(term.coeff, 0, vec![0; k], vec![0; k])];
    for (j, &b) in term.p_exp.iter().enumerate() {
        if b == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(parts.len() * (b as usize + 1));
        for (c, lp, qe, ue) in &parts {
            for m in 0..=b {
                let mut qe = qe.clone();
                let mut ue = ue.clone();
                qe[j] = b - m;
                ue[j] = m;
                next.push((*c * binomial(b, m), lp + m, qe, ue));
            }
        }
        parts = next;
    }
    parts
        .into_iter()
        .map(|(coeff, lp, qe, ue)| {
            let mut x_exp = vec![0u32; n_new];
            x_exp[..n].copy_from_slice(&term.x_exp);
            x_exp[lambda_slot] += lp;
            if let Some(w) = extra_x {
                x_exp[w] += 1;
            }
            let mut p_exp = vec![0u32; k_new];
            p_exp[..k].copy_from_slice(&qe);
            p_exp[k..2 * k].copy_from_slice(&ue);
            Term::new(coeff, x_exp, p_exp)
        })
        .collect()
}

fn x_derivative(terms: &[Term], var: usize) -> Vec<Term> {
    terms
        .iter()
        .filter(|t| t.x_exp[var] > 0)
        .map(|t| {
            let mut d = t.clone();
            d.coeff *= t.x_exp[var] as f64;
            d.x_exp[var] -= 1;
            d
        })
        .collect()
}

impl CriticalSystem {
    /// `Det` for one unknown, `NullSpace` otherwise.
    pub fn new(base: &ParameterizedSystem) -> Result<Self> {
        let f = if base.n() == 1 {
            Formulation::Det
        } else {
            Formulation::NullSpace
        };
        Self::with_formulation(base, f)
    }

    pub fn with_formulation(base: &ParameterizedSystem, formulation: Formulation) -> Result<Self> {
        let n = base.n();
        let k = base.k();
        if k == 0 {
            return Err(Error::InvalidSystem("the system has no parameters".into()));
        }
        let equations = match formulation {
            Formulation::Det => {
                if n != 1 {
                    return Err(Error::InvalidConfig(
                        "the determinant formulation needs exactly one unknown".into(),
                    ));
                }
                let (nn, kk, lam) = (2, 2 * k, 1);
                let eq = &base.equations()[0];
                vec![
                    eq.iter().flat_map(|t| restrict_to_line(t, nn, kk, lam, None)).collect(),
                    x_derivative(eq, 0)
                        .iter()
                        .flat_map(|t| restrict_to_line(t, nn, kk, lam, None))
                        .collect(),
                ]
            }
            Formulation::NullSpace => {
                let (nn, kk, lam) = (2 * n + 1, 2 * k + n, 2 * n);
                let mut eqs: Vec<Vec<Term>> = base
                    .equations()
                    .iter()
                    .map(|eq| eq.iter().flat_map(|t| restrict_to_line(t, nn, kk, lam, None)).collect())
                    .collect();
                for eq in base.equations() {
                    let mut row = Vec::new();
                    for j in 0..n {
                        for t in x_derivative(eq, j) {
                            row.extend(restrict_to_line(&t, nn, kk, lam, Some(n + j)));
                        }
                    }
                    eqs.push(row);
                }
                let mut patch = Vec::with_capacity(n + 1);
                for j in 0..n {
                    let mut x_exp = vec![0u32; nn];
                    x_exp[n + j] = 1;
                    let mut p_exp = vec![0u32; kk];
                    p_exp[2 * k + j] = 1;
                    patch.push(Term::real(1.0, x_exp, p_exp));
                }
                patch.push(Term::real(-1.0, vec![0; nn], vec![0; kk]));
                eqs.push(patch);
                eqs
            }
        };
        let (nn, kk) = match formulation {
            Formulation::Det => (2, 2 * k),
            Formulation::NullSpace => (2 * n + 1, 2 * k + n),
        };
        Ok(Self {
            formulation,
            n,
            k,
            system: ParameterizedSystem::new(nn, kk, equations)?,
        })
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    /// The critical family as an ordinary parameterized system.
    pub fn system(&self) -> &ParameterizedSystem {
        &self.system
    }

    /// Index of `λ` in the critical unknowns.
    pub fn lambda_index(&self) -> usize {
        match self.formulation {
            Formulation::Det => 1,
            Formulation::NullSpace => 2 * self.n,
        }
    }

    /// Stacks `(q, u)` and, for the null-space form, the patch `a`.
    pub fn params(&self, q: &[C64], u: &[C64], patch: &[C64]) -> Result<Vec<C64>> {
        check_dim("line base point", self.k, q.len())?;
        check_dim("line direction", self.k, u.len())?;
        let mut out = Vec::with_capacity(self.system.k());
        out.extend_from_slice(q);
        out.extend_from_slice(u);
        if self.formulation == Formulation::NullSpace {
            check_dim("patch", self.n, patch.len())?;
            out.extend_from_slice(patch);
        }
        Ok(out)
    }

    /// Length of the patch vector (zero for `Det`).
    pub fn patch_len(&self) -> usize {
        match self.formulation {
            Formulation::Det => 0,
            Formulation::NullSpace => self.n,
        }
    }
}

/// Distinct values up to `tol` relative to magnitude; keeps first occurrences.
fn distinct_complex(values: &[C64], tol: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for &v in values {
        if !out.iter().any(|&o| (o - v).norm() <= tol * o.norm().max(v.norm()).max(1.0)) {
            out.push(v);
        }
    }
    out
}

/// Generic start of the critical family on a random complex line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalStart {
    pub start: GenericStart,
    /// Distinct `λ` values among the generic solutions.
    pub degree: usize,
}

pub fn critical_generic_start(crit: &CriticalSystem, seed: u64, opts: &SolveOptions) -> Result<CriticalStart> {
    let start = solve_generic_in(crit.system(), seed, domain::CRITICAL_START, opts)?;
    CriticalStart::from_start(crit, start, opts)
}

impl CriticalStart {
    /// Wraps a stored generic solve of `crit`, e.g. one read from a cache.
    pub fn from_start(crit: &CriticalSystem, start: GenericStart, opts: &SolveOptions) -> Result<Self> {
        start.validate(crit.system(), opts)?;
        let li = crit.lambda_index();
        let lambdas: Vec<C64> = start.solutions.iter().map(|s| s[li]).collect();
        let degree = distinct_complex(&lambdas, opts.dedup_tol).len();
        Ok(Self { start, degree })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessLine {
    pub p_star: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda_enter: f64,
    pub lambda_exit: f64,
    /// Real crossings inside the box, strictly increasing.
    pub lambdas: Vec<f64>,
    /// Distinct finite complex `λ` found on this line.
    pub degree_observed: usize,
    pub paths_failed: usize,
    pub paths_diverged: usize,
}

/// Real crossings of the line `p* + λ v` with the discriminant inside `omega`.
///
/// Paths that diverge are taken as crossings at infinity and ignored; any
/// other failure counts against the line, which is rejected when more than
/// a fifth of the paths fail.
pub fn witness_on_line<R: Rng + ?Sized>(
    crit: &CriticalSystem,
    crit_start: &CriticalStart,
    p_star: &[f64],
    v: &[f64],
    omega: &ParamBox,
    rng: &mut R,
    opts: &SolveOptions,
) -> Result<WitnessLine> {
    let (enter, exit) = omega.line_interval(p_star, v)?;
    let patch: Vec<C64> = (0..crit.patch_len())
        .map(|_| c64(rng.sample(StandardNormal), 0.0))
        .collect();
    let q: Vec<C64> = p_star.iter().map(|&a| c64(a, 0.0)).collect();
    let u: Vec<C64> = v.iter().map(|&a| c64(a, 0.0)).collect();
    let target = crit.params(&q, &u, &patch)?;
    let gamma = random_gamma(rng);
    let results = parameter_homotopy(crit.system(), &crit_start.start, &target, gamma, opts)?;

    // A path that reaches t = 0 on a singular point is a multiple
    // intersection (a line through a cusp, say), still a valid λ.
    let landed = |r: &PathResult| {
        r.is_success()
            || (r.status == PathStatus::SingularJacobian && r.t_reached == 0.0 && r.residual <= opts.residual_tol)
    };
    let total = results.len();
    let diverged = results.iter().filter(|r| r.status == PathStatus::Diverged).count();
    let failed = results
        .iter()
        .filter(|r| !landed(r) && r.status != PathStatus::Diverged)
        .count();
    if failed * 5 > total {
        return Err(Error::WitnessFailed { failed, total });
    }

    let li = crit.lambda_index();
    let finite: Vec<C64> = results
        .iter()
        .filter(|r| landed(r))
        .map(|r| r.endpoint[li])
        .collect();
    let degree_observed = distinct_complex(&finite, opts.dedup_tol).len();

    let mut real: Vec<f64> = finite
        .iter()
        .filter(|z| z.im.abs() < opts.tol_im && z.re > enter && z.re < exit)
        .map(|z| z.re)
        .collect();
    real.sort_by(f64::total_cmp);
    let mut lambdas: Vec<f64> = Vec::with_capacity(real.len());
    for l in real {
        match lambdas.last() {
            Some(&prev) if (l - prev).abs() <= opts.dedup_tol * l.abs().max(1.0) => {}
            _ => lambdas.push(l),
        }
    }
    Ok(WitnessLine {
        p_star: p_star.to_vec(),
        v: v.to_vec(),
        lambda_enter: enter,
        lambda_exit: exit,
        lambdas,
        degree_observed,
        paths_failed: failed,
        paths_diverged: diverged,
    })
}
