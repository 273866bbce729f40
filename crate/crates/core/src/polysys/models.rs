use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ParameterizedSystem, Term};
use crate::error::{Error, Result};

/// The built-in parameterized families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    /// `x^2 + b x + c` with parameters `(b, c)`.
    Quadratic,
    /// `x^3 + b x + c` with parameters `(b, c)`.
    Cubic,
    /// `[x1^2 - x2^2 - p1, 2 x1 x2 - p2]`; its real discriminant locus is a single point.
    ConjSquare,
    /// Equilibria of `N` coupled Kuramoto oscillators in cos/sin form.
    Kuramoto(usize),
}

impl ModelId {
    pub fn system(&self) -> ParameterizedSystem {
        match *self {
            ModelId::Quadratic => univariate(2),
            ModelId::Cubic => univariate(3),
            ModelId::ConjSquare => ParameterizedSystem::new(
                2,
                2,
                vec![
                    vec![
                        Term::real(1.0, vec![2, 0], vec![0, 0]),
                        Term::real(-1.0, vec![0, 2], vec![0, 0]),
                        Term::real(-1.0, vec![0, 0], vec![1, 0]),
                    ],
                    vec![
                        Term::real(2.0, vec![1, 1], vec![0, 0]),
                        Term::real(-1.0, vec![0, 0], vec![0, 1]),
                    ],
                ],
            )
            .expect("conjsquare system is well formed"),
            ModelId::Kuramoto(n) => kuramoto_system(n).expect("validated oscillator count"),
        }
    }

    /// Parameter box used by default for sampling: `[lo, hi]` per axis.
    pub fn default_box(&self) -> Vec<(f64, f64)> {
        match *self {
            ModelId::Quadratic | ModelId::Cubic | ModelId::ConjSquare => vec![(-1.0, 1.0); 2],
            ModelId::Kuramoto(n) if n <= 3 => vec![(-1.0, 1.0); n - 1],
            ModelId::Kuramoto(n) => {
                let r = (n as f64 - 1.0) / n as f64;
                vec![(-r, r); n - 1]
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            ModelId::Quadratic => "quadratic".into(),
            ModelId::Cubic => "cubic".into(),
            ModelId::ConjSquare => "conjsquare".into(),
            ModelId::Kuramoto(n) => format!("kuramoto{n}"),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "quadratic" => Ok(ModelId::Quadratic),
            "cubic" => Ok(ModelId::Cubic),
            "conjsquare" | "conj-square" => Ok(ModelId::ConjSquare),
            other => {
                let digits = other
                    .strip_prefix("kuramoto")
                    .map(|d| d.trim_start_matches(['-', '_']))
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown model '{s}'")))?;
                let n: usize = digits
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("unknown model '{s}'")))?;
                if n < 2 {
                    return Err(Error::InvalidN(n));
                }
                Ok(ModelId::Kuramoto(n))
            }
        }
    }
}

/// Monic `x^d + b x + c`.
fn univariate(d: u32) -> ParameterizedSystem {
    ParameterizedSystem::new(
        1,
        2,
        vec![vec![
            Term::real(1.0, vec![d], vec![0, 0]),
            Term::real(1.0, vec![1], vec![1, 0]),
            Term::real(1.0, vec![0], vec![0, 1]),
        ]],
    )
    .expect("univariate system is well formed")
}

/// Kuramoto equilibria with `theta_N = 0` and `omega_N` eliminated.
///
/// Unknowns are ordered `(c_1, s_1, ..., c_{N-1}, s_{N-1})`, parameters
/// `(omega_1, ..., omega_{N-1})`. For each oscillator `i < N` the system holds
///
/// ```text
/// omega_i - (1/N) * sum_j (s_i c_j - s_j c_i) = 0
/// c_i^2 + s_i^2 - 1 = 0
/// ```
///
/// where the `j = N` summand reduces to `s_i` because `c_N = 1, s_N = 0`.
pub fn kuramoto_system(n_osc: usize) -> Result<ParameterizedSystem> {
    if n_osc < 2 {
        return Err(Error::InvalidN(n_osc));
    }
    let m = n_osc - 1;
    let nv = 2 * m;
    let inv = 1.0 / n_osc as f64;
    let c = |i: usize| 2 * i;
    let s = |i: usize| 2 * i + 1;
    let mono = |coeff: f64, vars: &[usize], param: Option<usize>| {
        let mut x_exp = vec![0u32; nv];
        for &v in vars {
            x_exp[v] += 1;
        }
        let mut p_exp = vec![0u32; m];
        if let Some(j) = param {
            p_exp[j] = 1;
        }
        Term::real(coeff, x_exp, p_exp)
    };

    let mut equations = Vec::with_capacity(nv);
    for i in 0..m {
        let mut eq = vec![mono(1.0, &[], Some(i))];
        for j in 0..m {
            if j == i {
                continue;
            }
            eq.push(mono(-inv, &[s(i), c(j)], None));
            eq.push(mono(inv, &[s(j), c(i)], None));
        }
        eq.push(mono(-inv, &[s(i)], None));
        equations.push(eq);
        equations.push(vec![
            mono(1.0, &[c(i), c(i)], None),
            mono(1.0, &[s(i), s(i)], None),
            mono(-1.0, &[], None),
        ]);
    }
    ParameterizedSystem::new(nv, m, equations)
}
