//! Complex scalar/vector/matrix helpers and the dense LU solve used by
//! every Newton step in the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Relative pivot threshold below which a matrix is reported singular.
pub const PIVOT_RTOL: f64 = 1e-14;

pub const fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Largest complex modulus over the entries; zero for an empty vector.
pub fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn mat_inf_norm(a: &CMat) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn is_finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(what: &'static str, v: &[C64]) -> Result<()> {
    if is_finite(v) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn real_to_complex(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&r| c64(r, 0.0)))
}

/// Solves `A y = b` by LU with partial (row) pivoting.
///
/// A pivot whose modulus falls below `PIVOT_RTOL * ‖A‖∞` aborts with
/// [`Error::SingularMatrix`].
pub fn lu_solve(a: &CMat, b: &[C64]) -> Result<CVec> {
    let n = a.nrows();
    check_dim("lu_solve: columns", n, a.ncols())?;
    check_dim("lu_solve: right-hand side", n, b.len())?;
    let norm = mat_inf_norm(a);
    let threshold = PIVOT_RTOL * norm;
    if n == 0 {
        return Ok(CVec::zeros(0));
    }
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::SingularMatrix {
            pivot: 0.0,
            threshold,
        });
    }

    // Row-major working copy; nalgebra stores column-major.
    let mut m: Vec<C64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            m.push(a[(i, j)]);
        }
    }
    let mut y: Vec<C64> = b.to_vec();

    for col in 0..n {
        let (piv_row, piv_mag) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_mag < threshold || piv_mag == 0.0 {
            return Err(Error::SingularMatrix {
                pivot: piv_mag,
                threshold,
            });
        }
        if piv_row != col {
            for j in 0..n {
                m.swap(col * n + j, piv_row * n + j);
            }
            y.swap(col, piv_row);
        }
        let pivot = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            m[r * n + col] = factor;
            for j in col + 1..n {
                let upper = m[col * n + j];
                m[r * n + j] -= factor * upper;
            }
            let yc = y[col];
            y[r] -= factor * yc;
        }
    }

    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= m[i * n + j] * y[j];
        }
        y[i] = acc / m[i * n + i];
    }
    Ok(CVec::from_vec(y))
}
