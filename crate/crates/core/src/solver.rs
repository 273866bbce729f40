//! Generic complex solves and parameter homotopies.
//!
//! A family is solved once at a random complex parameter `p0` by a
//! total-degree homotopy. Any other parameter value is then reached by
//! tracking those solutions along
//! `H(x, t) = f(x; τ(t) p0 + (1 - τ(t)) p)` with
//! `τ(t) = γ t / (1 + (γ - 1) t)`, which for generic `γ` keeps every path
//! away from the discriminant.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{c64, inf_norm, lu_solve, real_to_complex, CMat, CVec, C64};
use crate::polysys::ParameterizedSystem;
use crate::rng::{complex_gaussian, domain, random_gamma, stream};
use crate::tracker::{newton_polish, track_path, track_paths, Homotopy, PathResult, TrackSettings};

/// Smallest admissible `|1 + (γ - 1) t|` on `t ∈ [0, 1]`.
const TAU_DENOM_MIN: f64 = 1e-12;

fn tau_denominator(t: f64, gamma: C64) -> Result<C64> {
    let den = 1.0 + (gamma - 1.0) * t;
    if den.norm() < TAU_DENOM_MIN {
        return Err(Error::DegenerateGamma { t });
    }
    Ok(den)
}

/// `τ(t) = γ t / (1 + (γ - 1) t)`.
pub fn tau(t: f64, gamma: C64) -> Result<C64> {
    Ok(gamma * t / tau_denominator(t, gamma)?)
}

/// `τ'(t) = γ / (1 + (γ - 1) t)^2`.
pub fn tau_derivative(t: f64, gamma: C64) -> Result<C64> {
    let den = tau_denominator(t, gamma)?;
    Ok(gamma / (den * den))
}

/// Rejects `γ` for which the denominator of `τ` vanishes somewhere on `[0, 1]`.
pub fn check_gamma(gamma: C64) -> Result<()> {
    if !(gamma.re.is_finite() && gamma.im.is_finite()) {
        return Err(Error::NonFinite("gamma"));
    }
    // 1 + (γ - 1) t runs along the segment from 1 to γ; find its point closest to 0.
    let d = gamma - 1.0;
    let dn = d.norm_sqr();
    let t = if dn == 0.0 { 0.0 } else { (-(d.re)).clamp(0.0, dn) / dn };
    tau_denominator(t, gamma).map(|_| ())
}

/// `H(x, t) = γ t g(x) + (1 - t) f(x; p0)` with `g_i = x_i^{d_i} - 1`.
pub struct TotalDegreeHomotopy<'a> {
    sys: &'a ParameterizedSystem,
    p0: Vec<C64>,
    gamma: C64,
    degrees: Vec<u32>,
}

impl<'a> TotalDegreeHomotopy<'a> {
    pub fn new(sys: &'a ParameterizedSystem, p0: Vec<C64>, gamma: C64) -> Result<Self> {
        crate::error::check_dim("p0", sys.k(), p0.len())?;
        if sys.degrees().contains(&0) {
            return Err(Error::InvalidSystem("an equation does not involve the unknowns".into()));
        }
        Ok(Self {
            sys,
            p0,
            gamma,
            degrees: sys.degrees().to_vec(),
        })
    }

    /// All combinations of `d_i`-th roots of unity, first coordinate slowest.
    pub fn start_points(&self) -> Vec<Vec<C64>> {
        let roots: Vec<Vec<C64>> = self
            .degrees
            .iter()
            .map(|&d| {
                (0..d)
                    .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / d as f64))
                    .collect()
            })
            .collect();
        let mut out: Vec<Vec<C64>> = vec![Vec::new()];
        for r in &roots {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    r.iter().map(move |&z| {
                        let mut v = prefix.clone();
                        v.push(z);
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn g(&self, x: &[C64]) -> CVec {
        CVec::from_iterator(x.len(), x.iter().zip(&self.degrees).map(|(z, &d)| z.powu(d) - 1.0))
    }

    fn g_dx_diag(&self, x: &[C64]) -> Vec<C64> {
        x.iter()
            .zip(&self.degrees)
            .map(|(z, &d)| z.powu(d - 1) * d as f64)
            .collect()
    }
}

impl Homotopy for TotalDegreeHomotopy<'_> {
    fn dim(&self) -> usize {
        self.sys.n()
    }

    fn value(&self, x: &[C64], t: f64) -> CVec {
        let f = self.sys.evaluate(x, &self.p0).expect("dimensions fixed at construction");
        self.g(x) * (self.gamma * t) + f * c64(1.0 - t, 0.0)
    }

    fn dx(&self, x: &[C64], t: f64) -> CMat {
        self.value_and_dx(x, t).1
    }

    fn dt(&self, x: &[C64], _t: f64) -> CVec {
        let f = self.sys.evaluate(x, &self.p0).expect("dimensions fixed at construction");
        self.g(x) * self.gamma - f
    }

    fn value_and_dx(&self, x: &[C64], t: f64) -> (CVec, CMat) {
        let (f, jx) = self.sys.evaluate_with_jx(x, &self.p0).expect("dimensions fixed at construction");
        let s = self.gamma * t;
        let val = self.g(x) * s + f * c64(1.0 - t, 0.0);
        let mut jac = jx * c64(1.0 - t, 0.0);
        for (i, d) in self.g_dx_diag(x).into_iter().enumerate() {
            jac[(i, i)] += s * d;
        }
        (val, jac)
    }

    fn dx_and_dt(&self, x: &[C64], t: f64) -> (CMat, CVec) {
        let (f, jx) = self.sys.evaluate_with_jx(x, &self.p0).expect("dimensions fixed at construction");
        let s = self.gamma * t;
        let ht = self.g(x) * self.gamma - &f;
        let mut jac = jx * c64(1.0 - t, 0.0);
        for (i, d) in self.g_dx_diag(x).into_iter().enumerate() {
            jac[(i, i)] += s * d;
        }
        (jac, ht)
    }
}

/// `H(x, t) = f(x; τ(t) p_start + (1 - τ(t)) p_target)`.
///
/// With `γ = 1` this is the straight segment from `p_start` to `p_target`.
pub struct ParameterHomotopy<'a> {
    sys: &'a ParameterizedSystem,
    p_start: Vec<C64>,
    p_target: Vec<C64>,
    gamma: C64,
}

impl<'a> ParameterHomotopy<'a> {
    pub fn new(sys: &'a ParameterizedSystem, p_start: Vec<C64>, p_target: Vec<C64>, gamma: C64) -> Result<Self> {
        crate::error::check_dim("start parameters", sys.k(), p_start.len())?;
        crate::error::check_dim("target parameters", sys.k(), p_target.len())?;
        check_gamma(gamma)?;
        Ok(Self {
            sys,
            p_start,
            p_target,
            gamma,
        })
    }

    pub fn params_at(&self, t: f64) -> Vec<C64> {
        if t == 0.0 {
            return self.p_target.clone();
        }
        if t == 1.0 {
            return self.p_start.clone();
        }
        let s = tau(t, self.gamma).expect("gamma checked at construction");
        self.p_start
            .iter()
            .zip(&self.p_target)
            .map(|(a, b)| s * a + (1.0 - s) * b)
            .collect()
    }

    fn dp_dt(&self, t: f64) -> Vec<C64> {
        let ds = tau_derivative(t, self.gamma).expect("gamma checked at construction");
        self.p_start.iter().zip(&self.p_target).map(|(a, b)| ds * (a - b)).collect()
    }
}

impl Homotopy for ParameterHomotopy<'_> {
    fn dim(&self) -> usize {
        self.sys.n()
    }

    fn value(&self, x: &[C64], t: f64) -> CVec {
        self.sys.evaluate(x, &self.params_at(t)).expect("dimensions fixed at construction")
    }

    fn dx(&self, x: &[C64], t: f64) -> CMat {
        self.value_and_dx(x, t).1
    }

    fn dt(&self, x: &[C64], t: f64) -> CVec {
        self.dx_and_dt(x, t).1
    }

    fn value_and_dx(&self, x: &[C64], t: f64) -> (CVec, CMat) {
        self.sys
            .evaluate_with_jx(x, &self.params_at(t))
            .expect("dimensions fixed at construction")
    }

    fn dx_and_dt(&self, x: &[C64], t: f64) -> (CMat, CVec) {
        let (_, jx, jp) = self
            .sys
            .evaluate_all(x, &self.params_at(t))
            .expect("dimensions fixed at construction");
        let dp = CVec::from_vec(self.dp_dt(t));
        (jx, jp * dp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Imaginary parts below this count as zero.
    pub tol_im: f64,
    /// Endpoints closer than this (relative to their size) are the same point.
    pub dedup_tol: f64,
    /// Residual bound for accepting a generic solution.
    pub residual_tol: f64,
    /// Fresh draws of `p0`/`γ` (generic solve) or `γ` (labeling) before giving up.
    pub attempts: usize,
    pub polish_iters: usize,
    pub track: TrackSettings,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_im: 1e-6,
            dedup_tol: 1e-8,
            residual_tol: 1e-10,
            attempts: 3,
            polish_iters: 3,
            track: TrackSettings::default(),
        }
    }
}

/// The full complex solution set at one generic parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericStart {
    pub p0: Vec<C64>,
    pub solutions: Vec<Vec<C64>>,
    pub seed: u64,
}

impl GenericStart {
    /// Generic number of complex solutions.
    pub fn d(&self) -> usize {
        self.solutions.len()
    }

    /// Checks shapes, residuals, nonsingularity and distinctness against `sys`.
    pub fn validate(&self, sys: &ParameterizedSystem, opts: &SolveOptions) -> Result<()> {
        crate::error::check_dim("generic start parameters", sys.k(), self.p0.len())?;
        if self.solutions.is_empty() {
            return Err(Error::GenericStartFailed("no solutions".into()));
        }
        for s in &self.solutions {
            crate::error::check_dim("generic start solution", sys.n(), s.len())?;
            let (f, jx) = sys.evaluate_with_jx(s, &self.p0)?;
            if inf_norm(f.as_slice()) > opts.residual_tol {
                return Err(Error::GenericStartFailed("a stored solution has a large residual".into()));
            }
            lu_solve(&jx, f.as_slice())
                .map_err(|_| Error::GenericStartFailed("a stored solution is singular".into()))?;
        }
        if has_near_duplicates(self.solutions.iter().map(|s| s.as_slice()), opts.dedup_tol) {
            return Err(Error::GenericStartFailed("stored solutions are not distinct".into()));
        }
        Ok(())
    }
}

fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
    let scale = inf_norm(a).max(inf_norm(b)).max(1.0);
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * scale)
}

fn has_near_duplicates<'a>(points: impl Iterator<Item = &'a [C64]>, tol: f64) -> bool {
    let pts: Vec<&[C64]> = points.collect();
    (0..pts.len()).any(|i| (0..i).any(|j| close(pts[i], pts[j], tol)))
}

/// One total-degree solve at `p0`; returns the accepted distinct solutions.
fn total_degree_attempt(
    sys: &ParameterizedSystem,
    p0: &[C64],
    gamma: C64,
    opts: &SolveOptions,
) -> Result<Vec<Vec<C64>>> {
    let h = TotalDegreeHomotopy::new(sys, p0.to_vec(), gamma)?;
    let starts = h.start_points();
    let results = track_paths(&h, &starts, &opts.track);
    let target = ParameterHomotopy::new(sys, p0.to_vec(), p0.to_vec(), c64(1.0, 0.0))?;
    let mut sols: Vec<Vec<C64>> = Vec::new();
    for r in results.into_iter().filter(PathResult::is_success) {
        let x = match newton_polish(&target, r.endpoint.as_slice(), 0.0, opts.polish_iters) {
            Ok(x) => x,
            Err(_) => continue,
        };
        let (f, jx) = sys.evaluate_with_jx(x.as_slice(), p0)?;
        if inf_norm(f.as_slice()) > opts.residual_tol || lu_solve(&jx, f.as_slice()).is_err() {
            continue;
        }
        let x: Vec<C64> = x.iter().copied().collect();
        if !sols.iter().any(|s| close(s, &x, opts.dedup_tol)) {
            sols.push(x);
        }
    }
    Ok(sols)
}

/// Solves `f(x; p0) = 0` at a random complex `p0`.
///
/// Each attempt draws a fresh `p0` and `γ`. The first attempt is returned
/// once a second one finds the same number of solutions; a third attempt
/// breaks a disagreement, and if all three disagree the solve fails.
pub fn solve_generic(sys: &ParameterizedSystem, seed: u64, opts: &SolveOptions) -> Result<GenericStart> {
    solve_generic_in(sys, seed, domain::GENERIC_START, opts)
}

pub(crate) fn solve_generic_in(
    sys: &ParameterizedSystem,
    seed: u64,
    stream_domain: u64,
    opts: &SolveOptions,
) -> Result<GenericStart> {
    let mut found: Vec<GenericStart> = Vec::new();
    for attempt in 0..opts.attempts.max(2) {
        let mut rng = stream(seed, stream_domain, attempt as u64);
        let p0: Vec<C64> = (0..sys.k()).map(|_| complex_gaussian(&mut rng)).collect();
        let gamma = random_gamma(&mut rng);
        let solutions = total_degree_attempt(sys, &p0, gamma, opts)?;
        if let Some(prev) = found.iter().find(|g| g.d() == solutions.len() && g.d() > 0) {
            return Ok(prev.clone());
        }
        found.push(GenericStart { p0, solutions, seed });
    }
    Err(Error::GenericStartFailed(format!(
        "solution counts disagree across attempts: {:?}",
        found.iter().map(GenericStart::d).collect::<Vec<_>>()
    )))
}

/// Tracks every generic solution from `start.p0` to `p`, then polishes the
/// successful endpoints. Results are in the order of `start.solutions`.
pub fn parameter_homotopy(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    p: &[C64],
    gamma: C64,
    opts: &SolveOptions,
) -> Result<Vec<PathResult>> {
    let h = ParameterHomotopy::new(sys, start.p0.clone(), p.to_vec(), gamma)?;
    let mut out = Vec::with_capacity(start.d());
    for s in &start.solutions {
        let mut r = track_path(&h, s, &opts.track);
        if r.is_success() {
            if let Ok(x) = newton_polish(&h, r.endpoint.as_slice(), 0.0, opts.polish_iters) {
                r.residual = inf_norm(h.value(x.as_slice(), 0.0).as_slice());
                r.endpoint = x;
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Number of real solutions, stored as a count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub usize);

impl Label {
    pub fn value(self) -> usize {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_real(x: &[C64], tol_im: f64) -> bool {
    x.iter().all(|z| z.im.abs() < tol_im)
}

/// Counts endpoints whose imaginary parts are all below `tol_im`.
pub fn count_real(results: &[PathResult], tol_im: f64) -> Result<Label> {
    let failed = results.iter().filter(|r| !r.is_success()).count();
    if failed > 0 {
        return Err(Error::CountUnreliable {
            failed,
            total: results.len(),
        });
    }
    Ok(Label(
        results
            .iter()
            .filter(|r| is_real(r.endpoint.as_slice(), tol_im))
            .count(),
    ))
}

/// Real parts of the real endpoints, in path order.
pub fn real_solutions(results: &[PathResult], tol_im: f64) -> Vec<Vec<f64>> {
    results
        .iter()
        .filter(|r| r.is_success() && is_real(r.endpoint.as_slice(), tol_im))
        .map(|r| r.endpoint.iter().map(|z| z.re).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSolution {
    pub label: Label,
    pub real_solutions: Vec<Vec<f64>>,
    pub endpoints: Vec<CVec>,
    /// `γ` draws used, including the successful one.
    pub attempts: usize,
}

/// Solves `f(x; p) = 0` at a real parameter point and counts real solutions.
///
/// A draw of `γ` is rejected when any path fails or two endpoints coincide;
/// after `opts.attempts` rejected draws the point is reported unlabeled.
pub fn solve_point<R: Rng + ?Sized>(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    p: &[f64],
    rng: &mut R,
    opts: &SolveOptions,
) -> Result<PointSolution> {
    crate::error::check_dim("parameter point", sys.k(), p.len())?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("parameter point"));
    }
    let target = real_to_complex(p);
    for attempt in 1..=opts.attempts.max(1) {
        let gamma = random_gamma(rng);
        let results = parameter_homotopy(sys, start, target.as_slice(), gamma, opts)?;
        let label = match count_real(&results, opts.tol_im) {
            Ok(l) => l,
            Err(_) => continue,
        };
        if has_near_duplicates(results.iter().map(|r| r.endpoint.as_slice()), opts.dedup_tol) {
            continue;
        }
        return Ok(PointSolution {
            label,
            real_solutions: real_solutions(&results, opts.tol_im),
            endpoints: results.into_iter().map(|r| r.endpoint).collect(),
            attempts: attempt,
        });
    }
    Err(Error::LabelFailed(p.to_vec()))
}

/// Real-solution count at `p`; see [`solve_point`].
pub fn label_point<R: Rng + ?Sized>(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    p: &[f64],
    rng: &mut R,
    opts: &SolveOptions,
) -> Result<Label> {
    solve_point(sys, start, p, rng, opts).map(|s| s.label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::ModelId;
    use crate::tracker::PathStatus;

    #[test]
    fn tau_examples() {
        let g = C64::from_polar(1.0, 0.7);
        assert_eq!(tau(0.0, g).unwrap(), c64(0.0, 0.0));
        assert!((tau(1.0, g).unwrap() - 1.0).norm() < 1e-15);
        assert!((tau(0.5, c64(1.0, 0.0)).unwrap() - 0.5).norm() < 1e-15);
        assert!((tau_derivative(0.3, c64(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!(matches!(tau(0.5, c64(-1.0, 0.0)), Err(Error::DegenerateGamma { .. })));
        assert!(check_gamma(c64(-1.0, 0.0)).is_err());
        assert!(check_gamma(c64(-3.0, 0.0)).is_err());
        assert!(check_gamma(g).is_ok());
        assert!(check_gamma(c64(1.0, 0.0)).is_ok());
    }

    #[test]
    fn total_degree_starts() {
        let sys = ModelId::Kuramoto(3).system();
        let h = TotalDegreeHomotopy::new(&sys, vec![c64(0.1, 0.2), c64(-0.3, 0.1)], c64(0.6, 0.8)).unwrap();
        let starts = h.start_points();
        assert_eq!(starts.len(), 16);
        for s in &starts {
            assert!(inf_norm(h.g(s).as_slice()) < 1e-14);
        }
    }

    #[test]
    fn generic_counts_small_models() {
        let opts = SolveOptions::default();
        for (m, d) in [(ModelId::Quadratic, 2), (ModelId::Cubic, 3), (ModelId::ConjSquare, 4)] {
            let sys = m.system();
            let g = solve_generic(&sys, 11, &opts).unwrap();
            assert_eq!(g.d(), d, "{m}");
            g.validate(&sys, &opts).unwrap();
        }
    }

    #[test]
    fn quadratic_labels() {
        let sys = ModelId::Quadratic.system();
        let opts = SolveOptions::default();
        let g = solve_generic(&sys, 3, &opts).unwrap();
        let mut rng = stream(3, domain::MISC, 0);
        assert_eq!(label_point(&sys, &g, &[0.0, -0.5], &mut rng, &opts).unwrap(), Label(2));
        assert_eq!(label_point(&sys, &g, &[0.0, 0.5], &mut rng, &opts).unwrap(), Label(0));
        let s = solve_point(&sys, &g, &[0.0, -0.25], &mut rng, &opts).unwrap();
        let mut xs: Vec<f64> = s.real_solutions.iter().map(|x| x[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 0.5).abs() < 1e-10 && (xs[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn count_real_requires_success() {
        let ok = PathResult {
            status: PathStatus::Success,
            endpoint: CVec::from_vec(vec![c64(1.0, 1e-9)]),
            t_reached: 0.0,
            steps_taken: 3,
            residual: 0.0,
        };
        let mut bad = ok.clone();
        bad.status = PathStatus::Diverged;
        assert_eq!(count_real(&[ok.clone()], 1e-6).unwrap(), Label(1));
        assert_eq!(count_real(&[ok.clone()], 1e-10).unwrap(), Label(0));
        assert!(matches!(
            count_real(&[ok, bad], 1e-6),
            Err(Error::CountUnreliable { failed: 1, total: 2 })
        ));
    }
}
