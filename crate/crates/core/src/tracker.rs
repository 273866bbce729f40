//! Predictor–corrector tracking of a single homotopy path from `t = 1` to `t = 0`.
//!
//! The predictor is an explicit Euler step on the Davidenko equation
//! `dx/dt = -(∂H/∂x)⁻¹ ∂H/∂t`; the corrector runs Newton at fixed `t`.
//! The step in `t` doubles after five consecutive accepted steps and halves
//! whenever the corrector fails.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{inf_norm, lu_solve, CMat, CVec, C64};

/// A homotopy `H(x, t)` in a fixed number of unknowns.
///
/// Implementors may override the combined evaluations when value and
/// derivatives share work.
pub trait Homotopy: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[C64], t: f64) -> CVec;
    fn dx(&self, x: &[C64], t: f64) -> CMat;
    fn dt(&self, x: &[C64], t: f64) -> CVec;

    fn value_and_dx(&self, x: &[C64], t: f64) -> (CVec, CMat) {
        (self.value(x, t), self.dx(x, t))
    }

    fn dx_and_dt(&self, x: &[C64], t: f64) -> (CMat, CVec) {
        (self.dx(x, t), self.dt(x, t))
    }
}

/// A homotopy assembled from three closures.
pub struct FnHomotopy<F, J, D> {
    pub dim: usize,
    pub value: F,
    pub dx: J,
    pub dt: D,
}

impl<F, J, D> Homotopy for FnHomotopy<F, J, D>
where
    F: Fn(&[C64], f64) -> CVec + Sync,
    J: Fn(&[C64], f64) -> CMat + Sync,
    D: Fn(&[C64], f64) -> CVec + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[C64], t: f64) -> CVec {
        (self.value)(x, t)
    }
    fn dx(&self, x: &[C64], t: f64) -> CMat {
        (self.dx)(x, t)
    }
    fn dt(&self, x: &[C64], t: f64) -> CVec {
        (self.dt)(x, t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackSettings {
    /// Corrector residual tolerance on `‖H‖∞`.
    pub tol_newton: f64,
    pub max_newton_iters: usize,
    pub h_init: f64,
    pub h_min: f64,
    /// Upper bound on the step in `t`.
    pub h_max: f64,
    pub step_growth: f64,
    pub step_cut: f64,
    /// Accepted steps in a row before the step grows.
    pub growth_streak: usize,
    /// Budget on predictor–corrector attempts, accepted or not.
    pub max_steps: usize,
    /// `‖x‖∞` beyond which a path is declared to diverge.
    pub divergence_norm: f64,
}

impl Default for TrackSettings {
    fn default() -> Self {
        Self {
            tol_newton: 1e-10,
            max_newton_iters: 3,
            h_init: 1e-2,
            h_min: 1e-14,
            h_max: 0.1,
            step_growth: 2.0,
            step_cut: 0.5,
            growth_streak: 5,
            max_steps: 100_000,
            divergence_norm: 1e10,
        }
    }
}

impl TrackSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h_min > 0.0
            && self.h_min < self.h_init
            && self.h_init <= 1.0
            && self.h_init <= self.h_max
            && self.tol_newton > 0.0
            && self.step_growth > 1.0
            && self.step_cut > 0.0
            && self.step_cut < 1.0
            && self.max_newton_iters > 0
            && self.divergence_norm > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid track settings {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathStatus {
    Success,
    Diverged,
    StepSizeUnderflow,
    MaxSteps,
    SingularJacobian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    /// Final point; a solution of `H(·, 0)` only when `status` is `Success`.
    pub endpoint: CVec,
    pub t_reached: f64,
    /// Accepted steps.
    pub steps_taken: usize,
    pub residual: f64,
}

impl PathResult {
    pub fn is_success(&self) -> bool {
        self.status == PathStatus::Success
    }
}

enum CorrectorFailure {
    Singular,
    NoConvergence,
}

/// Newton at fixed `t` with contracting updates. Converged once `‖H‖∞ ≤ tol`
/// or the last update is below `tol` relative to `max(1, ‖x‖∞)`; the second
/// test keeps large-norm points, whose residual cannot drop below rounding
/// level, trackable.
fn correct<H: Homotopy + ?Sized>(
    h: &H,
    x0: CVec,
    t: f64,
    s: &TrackSettings,
) -> std::result::Result<(CVec, f64), CorrectorFailure> {
    let mut x = x0;
    let mut prev_update = f64::INFINITY;
    for _ in 0..s.max_newton_iters {
        let (val, jac) = h.value_and_dx(x.as_slice(), t);
        let res = inf_norm(val.as_slice());
        if !res.is_finite() {
            return Err(CorrectorFailure::NoConvergence);
        }
        if res <= s.tol_newton {
            return Ok((x, res));
        }
        let delta = lu_solve(&jac, val.as_slice()).map_err(|_| CorrectorFailure::Singular)?;
        let update = inf_norm(delta.as_slice());
        // A non-contracting update means the predictor left the basin of this path.
        if update > 0.5 * prev_update {
            return Err(CorrectorFailure::NoConvergence);
        }
        prev_update = update;
        x -= delta;
        if update <= s.tol_newton * inf_norm(x.as_slice()).max(1.0) {
            return Ok((x, res));
        }
    }
    let res = inf_norm(h.value(x.as_slice(), t).as_slice());
    if res <= s.tol_newton {
        Ok((x, res))
    } else {
        Err(CorrectorFailure::NoConvergence)
    }
}

/// Tracks the path through `start` at `t = 1` down to `t = 0`.
pub fn track_path<H: Homotopy + ?Sized>(h: &H, start: &[C64], s: &TrackSettings) -> PathResult {
    let mut x = CVec::from_column_slice(start);
    let mut t = 1.0;
    let mut step = s.h_init;
    let mut streak = 0usize;
    let mut accepted = 0usize;
    let mut attempts = 0usize;

    let finish = |status, x: CVec, t: f64, accepted: usize, res: f64| PathResult {
        status,
        endpoint: x,
        t_reached: t,
        steps_taken: accepted,
        residual: res,
    };

    let mut residual = inf_norm(h.value(x.as_slice(), t).as_slice());
    if residual > s.tol_newton {
        match correct(h, x.clone(), t, s) {
            Ok((xc, r)) => {
                x = xc;
                residual = r;
            }
            Err(CorrectorFailure::Singular) => {
                return finish(PathStatus::SingularJacobian, x, t, 0, residual)
            }
            Err(CorrectorFailure::NoConvergence) => {}
        }
    }

    // Davidenko direction at the current accepted point, reused across step cuts.
    let mut tangent: Option<CVec> = None;
    while t > 0.0 {
        if attempts >= s.max_steps {
            return finish(PathStatus::MaxSteps, x, t, accepted, residual);
        }
        attempts += 1;

        let dir = match &tangent {
            Some(d) => d.clone(),
            None => {
                let (jac, ht) = h.dx_and_dt(x.as_slice(), t);
                match lu_solve(&jac, ht.as_slice()) {
                    Ok(d) => {
                        tangent = Some(d.clone());
                        d
                    }
                    Err(_) => return finish(PathStatus::SingularJacobian, x, t, accepted, residual),
                }
            }
        };

        let h_step = step.min(t);
        let t_new = if h_step >= t { 0.0 } else { t - h_step };
        // x(t_new) ≈ x - (t_new - t) (Hx⁻¹ Ht)
        let predicted = &x + &dir * C64::new(t - t_new, 0.0);

        match correct(h, predicted, t_new, s) {
            Ok((xc, r)) => {
                x = xc;
                residual = r;
                t = t_new;
                accepted += 1;
                tangent = None;
                if inf_norm(x.as_slice()) > s.divergence_norm {
                    return finish(PathStatus::Diverged, x, t, accepted, residual);
                }
                streak += 1;
                if streak >= s.growth_streak {
                    step = (step * s.step_growth).min(s.h_max);
                    streak = 0;
                }
            }
            Err(fail) => {
                let singular = matches!(fail, CorrectorFailure::Singular);
                streak = 0;
                step *= s.step_cut;
                if step < s.h_min {
                    let status = if singular {
                        PathStatus::SingularJacobian
                    } else {
                        PathStatus::StepSizeUnderflow
                    };
                    return finish(status, x, t, accepted, residual);
                }
            }
        }
    }
    let res = inf_norm(h.value(x.as_slice(), 0.0).as_slice());
    if singular_endpoint(h, &x, s) {
        return finish(PathStatus::SingularJacobian, x, 0.0, accepted, res);
    }
    finish(PathStatus::Success, x, 0.0, accepted, res)
}

/// Two trial Newton steps at `t = 0`. Near a regular root the second update
/// is quadratically smaller than the first; at a multiple root Newton only
/// contracts linearly, so a second update still comparable to the first
/// marks the endpoint as singular. Updates within the corrector tolerance are
/// not judged, since rounding noise in an ill-conditioned solve can be that
/// large.
fn singular_endpoint<H: Homotopy + ?Sized>(h: &H, x: &CVec, s: &TrackSettings) -> bool {
    let floor = 10.0 * s.tol_newton * inf_norm(x.as_slice()).max(1.0);
    let mut y = x.clone();
    let mut updates = [0.0; 2];
    for u in &mut updates {
        let (val, jac) = h.value_and_dx(y.as_slice(), 0.0);
        match lu_solve(&jac, val.as_slice()) {
            Ok(delta) => {
                *u = inf_norm(delta.as_slice());
                y -= delta;
            }
            Err(_) => return true,
        }
    }
    updates[0] > floor && updates[1] > 0.25 * updates[0]
}

/// At most `iters` Newton steps at fixed `t`, stopping as soon as the residual
/// would increase. The input is returned unchanged if no step improves it.
pub fn newton_polish<H: Homotopy + ?Sized>(h: &H, x: &[C64], t: f64, iters: usize) -> Result<CVec> {
    let mut best = CVec::from_column_slice(x);
    let mut best_res = inf_norm(h.value(x, t).as_slice());
    for _ in 0..iters {
        if best_res == 0.0 {
            break;
        }
        let (val, jac) = h.value_and_dx(best.as_slice(), t);
        let delta = lu_solve(&jac, val.as_slice())?;
        let cand = &best - delta;
        let res = inf_norm(h.value(cand.as_slice(), t).as_slice());
        if res <= best_res && res.is_finite() {
            let stalled = res == best_res;
            best = cand;
            best_res = res;
            if stalled {
                break;
            }
        } else {
            break;
        }
    }
    Ok(best)
}

/// Tracks every start point; results come back in start order.
pub fn track_paths<H: Homotopy + ?Sized>(h: &H, starts: &[Vec<C64>], s: &TrackSettings) -> Vec<PathResult> {
    starts.par_iter().map(|st| track_path(h, st, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::c64;

    fn scalar<F, J, D>(value: F, dx: J, dt: D) -> FnHomotopy<
        impl Fn(&[C64], f64) -> CVec + Sync,
        impl Fn(&[C64], f64) -> CMat + Sync,
        impl Fn(&[C64], f64) -> CVec + Sync,
    >
    where
        F: Fn(C64, f64) -> C64 + Sync,
        J: Fn(C64, f64) -> C64 + Sync,
        D: Fn(C64, f64) -> C64 + Sync,
    {
        FnHomotopy {
            dim: 1,
            value: move |x: &[C64], t| CVec::from_element(1, value(x[0], t)),
            dx: move |x: &[C64], t| CMat::from_element(1, 1, dx(x[0], t)),
            dt: move |x: &[C64], t| CVec::from_element(1, dt(x[0], t)),
        }
    }

    #[test]
    fn linear_homotopy() {
        // H = x - (1 - t)
        let h = scalar(|x, t| x - c64(1.0 - t, 0.0), |_, _| c64(1.0, 0.0), |_, _| c64(1.0, 0.0));
        let r = track_path(&h, &[c64(0.0, 0.0)], &TrackSettings::default());
        assert_eq!(r.status, PathStatus::Success);
        assert_eq!(r.t_reached, 0.0);
        assert!((r.endpoint[0] - c64(1.0, 0.0)).norm() < 1e-12);
    }

    /// Dense t-stepping oracle: many tiny Newton-continued steps.
    fn dense_oracle(f: impl Fn(f64, f64) -> f64, fx: impl Fn(f64, f64) -> f64, x0: f64) -> f64 {
        let steps = 100_000;
        let mut x = x0;
        for i in 1..=steps {
            let t = 1.0 - i as f64 / steps as f64;
            for _ in 0..4 {
                x -= f(x, t) / fx(x, t);
            }
        }
        x
    }

    #[test]
    fn quadratic_branch_follows_continuity() {
        // H = x^2 - 4 (1 - t) - t; x = 1 at t = 1.
        let h = scalar(
            |x, t| x * x - c64(4.0 * (1.0 - t) + t, 0.0),
            |x, _| 2.0 * x,
            |_, _| c64(3.0, 0.0),
        );
        let oracle = dense_oracle(|x, t| x * x - 4.0 * (1.0 - t) - t, |x, _| 2.0 * x, 1.0);
        assert!((oracle - 2.0).abs() < 1e-12);
        let r = track_path(&h, &[c64(1.0, 0.0)], &TrackSettings::default());
        assert_eq!(r.status, PathStatus::Success);
        assert!((r.endpoint[0] - c64(oracle, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn degenerate_jacobian() {
        // ∂H/∂x ≡ 0 while the start is off the path.
        let h = scalar(|_, t| c64(t + 1.0, 0.0), |_, _| c64(0.0, 0.0), |_, _| c64(1.0, 0.0));
        let r = track_path(&h, &[c64(0.0, 0.0)], &TrackSettings::default());
        assert_eq!(r.status, PathStatus::SingularJacobian);
        assert_eq!(r.steps_taken, 0);
    }

    #[test]
    fn diverging_path() {
        // H = t x - 1: x = 1/t escapes to infinity.
        let h = scalar(|x, t| c64(t, 0.0) * x - 1.0, |_, t| c64(t, 0.0), |x, _| x);
        let r = track_path(&h, &[c64(1.0, 0.0)], &TrackSettings::default());
        assert_ne!(r.status, PathStatus::Success);
        assert!(r.t_reached > 0.0);
    }

    #[test]
    fn double_root_endpoint_is_singular() {
        // H = x^2 - t (1 + i): both branches meet at x = 0 when t = 0.
        let w = c64(1.0, 1.0);
        let h = scalar(move |x, t| x * x - w * t, |x, _| 2.0 * x, move |_, _| -w);
        let r = track_path(&h, &[w.sqrt()], &TrackSettings::default());
        assert_eq!(r.status, PathStatus::SingularJacobian);
        // A nearby simple root stays a success.
        let h = scalar(move |x, t| x * x - w * t - 1e-4, |x, _| 2.0 * x, move |_, _| -w);
        let r = track_path(&h, &[(w + 1e-4).sqrt()], &TrackSettings::default());
        assert_eq!(r.status, PathStatus::Success);
    }

    #[test]
    fn polish_examples() {
        let h = scalar(|x, _| x * x - 4.0, |x, _| 2.0 * x, |_, _| c64(0.0, 0.0));
        let exact = newton_polish(&h, &[c64(2.0, 0.0)], 0.0, 5).unwrap();
        assert_eq!(exact[0], c64(2.0, 0.0));
        let r = newton_polish(&h, &[c64(2.1, 0.0)], 0.0, 6).unwrap();
        assert!((r[0] - c64(2.0, 0.0)).norm() < 1e-12);
        let same = newton_polish(&h, &[c64(2.1, 0.0)], 0.0, 0).unwrap();
        assert_eq!(same[0], c64(2.1, 0.0));
        let z = scalar(|_, _| c64(1.0, 0.0), |_, _| c64(0.0, 0.0), |_, _| c64(0.0, 0.0));
        assert!(matches!(
            newton_polish(&z, &[c64(0.0, 0.0)], 0.0, 2),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn residual_bound_and_determinism() {
        let h = scalar(
            |x, t| x * x * x - c64(2.0 - t, 0.5 * t),
            |x, _| 3.0 * x * x,
            |_, _| c64(1.0, -0.5),
        );
        let s = TrackSettings::default();
        let a = track_path(&h, &[c64(1.0, 0.5).powf(1.0 / 3.0)], &s);
        let b = track_path(&h, &[c64(1.0, 0.5).powf(1.0 / 3.0)], &s);
        assert_eq!(a, b);
        assert_eq!(a.status, PathStatus::Success);
        assert!(a.residual <= s.tol_newton);
        assert!(inf_norm(h.value(a.endpoint.as_slice(), 0.0).as_slice()) <= s.tol_newton);
    }

    #[test]
    fn batch_is_order_stable() {
        let h = scalar(|x, t| x - c64(1.0 - t, 0.0), |_, _| c64(1.0, 0.0), |_, _| c64(1.0, 0.0));
        let starts: Vec<Vec<C64>> = (0..8).map(|_| vec![c64(0.0, 0.0)]).collect();
        let rs = track_paths(&h, &starts, &TrackSettings::default());
        assert_eq!(rs.len(), 8);
        assert!(rs.iter().all(|r| r.is_success()));
    }

    #[test]
    fn settings_validation() {
        assert!(TrackSettings::default().validate().is_ok());
        let bad = TrackSettings {
            h_min: 1.0,
            ..TrackSettings::default()
        };
        assert!(bad.validate().is_err());
    }
}
