//! Real-only parameter homotopy seeded from the nearest labeled sample.
//!
//! Given a query `p`, the nearest stored point `p*` with known real
//! solutions is found and only those solutions are tracked along the
//! straight segment `f(x; t p* + (1 - t) p)`. That is exact whenever the
//! segment stays inside one region of the real discriminant complement.
//! Detected anomalies fall back to the full complex parameter homotopy.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::KnnModel;
use crate::error::{check_dim, Error, Result};
use crate::numcore::{c64, inf_norm, real_to_complex, C64};
use crate::polysys::ParameterizedSystem;
use crate::region::ParamBox;
use crate::rng::{domain, stream};
use crate::sampler::{Category, Dataset};
use crate::solver::{is_real, solve_point, GenericStart, ParameterHomotopy, SolveOptions};
use crate::tracker::{newton_polish, track_paths};

/// Residual bound on stored seed solutions.
pub const SEED_RESIDUAL_TOL: f64 = 1e-8;

/// Distance within which a fast-path solution matches a verified one.
pub const MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankEntry {
    pub p: Vec<f64>,
    pub label: usize,
    pub solutions: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct SeedBank {
    entries: Vec<BankEntry>,
    index: KnnModel,
}

impl SeedBank {
    pub fn new(entries: Vec<BankEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyBank);
        }
        for e in &entries {
            check_dim("seed solutions", e.label, e.solutions.len())?;
        }
        let pts: Vec<Vec<f64>> = entries.iter().map(|e| e.p.clone()).collect();
        let ids: Vec<usize> = (0..entries.len()).collect();
        let index = KnnModel::new(&pts, &ids, 1)?;
        Ok(Self { entries, index })
    }

    /// Samples from `categories` whose stored real solutions agree with their label.
    pub fn from_dataset(ds: &Dataset, categories: &[Category]) -> Result<Self> {
        let entries = ds
            .samples
            .iter()
            .filter(|s| categories.contains(&s.category))
            .filter_map(|s| {
                let sols = s.real_solutions.as_ref()?;
                (sols.len() == s.label).then(|| BankEntry {
                    p: s.p.clone(),
                    label: s.label,
                    solutions: sols.clone(),
                })
            })
            .collect();
        Self::new(entries)
    }

    /// Checks every stored solution against `sys`.
    pub fn validate(&self, sys: &ParameterizedSystem) -> Result<()> {
        for e in &self.entries {
            let p = real_to_complex(&e.p);
            for x in &e.solutions {
                let r = sys.evaluate(real_to_complex(x).as_slice(), p.as_slice())?;
                if inf_norm(r.as_slice()) > SEED_RESIDUAL_TOL {
                    return Err(Error::InvalidConfig(format!(
                        "seed solution at {:?} has residual {:.3e}",
                        e.p,
                        inf_norm(r.as_slice())
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn nearest(&self, p: &[f64]) -> Result<&BankEntry> {
        Ok(&self.entries[self.index.nearest(p)?])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealStatus {
    /// Fast path agreed with the full homotopy.
    Verified,
    /// Fast path finished cleanly; no verification requested.
    Unverified,
    /// Fast path hit a failed, nonreal or merged path; full homotopy answer returned.
    Fallback,
    /// Verification disagreed with the fast path (its answer is returned), or
    /// the fallback itself could not finish.
    Failed,
}

impl fmt::Display for RealStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RealStatus::Verified => "verified",
            RealStatus::Unverified => "unverified",
            RealStatus::Fallback => "fallback",
            RealStatus::Failed => "failed",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealSolveReport {
    pub p: Vec<f64>,
    pub p_star: Vec<f64>,
    /// Paths tracked on the fast path; the seed's label.
    pub tracked: usize,
    pub status: RealStatus,
    pub solutions: Vec<Vec<f64>>,
    /// Seconds spent answering, fallback included.
    pub elapsed: f64,
    /// Seconds of the verification run, when requested.
    pub full_elapsed: Option<f64>,
    /// Real solutions found by the verification run.
    pub full_count: Option<usize>,
}

impl RealSolveReport {
    /// Verified, or fell back to a full solve whose count the verification
    /// run confirmed. A fast-path answer that only verification caught as
    /// wrong is a failure.
    pub fn succeeded(&self) -> bool {
        match self.status {
            RealStatus::Verified => true,
            RealStatus::Fallback => self.full_count == Some(self.solutions.len()),
            RealStatus::Unverified | RealStatus::Failed => false,
        }
    }
}

fn distinct_real(sols: &[Vec<f64>], tol: f64) -> bool {
    (0..sols.len()).all(|i| {
        (0..i).all(|j| {
            let scale = sols[i].iter().chain(&sols[j]).fold(1.0f64, |m, v| m.max(v.abs()));
            sols[i].iter().zip(&sols[j]).any(|(a, b)| (a - b).abs() > tol * scale)
        })
    })
}

/// Tracks the seed solutions along the real segment; `None` on any anomaly.
fn fast_path(
    sys: &ParameterizedSystem,
    seed: &BankEntry,
    p: &[f64],
    opts: &SolveOptions,
) -> Result<Option<Vec<Vec<f64>>>> {
    if seed.p == p {
        return Ok(Some(seed.solutions.clone()));
    }
    let h = ParameterHomotopy::new(
        sys,
        real_to_complex(&seed.p).as_slice().to_vec(),
        real_to_complex(p).as_slice().to_vec(),
        c64(1.0, 0.0),
    )?;
    let starts: Vec<Vec<C64>> = seed
        .solutions
        .iter()
        .map(|x| x.iter().map(|&v| c64(v, 0.0)).collect())
        .collect();
    let mut out = Vec::with_capacity(starts.len());
    for r in track_paths(&h, &starts, &opts.track) {
        if !r.is_success() {
            return Ok(None);
        }
        let x = newton_polish(&h, r.endpoint.as_slice(), 0.0, opts.polish_iters).unwrap_or(r.endpoint);
        if !is_real(x.as_slice(), opts.tol_im) {
            return Ok(None);
        }
        out.push(x.iter().map(|z| z.re).collect::<Vec<f64>>());
    }
    if !distinct_real(&out, opts.dedup_tol) {
        return Ok(None);
    }
    Ok(Some(out))
}

/// True when both lists have the same size and pair up within `MATCH_TOL`.
pub fn solutions_match(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)))
            .min_by(|l, r| l.1.total_cmp(&r.1));
        match best {
            Some((j, d)) if d <= MATCH_TOL => used[j] = true,
            _ => return false,
        }
    }
    true
}

/// Real solutions of `f(x; p) = 0` via the nearest seed; total, see [`RealStatus`].
pub fn solve_real<R: Rng + ?Sized>(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    bank: &SeedBank,
    p: &[f64],
    verify: bool,
    rng: &mut R,
    opts: &SolveOptions,
) -> Result<RealSolveReport> {
    check_dim("query point", sys.k(), p.len())?;
    let clock = Instant::now();
    let seed = bank.nearest(p)?;
    let fast = fast_path(sys, seed, p, opts)?;
    let (mut status, mut solutions) = match &fast {
        Some(s) => (RealStatus::Unverified, s.clone()),
        None => match solve_point(sys, start, p, rng, opts) {
            Ok(full) => (RealStatus::Fallback, full.real_solutions),
            Err(_) => (RealStatus::Failed, Vec::new()),
        },
    };
    let elapsed = clock.elapsed().as_secs_f64();

    let mut full_elapsed = None;
    let mut full_count = None;
    if verify {
        let clock = Instant::now();
        let full = solve_point(sys, start, p, rng, opts);
        full_elapsed = Some(clock.elapsed().as_secs_f64());
        if let Ok(full) = full {
            full_count = Some(full.label.value());
            if fast.is_some() {
                if solutions_match(&solutions, &full.real_solutions) {
                    status = RealStatus::Verified;
                } else {
                    status = RealStatus::Failed;
                    solutions = full.real_solutions;
                }
            }
        }
    }
    Ok(RealSolveReport {
        p: p.to_vec(),
        p_star: seed.p.clone(),
        tracked: seed.label,
        status,
        solutions,
        elapsed,
        full_elapsed,
        full_count,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub tracked_paths: usize,
    pub count: usize,
    pub avg_seconds: f64,
    pub success_rate: f64,
    /// Share answered by the fast path alone and then verified.
    pub fast_path_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub rows: Vec<BenchmarkRow>,
    pub real_avg_seconds: f64,
    pub full_avg_seconds: f64,
    /// `full_avg_seconds / real_avg_seconds`.
    pub speedup: f64,
    pub success_rate: f64,
    pub fast_path_rate: f64,
    pub mean_tracked: f64,
    pub reports: Vec<RealSolveReport>,
}

/// `count` points drawn uniformly from `omega`.
pub fn uniform_queries(omega: &ParamBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, domain::QUERY, u64::MAX >> 16);
    (0..count).map(|_| omega.sample(&mut rng)).collect()
}

/// Runs every query `trials` times with verification, sequentially, and
/// groups the outcomes by the number of tracked paths. A run succeeds when
/// the answer it would give without verification has the verified count; see
/// [`RealSolveReport::succeeded`].
pub fn benchmark_real(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    bank: &SeedBank,
    queries: &[Vec<f64>],
    trials: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<BenchmarkSummary> {
    let mut reports = Vec::with_capacity(queries.len() * trials);
    for (i, q) in queries.iter().enumerate() {
        for j in 0..trials {
            let mut rng = stream(seed, domain::QUERY, (i * trials + j) as u64);
            reports.push(solve_real(sys, start, bank, q, true, &mut rng, opts)?);
        }
    }
    let mut buckets: BTreeMap<usize, (usize, f64, usize, usize)> = BTreeMap::new();
    for r in &reports {
        let b = buckets.entry(r.tracked).or_default();
        b.0 += 1;
        b.1 += r.elapsed;
        b.2 += usize::from(r.succeeded());
        b.3 += usize::from(r.status == RealStatus::Verified);
    }
    let rows = buckets
        .into_iter()
        .map(|(tracked_paths, (count, secs, ok, fast))| BenchmarkRow {
            tracked_paths,
            count,
            avg_seconds: secs / count as f64,
            success_rate: ok as f64 / count as f64,
            fast_path_rate: fast as f64 / count as f64,
        })
        .collect();
    let n = reports.len().max(1) as f64;
    let real_avg = reports.iter().map(|r| r.elapsed).sum::<f64>() / n;
    let full_avg = reports.iter().filter_map(|r| r.full_elapsed).sum::<f64>() / n;
    Ok(BenchmarkSummary {
        rows,
        real_avg_seconds: real_avg,
        full_avg_seconds: full_avg,
        speedup: if real_avg > 0.0 { full_avg / real_avg } else { f64::INFINITY },
        success_rate: reports.iter().filter(|r| r.succeeded()).count() as f64 / n,
        fast_path_rate: reports.iter().filter(|r| r.status == RealStatus::Verified).count() as f64 / n,
        mean_tracked: reports.iter().map(|r| r.tracked as f64).sum::<f64>() / n,
        reports,
    })
}
