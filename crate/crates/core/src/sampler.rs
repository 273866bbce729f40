//! Labeled datasets: uniform points plus near-center and near-boundary points
//! placed along random lines around their discriminant crossings.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discriminant::{critical_generic_start, witness_on_line, CriticalStart, CriticalSystem, WitnessLine};
use crate::error::{Error, Result};
use crate::polysys::ParameterizedSystem;
use crate::region::ParamBox;
use crate::rng::{domain, stream, unit_direction};
use crate::solver::{solve_generic, solve_point, GenericStart, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Uniform,
    NearCenter,
    NearBoundary,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Uniform, Category::NearCenter, Category::NearBoundary];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Uniform => "uniform",
            Category::NearCenter => "near_center",
            Category::NearBoundary => "near_boundary",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Category::Uniform),
            "near_center" => Ok(Category::NearCenter),
            "near_boundary" => Ok(Category::NearBoundary),
            other => Err(Error::InvalidConfig(format!("unknown category '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub omega: ParamBox,
    /// Cap on the distance of near-boundary points from a crossing.
    pub alpha: f64,
    pub n_uniform: usize,
    pub n_lines: usize,
    /// Intervals between crossings shorter than this are skipped.
    pub min_interval: f64,
    pub seed: u64,
    pub tol_im: f64,
    /// Also solve near-boundary points so every sample carries its real solutions.
    pub store_solutions: bool,
    /// Fresh draws per uniform point or line before giving up on it.
    pub max_redraws: usize,
}

impl SamplerConfig {
    pub fn new(omega: ParamBox, seed: u64) -> Self {
        Self {
            omega,
            alpha: 0.01,
            n_uniform: 0,
            n_lines: 0,
            min_interval: 1e-4,
            seed,
            tol_im: 1e-6,
            store_solutions: false,
            max_redraws: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.min_interval >= 0.0) {
            return Err(Error::InvalidConfig("min_interval must be nonnegative".into()));
        }
        if !(self.tol_im > 0.0) {
            return Err(Error::InvalidConfig("tol_im must be positive".into()));
        }
        if self.max_redraws == 0 {
            return Err(Error::InvalidConfig("max_redraws must be positive".into()));
        }
        ParamBox::new(self.omega.bounds.clone()).map(|_| ())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol_im: self.tol_im,
            ..SolveOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub p: Vec<f64>,
    pub label: usize,
    pub category: Category,
    pub line_id: Option<usize>,
    pub real_solutions: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub line_id: usize,
    pub witness: WitnessLine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub model: String,
    pub samples: Vec<LabeledSample>,
    pub config: SamplerConfig,
    pub generic_d: usize,
    pub lines: Vec<LineRecord>,
    /// Line slots for which every redraw was discarded.
    pub lines_abandoned: usize,
}

impl Dataset {
    pub fn count(&self, category: Category) -> usize {
        self.samples.iter().filter(|s| s.category == category).count()
    }

    pub fn filter(&self, categories: &[Category]) -> Vec<&LabeledSample> {
        self.samples.iter().filter(|s| categories.contains(&s.category)).collect()
    }
}

/// Positions along one line, in `λ` units.
#[derive(Clone, Debug, PartialEq)]
pub struct LineOffsets {
    /// `m_i = λ_i + δ_i / 2` for `i = 0..=ℓ`.
    pub midpoints: Vec<f64>,
    /// Interval widths `δ_i = λ_{i+1} - λ_i` for `i = 0..=ℓ`.
    pub widths: Vec<f64>,
    /// `λ_i + min(α, δ_i / 20)` for `i = 1..=ℓ`.
    pub forward: Vec<f64>,
    /// `λ_i - min(α, δ_{i-1} / 20)` for `i = 1..=ℓ`.
    pub backward: Vec<f64>,
}

/// Midpoints and near-boundary offsets for sorted crossings inside `(enter, exit)`.
pub fn offsets(lambdas: &[f64], enter: f64, exit: f64, alpha: f64) -> LineOffsets {
    let mut breaks = Vec::with_capacity(lambdas.len() + 2);
    breaks.push(enter);
    breaks.extend_from_slice(lambdas);
    breaks.push(exit);
    let widths: Vec<f64> = breaks.windows(2).map(|w| w[1] - w[0]).collect();
    let midpoints = breaks.windows(2).zip(&widths).map(|(w, d)| w[0] + d / 2.0).collect();
    let forward = (1..=lambdas.len())
        .map(|i| breaks[i] + alpha.min(widths[i] / 20.0))
        .collect();
    let backward = (1..=lambdas.len())
        .map(|i| breaks[i] - alpha.min(widths[i - 1] / 20.0))
        .collect();
    LineOffsets {
        midpoints,
        widths,
        forward,
        backward,
    }
}

fn point_on_line(p_star: &[f64], v: &[f64], lambda: f64) -> Vec<f64> {
    p_star.iter().zip(v).map(|(p, d)| p + lambda * d).collect()
}

fn solutions_if_consistent(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    p: &[f64],
    label: usize,
    rng: &mut impl Rng,
    opts: &SolveOptions,
) -> Option<Vec<Vec<f64>>> {
    solve_point(sys, start, p, rng, opts)
        .ok()
        .filter(|s| s.label.value() == label)
        .map(|s| s.real_solutions)
}

/// One uniform point, redrawn until it can be labeled.
fn uniform_one(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    cfg: &SamplerConfig,
    rng: &mut impl Rng,
    opts: &SolveOptions,
) -> Result<LabeledSample> {
    let mut last = None;
    for _ in 0..cfg.max_redraws {
        let p = cfg.omega.sample(rng);
        match solve_point(sys, start, &p, rng, opts) {
            Ok(s) => {
                return Ok(LabeledSample {
                    p,
                    label: s.label.value(),
                    category: Category::Uniform,
                    line_id: None,
                    real_solutions: cfg.store_solutions.then_some(s.real_solutions),
                })
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::InvalidConfig("no draws".into())))
}

/// `count` labeled points drawn uniformly from the box; unlabelable draws are replaced.
pub fn sample_uniform(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    cfg: &SamplerConfig,
    count: usize,
) -> Result<Vec<LabeledSample>> {
    let opts = cfg.solve_options();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, domain::UNIFORM, i as u64);
            uniform_one(sys, start, cfg, &mut rng, &opts)
        })
        .collect()
}

pub struct LineSample {
    pub witness: WitnessLine,
    pub samples: Vec<LabeledSample>,
}

/// Samples one random line: its anchor, interval midpoints, and offsets on
/// both sides of every crossing. Near-boundary points inherit the label of
/// the interval they fall in.
#[allow(clippy::too_many_arguments)]
pub fn sample_line<R: Rng>(
    sys: &ParameterizedSystem,
    start: &GenericStart,
    crit: &CriticalSystem,
    crit_start: &CriticalStart,
    cfg: &SamplerConfig,
    rng: &mut R,
    line_id: usize,
) -> Result<LineSample> {
    let opts = cfg.solve_options();
    let discard = |why: String| Error::LineDiscarded(format!("line {line_id}: {why}"));
    let p_star = cfg.omega.sample(rng);
    let v = unit_direction(rng, cfg.omega.dim());
    let anchor = solve_point(sys, start, &p_star, rng, &opts).map_err(|e| discard(e.to_string()))?;
    let witness = witness_on_line(crit, crit_start, &p_star, &v, &cfg.omega, rng, &opts)
        .map_err(|e| discard(e.to_string()))?;
    let off = offsets(&witness.lambdas, witness.lambda_enter, witness.lambda_exit, cfg.alpha);

    let mut samples = vec![LabeledSample {
        p: p_star.clone(),
        label: anchor.label.value(),
        category: Category::Uniform,
        line_id: None,
        real_solutions: cfg.store_solutions.then_some(anchor.real_solutions),
    }];

    let mut interval_label: Vec<Option<usize>> = vec![None; off.midpoints.len()];
    for (i, (&m, &w)) in off.midpoints.iter().zip(&off.widths).enumerate() {
        if w < cfg.min_interval {
            continue;
        }
        let p = point_on_line(&p_star, &v, m);
        if let Ok(s) = solve_point(sys, start, &p, rng, &opts) {
            interval_label[i] = Some(s.label.value());
            samples.push(LabeledSample {
                p,
                label: s.label.value(),
                category: Category::NearCenter,
                line_id: Some(line_id),
                real_solutions: cfg.store_solutions.then_some(s.real_solutions),
            });
        }
    }
    if interval_label.iter().all(Option::is_none) {
        return Err(discard("no interval could be labeled".into()));
    }

    for i in 1..=witness.lambdas.len() {
        for (lambda, interval) in [(off.backward[i - 1], i - 1), (off.forward[i - 1], i)] {
            let Some(label) = interval_label[interval] else { continue };
            let p = point_on_line(&p_star, &v, lambda);
            let real_solutions = if cfg.store_solutions {
                solutions_if_consistent(sys, start, &p, label, rng, &opts)
            } else {
                None
            };
            samples.push(LabeledSample {
                p,
                label,
                category: Category::NearBoundary,
                line_id: Some(line_id),
                real_solutions,
            });
        }
    }
    Ok(LineSample { witness, samples })
}

/// Runs the whole sampling scheme with precomputed starts. `crit` may be
/// omitted when no lines are requested.
pub fn generate_dataset_with(
    model: &str,
    sys: &ParameterizedSystem,
    start: &GenericStart,
    crit: Option<(&CriticalSystem, &CriticalStart)>,
    cfg: &SamplerConfig,
) -> Result<Dataset> {
    cfg.validate()?;
    crate::error::check_dim("box dimension", sys.k(), cfg.omega.dim())?;
    let mut samples = sample_uniform(sys, start, cfg, cfg.n_uniform)?;

    let mut lines = Vec::new();
    let mut lines_abandoned = 0;
    if cfg.n_lines > 0 {
        let (crit, crit_start) =
            crit.ok_or_else(|| Error::InvalidConfig("line sampling needs a critical start".into()))?;
        let per_line: Vec<Option<LineSample>> = (0..cfg.n_lines)
            .into_par_iter()
            .map(|id| {
                let mut rng = stream(cfg.seed, domain::LINE, id as u64);
                (0..cfg.max_redraws)
                    .find_map(|_| sample_line(sys, start, crit, crit_start, cfg, &mut rng, id).ok())
            })
            .collect();
        for (id, ls) in per_line.into_iter().enumerate() {
            match ls {
                Some(ls) => {
                    samples.extend(ls.samples);
                    lines.push(LineRecord {
                        line_id: id,
                        witness: ls.witness,
                    });
                }
                None => lines_abandoned += 1,
            }
        }
    }
    Ok(Dataset {
        model: model.to_string(),
        samples,
        config: cfg.clone(),
        generic_d: start.d(),
        lines,
        lines_abandoned,
    })
}

/// Solves the family and its critical system, then samples.
pub fn generate_dataset(model: &str, sys: &ParameterizedSystem, cfg: &SamplerConfig) -> Result<Dataset> {
    let opts = cfg.solve_options();
    let start = solve_generic(sys, cfg.seed, &opts)?;
    if cfg.n_lines == 0 {
        return generate_dataset_with(model, sys, &start, None, cfg);
    }
    let crit = CriticalSystem::new(sys)?;
    let crit_start = critical_generic_start(&crit, cfg.seed, &opts)?;
    generate_dataset_with(model, sys, &start, Some((&crit, &crit_start)), cfg)
}
