use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};

use disclocus::discriminant::{critical_generic_start, CriticalStart, CriticalSystem};
use disclocus::io::{read_dataset, read_start, sidecar, write_start, StartFile};
use disclocus::polysys::{parse_system, ModelId, ParameterizedSystem};
use disclocus::region::ParamBox;
use disclocus::sampler::{Category, Dataset};
use disclocus::solver::{solve_generic, GenericStart, SolveOptions};

use crate::SystemArgs;

pub struct Family {
    pub name: String,
    pub sys: ParameterizedSystem,
    pub omega: ParamBox,
    pub opts: SolveOptions,
    cache: Option<PathBuf>,
}

pub fn paired_box(values: &[f64]) -> Result<ParamBox> {
    ensure!(values.len() % 2 == 0, "--box takes lo hi pairs, got {} numbers", values.len());
    Ok(ParamBox::new(values.chunks(2).map(|c| (c[0], c[1])).collect())?)
}

impl Family {
    pub fn load(a: &SystemArgs) -> Result<Self> {
        let (name, sys, default_box) = match (&a.model, &a.system) {
            (Some(m), _) => {
                let id: ModelId = m.parse()?;
                (id.name(), id.system(), Some(id.default_box()))
            }
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let sys = parse_system(&text, &path.display().to_string())?;
                let name = path.file_stem().map_or("system".into(), |s| s.to_string_lossy().into_owned());
                (name, sys, None)
            }
            (None, None) => bail!("either --model or --system is required"),
        };
        let omega = match (&a.bounds, default_box) {
            (Some(b), _) => paired_box(b)?,
            (None, Some(b)) => ParamBox::new(b)?,
            (None, None) => bail!("--box is required with --system"),
        };
        ensure!(
            omega.dim() == sys.k(),
            "box has {} axes but the system has {} parameters",
            omega.dim(),
            sys.k()
        );
        let opts = SolveOptions {
            tol_im: a.tol_im,
            ..SolveOptions::default()
        };
        Ok(Self {
            name,
            sys,
            omega,
            opts,
            cache: a.start_cache.clone(),
        })
    }

    /// Cached starts are only reused for the same system and seed.
    fn cached(&self, path: &Path, sys: &ParameterizedSystem, seed: u64) -> Option<GenericStart> {
        let f = read_start(path).ok()?;
        (f.system == sys.to_text() && f.start.seed == seed && f.start.validate(sys, &self.opts).is_ok()).then_some(f.start)
    }

    fn store(&self, path: &Path, sys: &ParameterizedSystem, start: &GenericStart) -> Result<()> {
        let f = StartFile {
            system: sys.to_text(),
            start: start.clone(),
        };
        write_start(path, &f).with_context(|| format!("writing {}", path.display()))
    }

    pub fn start(&self, seed: u64) -> Result<GenericStart> {
        if let Some(path) = &self.cache {
            if let Some(s) = self.cached(path, &self.sys, seed) {
                return Ok(s);
            }
        }
        let s = solve_generic(&self.sys, seed, &self.opts)?;
        if let Some(path) = &self.cache {
            self.store(path, &self.sys, &s)?;
        }
        Ok(s)
    }

    pub fn critical(&self, seed: u64) -> Result<(CriticalSystem, CriticalStart)> {
        let crit = CriticalSystem::new(&self.sys)?;
        let path = self.cache.as_ref().map(|p| sidecar(p, ".critical"));
        if let Some(path) = &path {
            if let Some(s) = self.cached(path, crit.system(), seed) {
                let cs = CriticalStart::from_start(&crit, s, &self.opts)?;
                return Ok((crit, cs));
            }
        }
        let cs = critical_generic_start(&crit, seed, &self.opts)?;
        if let Some(path) = &path {
            self.store(path, crit.system(), &cs.start)?;
        }
        Ok((crit, cs))
    }
}

/// Parsed category list, or `default` when none was given.
pub fn categories(names: &[String], default: &[Category]) -> Result<Vec<Category>> {
    if names.is_empty() {
        return Ok(default.to_vec());
    }
    names.iter().map(|n| Ok(n.parse::<Category>()?)).collect()
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(path).with_context(|| format!("reading dataset {}", path.display()))
}

/// Points and labels of the given categories across several datasets.
pub fn training_rows(sets: &[Dataset], cats: &[Category]) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for ds in sets {
        for s in ds.filter(cats) {
            x.push(s.p.clone());
            y.push(s.label);
        }
    }
    if let Some(k) = x.first().map(Vec::len) {
        ensure!(x.iter().all(|p| p.len() == k), "datasets have different parameter counts");
    }
    Ok((x, y))
}

/// `name:cat+cat`, used to name rows of results tables.
pub fn set_name(paths: &[PathBuf], cats: &[Category]) -> String {
    let files: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned()))
        .collect();
    let cats: Vec<&str> = cats.iter().map(|c| c.as_str()).collect();
    format!("{}:{}", files.join("+"), cats.join("+"))
}

pub fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad coordinate '{v}' in point '{text}'")))
        .collect()
}
