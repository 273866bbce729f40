mod common;

use std::collections::BTreeSet;

use disclocus::discriminant::{critical_generic_start, witness_on_line, CriticalSystem};
use disclocus::polysys::ModelId;
use disclocus::region::ParamBox;
use disclocus::rng::{domain, stream};
use disclocus::sampler::{generate_dataset, offsets, Category, Dataset, SamplerConfig};
use disclocus::solver::{label_point, solve_generic, SolveOptions};

fn run(model: ModelId, n_uniform: usize, n_lines: usize, seed: u64) -> Dataset {
    let mut cfg = SamplerConfig::new(ParamBox::new(model.default_box()).unwrap(), seed);
    cfg.n_uniform = n_uniform;
    cfg.n_lines = n_lines;
    generate_dataset(&model.name(), &model.system(), &cfg).unwrap()
}

fn labels(ds: &Dataset) -> BTreeSet<usize> {
    ds.samples.iter().map(|s| s.label).collect()
}

#[test]
fn quadratic_line_midpoint_labels() {
    let sys = ModelId::Quadratic.system();
    let opts = SolveOptions::default();
    let omega = ParamBox::new(vec![(-1.0, 1.0); 2]).unwrap();
    let crit = CriticalSystem::new(&sys).unwrap();
    let cs = critical_generic_start(&crit, 1, &opts).unwrap();
    let start = solve_generic(&sys, 1, &opts).unwrap();
    let (p, v) = ([0.0, 0.0], [0.6, 0.8]);
    let mut rng = stream(1, domain::MISC, 0);
    let w = witness_on_line(&crit, &cs, &p, &v, &omega, &mut rng, &opts).unwrap();
    let off = offsets(&w.lambdas, w.lambda_enter, w.lambda_exit, 0.01);
    let got: Vec<usize> = off
        .midpoints
        .iter()
        .map(|m| label_point(&sys, &start, &[m * v[0], m * v[1]], &mut rng, &opts).unwrap().value())
        .collect();
    assert_eq!(got, vec![2, 0]);
}

#[test]
fn label_sets_and_box_membership() {
    for (model, allowed) in [(ModelId::Quadratic, vec![0, 2]), (ModelId::Cubic, vec![1, 3])] {
        let ds = run(model, 100, 40, 2);
        assert!(labels(&ds).is_subset(&allowed.into_iter().collect()));
        assert_eq!(ds.count(Category::Uniform), 140);
        assert!(ds.samples.iter().all(|s| ds.config.omega.contains(&s.p)));
    }
}

#[test]
fn conjsquare_lines_have_only_midpoints() {
    let ds = run(ModelId::ConjSquare, 0, 50, 3);
    assert_eq!(ds.count(Category::NearBoundary), 0);
    assert_eq!(ds.count(Category::NearCenter), 50);
    assert_eq!(labels(&ds), [2].into());
}

#[test]
fn kuramoto3_small_run_has_all_classes() {
    let ds = run(ModelId::Kuramoto(3), 500, 100, 1);
    assert_eq!(labels(&ds), [0, 2, 4, 6].into());
    assert_eq!(ds.generic_d, 6);
}

/// Two boundary points per crossing whenever every interval was kept, and a
/// crossing between any two differently labeled neighbouring midpoints.
#[test]
fn lines_are_consistent() {
    let ds = run(ModelId::Cubic, 0, 60, 4);
    for rec in &ds.lines {
        let on_line: Vec<_> = ds.samples.iter().filter(|s| s.line_id == Some(rec.line_id)).collect();
        let nc: Vec<_> = on_line.iter().filter(|s| s.category == Category::NearCenter).collect();
        let nb = on_line.iter().filter(|s| s.category == Category::NearBoundary).count();
        let ell = rec.witness.lambdas.len();
        assert!(nb <= 2 * ell);
        if nc.len() == ell + 1 {
            assert_eq!(nb, 2 * ell);
        }
        // Position along the line of each midpoint.
        let w = &rec.witness;
        let k = if w.v[0].abs() > w.v[1].abs() { 0 } else { 1 };
        let pos: Vec<f64> = nc.iter().map(|s| (s.p[k] - w.p_star[k]) / w.v[k]).collect();
        for i in 1..nc.len() {
            if nc[i].label != nc[i - 1].label {
                assert!(w.lambdas.iter().any(|&l| l > pos[i - 1] && l < pos[i]), "line {}", rec.line_id);
            }
        }
    }
}
