use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};

use disclocus::classify::{
    decision_grid, evaluate_accuracy, mlp_train, Activation, AnyModel, Classifier, GridSpec, KnnModel, TrainConfig,
};
use disclocus::discriminant::witness_on_line;
use disclocus::io::{append_result, read_model, sidecar, write_dataset, write_model, ModelFile};
use disclocus::realpath::{benchmark_real, solve_real as solve_one, uniform_queries, SeedBank};
use disclocus::rng::{domain, stream, unit_direction};
use disclocus::sampler::{generate_dataset_with, Category, SamplerConfig};

use crate::common::{categories, load_dataset, paired_box, parse_point, set_name, training_rows, Family};
use crate::manifest::Recorder;
use crate::{BankArgs, BenchmarkArgs, EvalArgs, GenerateArgs, GridArgs, SolveRealArgs, TrainArgs, WitnessArgs};

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let rec = Recorder::new("generate", a)?;
    let fam = Family::load(&a.sys)?;
    let mut cfg = SamplerConfig::new(fam.omega.clone(), a.seed);
    cfg.alpha = a.alpha;
    cfg.n_uniform = a.uniform;
    cfg.n_lines = a.lines;
    cfg.min_interval = a.min_interval;
    cfg.tol_im = a.sys.tol_im;
    cfg.store_solutions = a.store_solutions;

    let start = fam.start(a.seed)?;
    let crit = if a.lines > 0 { Some(fam.critical(a.seed)?) } else { None };
    let ds = generate_dataset_with(&fam.name, &fam.sys, &start, crit.as_ref().map(|(c, s)| (c, s)), &cfg)?;
    write_dataset(&a.out, &ds).with_context(|| format!("writing {}", a.out.display()))?;

    let mut outputs = vec![a.out.clone(), sidecar(&a.out, ".meta.json")];
    if a.store_solutions {
        outputs.push(sidecar(&a.out, ".solutions.jsonl"));
    }
    rec.finish(&a.out, Some(fam.name.clone()), Some(a.seed), Vec::new(), outputs)?;

    println!("{}: d = {}, {} samples", fam.name, ds.generic_d, ds.samples.len());
    for c in Category::ALL {
        println!("  {c}: {}", ds.count(c));
    }
    if ds.lines_abandoned > 0 {
        println!("  lines abandoned: {}", ds.lines_abandoned);
    }
    Ok(())
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let rec = Recorder::new("train", a)?;
    let cats = categories(&a.categories, &Category::ALL)?;
    let sets = a.data.iter().map(|p| load_dataset(p)).collect::<Result<Vec<_>>>()?;
    let (x, y) = training_rows(&sets, &cats)?;
    ensure!(!x.is_empty(), "no training samples in categories {cats:?}");

    let (model, report) = match a.kind.as_str() {
        "knn" => (AnyModel::Knn(KnnModel::new(&x, &y, a.knn_k)?), None),
        "mlp" => {
            let act: Activation = a.activation.parse()?;
            let d = TrainConfig::default();
            let cfg = TrainConfig {
                lr_init: a.lr.unwrap_or(d.lr_init),
                lr_min: a.lr_min.unwrap_or(d.lr_min.min(a.lr.unwrap_or(d.lr_init))),
                plateau_patience: a.patience.unwrap_or(d.plateau_patience),
                max_epochs: a.max_epochs.unwrap_or(d.max_epochs),
                seed: a.seed,
                ..d
            };
            let (m, r) = mlp_train(&x, &y, &a.arch, act, &cfg)?;
            (AnyModel::Mlp(m), Some(r))
        }
        other => bail!("unknown model kind '{other}', expected knn or mlp"),
    };
    let train_acc = evaluate_accuracy(&model, &x, &y)?;
    let file = ModelFile {
        kind: a.kind.clone(),
        model,
        train_report: report.clone(),
        training_data: a.data.iter().map(|p| p.display().to_string()).collect(),
        categories: cats,
        training_points: x.len(),
    };
    write_model(&a.out, &file).with_context(|| format!("writing {}", a.out.display()))?;
    let seed = (a.kind == "mlp").then_some(a.seed);
    rec.finish(&a.out, None, seed, a.data.clone(), vec![a.out.clone()])?;

    println!("{} on {} points, training accuracy {train_acc}", a.kind, x.len());
    if let Some(r) = report {
        if !r.separated {
            println!("warning: training did not separate the data after {} epochs", r.epochs);
        } else {
            println!("separated after {} epochs", r.epochs);
        }
    }
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let rec = Recorder::new("eval", a)?;
    let mf = read_model(&a.model_file).with_context(|| format!("reading model {}", a.model_file.display()))?;
    let cats = categories(&a.categories, &Category::ALL)?;
    let ds = load_dataset(&a.data)?;
    let (x, y) = training_rows(std::slice::from_ref(&ds), &cats)?;
    ensure!(!x.is_empty(), "no test samples in categories {cats:?}");
    let acc = evaluate_accuracy(&mf.model, &x, &y)?;

    let train_name = a.train_name.clone().unwrap_or_else(|| {
        let paths: Vec<PathBuf> = mf.training_data.iter().map(PathBuf::from).collect();
        set_name(&paths, &mf.categories)
    });
    let test_name = a
        .test_name
        .clone()
        .unwrap_or_else(|| set_name(std::slice::from_ref(&a.data), &cats));
    println!("{train_name} -> {test_name}: accuracy {acc} on {} points", x.len());
    if let Some(path) = &a.results {
        append_result(path, &train_name, &test_name, acc, x.len())?;
        rec.finish(path, None, None, vec![a.model_file.clone(), a.data.clone()], vec![path.clone()])?;
    }
    Ok(())
}

pub fn grid(a: &GridArgs) -> Result<()> {
    let rec = Recorder::new("grid", a)?;
    let mf = read_model(&a.model_file).with_context(|| format!("reading model {}", a.model_file.display()))?;
    let omega = match (&a.bounds, &a.data) {
        (Some(b), _) => paired_box(b)?,
        (None, Some(d)) => load_dataset(d)?.config.omega,
        (None, None) => bail!("grid needs --box or --data"),
    };
    ensure!(omega.dim() == mf.model.input_dim(), "box dimension does not match the model input");
    ensure!(a.axes.len() == 2, "--axes takes two indices");
    let base = match &a.base {
        Some(b) => b.clone(),
        None => omega.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect(),
    };
    let spec = GridSpec::slice(&omega, (a.axes[0], a.axes[1]), &base, a.resolution)?;
    let g = decision_grid(&mf.model, &spec)?;

    let csv = sidecar(&a.out, ".csv");
    let ppm = sidecar(&a.out, ".ppm");
    let mut w = BufWriter::new(File::create(&csv).with_context(|| format!("creating {}", csv.display()))?);
    g.write_csv(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(&ppm).with_context(|| format!("creating {}", ppm.display()))?);
    g.write_ppm(&mut w)?;
    w.flush()?;
    rec.finish(&csv, None, None, vec![a.model_file.clone()], vec![csv.clone(), ppm.clone()])?;
    println!("wrote {} and {}", csv.display(), ppm.display());
    Ok(())
}

fn load_bank(b: &BankArgs, fam: &Family, default: &[Category]) -> Result<SeedBank> {
    let cats = categories(&b.bank_categories, default)?;
    let mut entries = Vec::new();
    for path in &b.bank {
        let ds = load_dataset(path)?;
        let bank = SeedBank::from_dataset(&ds, &cats)
            .with_context(|| format!("{} has no stored solutions in {cats:?}", path.display()))?;
        entries.extend_from_slice(bank.entries());
    }
    let bank = SeedBank::new(entries)?;
    bank.validate(&fam.sys)?;
    Ok(bank)
}

pub fn solve_real(a: &SolveRealArgs) -> Result<()> {
    let rec = Recorder::new("solve-real", a)?;
    let fam = Family::load(&a.sys)?;
    // Seeds away from the locus by default.
    let bank = load_bank(&a.bank, &fam, &[Category::NearCenter, Category::Uniform])?;
    let start = fam.start(a.seed)?;
    let queries = if a.point.is_empty() {
        ensure!(a.queries > 0, "give --point or --queries");
        uniform_queries(&fam.omega, a.queries, a.seed)
    } else {
        a.point.iter().map(|p| parse_point(p)).collect::<Result<Vec<_>>>()?
    };

    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    for (i, q) in queries.iter().enumerate() {
        let mut rng = stream(a.seed, domain::QUERY, i as u64);
        let r = solve_one(&fam.sys, &start, &bank, q, a.verify, &mut rng, &fam.opts)?;
        serde_json::to_writer(&mut out, &r)?;
        writeln!(out)?;
    }
    out.flush()?;
    drop(out);
    if let Some(p) = &a.out {
        rec.finish(p, Some(fam.name.clone()), Some(a.seed), a.bank.bank.clone(), vec![p.clone()])?;
    }
    Ok(())
}

pub fn benchmark(a: &BenchmarkArgs) -> Result<()> {
    let rec = Recorder::new("benchmark", a)?;
    let fam = Family::load(&a.sys)?;
    let bank = load_bank(&a.bank, &fam, &[Category::NearBoundary, Category::NearCenter])?;
    let start = fam.start(a.seed)?;
    let queries = uniform_queries(&fam.omega, a.queries, a.seed);
    let s = benchmark_real(&fam.sys, &start, &bank, &queries, a.trials, a.seed, &fam.opts)?;

    let mut w = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    writeln!(w, "tracked_paths,count,avg_seconds,success_rate")?;
    for r in &s.rows {
        writeln!(w, "{},{},{},{}", r.tracked_paths, r.count, r.avg_seconds, r.success_rate)?;
    }
    w.flush()?;
    rec.finish(&a.out, Some(fam.name.clone()), Some(a.seed), a.bank.bank.clone(), vec![a.out.clone()])?;

    println!("bank {} seeds, {} runs", bank.len(), s.reports.len());
    println!(
        "success {:.4}, fast path alone {:.4}, mean tracked {:.3}",
        s.success_rate, s.fast_path_rate, s.mean_tracked
    );
    println!(
        "real {:.3e} s, full {:.3e} s, ratio {:.2}",
        s.real_avg_seconds, s.full_avg_seconds, s.speedup
    );
    Ok(())
}

pub fn witness(a: &WitnessArgs) -> Result<()> {
    let fam = Family::load(&a.sys)?;
    let (crit, cs) = fam.critical(a.seed)?;
    let mut rng = stream(a.seed, domain::MISC, 0);
    let p = match &a.point {
        Some(p) => p.clone(),
        None => fam.omega.sample(&mut rng),
    };
    let v = match &a.direction {
        Some(v) => v.clone(),
        None => unit_direction(&mut rng, fam.omega.dim()),
    };
    let w = witness_on_line(&crit, &cs, &p, &v, &fam.omega, &mut rng, &fam.opts)?;
    println!("{}: critical degree {}", fam.name, cs.degree);
    println!("line p* = {:?}, v = {:?}, λ in [{}, {}]", w.p_star, w.v, w.lambda_enter, w.lambda_exit);
    println!("lambdas: {:?}", w.lambdas);
    println!("degree_observed: {}", w.degree_observed);
    if w.paths_failed > 0 || w.paths_diverged > 0 {
        println!("paths failed {}, diverged {}", w.paths_failed, w.paths_diverged);
    }
    Ok(())
}
