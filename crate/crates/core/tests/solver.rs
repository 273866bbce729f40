mod common;

use disclocus::numcore::{c64, inf_norm, real_to_complex};
use disclocus::polysys::ModelId;
use disclocus::region::ParamBox;
use disclocus::rng::{domain, random_gamma, stream};
use disclocus::solver::{count_real, label_point, parameter_homotopy, solve_generic, SolveOptions};

#[test]
fn quadratic_unit_roots() {
    let sys = ModelId::Quadratic.system();
    let opts = SolveOptions::default();
    let start = solve_generic(&sys, 1, &opts).unwrap();
    let mut rng = stream(1, domain::MISC, 0);
    let res = parameter_homotopy(&sys, &start, &[c64(0.0, 0.0), c64(-1.0, 0.0)], random_gamma(&mut rng), &opts).unwrap();
    assert!(res.iter().all(|r| r.is_success()));
    let mut roots: Vec<f64> = res.iter().map(|r| r.endpoint[0].re).collect();
    roots.sort_by(f64::total_cmp);
    assert!((roots[0] + 1.0).abs() < 1e-10 && (roots[1] - 1.0).abs() < 1e-10);
    assert_eq!(count_real(&res, opts.tol_im).unwrap().value(), 2);
}

#[test]
fn conjsquare_origin_breaks_paths() {
    let sys = ModelId::ConjSquare.system();
    let opts = SolveOptions::default();
    let start = solve_generic(&sys, 1, &opts).unwrap();
    let mut rng = stream(1, domain::MISC, 0);
    let res = parameter_homotopy(&sys, &start, &[c64(0.0, 0.0); 2], random_gamma(&mut rng), &opts).unwrap();
    assert!(res.iter().any(|r| !r.is_success()));
    assert!(label_point(&sys, &start, &[0.0, 0.0], &mut rng, &opts).is_err());
}

/// Paths from the generic start reach every solution a fresh total-degree
/// solve finds at the same target.
#[test]
fn kuramoto3_random_targets() {
    let sys = ModelId::Kuramoto(3).system();
    let opts = SolveOptions::default();
    let start = solve_generic(&sys, 1, &opts).unwrap();
    let omega = ParamBox::new(vec![(-1.0, 1.0); 2]).unwrap();
    let mut rng = stream(1, domain::MISC, 1);
    for _ in 0..5 {
        let p = omega.sample(&mut rng);
        let res = parameter_homotopy(&sys, &start, real_to_complex(&p).as_slice(), random_gamma(&mut rng), &opts)
            .unwrap();
        assert_eq!(res.len(), 6);
        assert!(res.iter().all(|r| r.is_success()), "{p:?}");
        for r in &res {
            let f = sys.evaluate(r.endpoint.as_slice(), real_to_complex(&p).as_slice()).unwrap();
            assert!(inf_norm(f.as_slice()) <= 1e-10);
        }
    }
    assert_eq!(solve_generic(&sys, 9, &opts).unwrap().d(), 6);
}

#[test]
fn label_examples() {
    let opts = SolveOptions::default();
    let cases = [
        (ModelId::Quadratic, [0.0, -1.0], 2),
        (ModelId::Quadratic, [0.0, 1.0], 0),
        (ModelId::Cubic, [1.0, 0.0], 1),
        (ModelId::Cubic, [-1.0, 0.0], 3),
        (ModelId::Kuramoto(3), [0.9, 0.0], 0),
        (ModelId::Kuramoto(3), [0.0, 0.0], 6),
    ];
    for (model, p, want) in cases {
        let sys = model.system();
        let start = solve_generic(&sys, 1, &opts).unwrap();
        let mut rng = stream(1, domain::MISC, 2);
        assert_eq!(label_point(&sys, &start, &p, &mut rng, &opts).unwrap().value(), want, "{model} {p:?}");
    }
}

/// Both quadratic paths between random off-discriminant points end on roots.
#[test]
fn quadratic_paths_between_random_points() {
    let sys = ModelId::Quadratic.system();
    let opts = SolveOptions::default();
    let start = solve_generic(&sys, 3, &opts).unwrap();
    let omega = ParamBox::new(vec![(-1.0, 1.0); 2]).unwrap();
    let mut rng = stream(3, domain::MISC, 3);
    for _ in 0..20 {
        let p = omega.sample(&mut rng);
        if common::quadratic_disc(p[0], p[1]).abs() < 1e-6 {
            continue;
        }
        let target = real_to_complex(&p);
        let res = parameter_homotopy(&sys, &start, target.as_slice(), random_gamma(&mut rng), &opts).unwrap();
        for r in &res {
            assert!(r.is_success());
            let f = sys.evaluate(r.endpoint.as_slice(), target.as_slice()).unwrap();
            assert!(inf_norm(f.as_slice()) <= 1e-10);
        }
        let label = count_real(&res, opts.tol_im).unwrap().value();
        assert_eq!(label, common::sturm_count(&common::quadratic(p[0], p[1])));
    }
}
