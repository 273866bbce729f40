//! Independent oracles shared by the integration tests. Nothing here calls
//! into the homotopy code.
#![allow(dead_code)]

/// Polynomials are coefficient vectors, lowest degree first.
pub type Poly = Vec<f64>;

pub fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && *p.last().unwrap() == 0.0 {
        p.pop();
    }
    p
}

pub fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn add(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    trim(out)
}

pub fn mul(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn scale(a: &[f64], s: f64) -> Poly {
    trim(a.iter().map(|v| v * s).collect())
}

fn derivative(p: &[f64]) -> Poly {
    if p.len() <= 1 {
        return vec![0.0];
    }
    trim(p.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect())
}

/// Remainder of `a / b`, with coefficients far below the inputs' scale zeroed.
fn rem(a: &[f64], b: &[f64]) -> Poly {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db];
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    while r.len() > db {
        let top = r.len() - 1;
        let q = r[top] / lead;
        for i in 0..=db {
            r[top - db + i] -= q * b[i];
        }
        r.pop();
    }
    for v in &mut r {
        if v.abs() <= 1e-12 * scale {
            *v = 0.0;
        }
    }
    trim(r)
}

fn is_zero(p: &[f64]) -> bool {
    p.iter().all(|&v| v == 0.0)
}

/// Positive rescaling to unit max-norm; signs, hence Sturm counts, are kept.
fn normalized(p: &[f64]) -> Poly {
    let m = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return p.to_vec();
    }
    scale(p, 1.0 / m)
}

pub fn sturm_sequence(p: &[f64]) -> Vec<Poly> {
    let p = normalized(&trim(p.to_vec()));
    let mut seq = vec![p.clone(), normalized(&derivative(&p))];
    while !is_zero(seq.last().unwrap()) && seq.last().unwrap().len() > 1 {
        let n = seq.len();
        let r = rem(&seq[n - 2], &seq[n - 1]);
        if is_zero(&r) {
            break;
        }
        seq.push(normalized(&scale(&r, -1.0)));
    }
    seq.retain(|q| !is_zero(q));
    seq
}

fn variations(signs: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0;
    let mut count = 0;
    for s in signs.filter(|s| *s != 0.0) {
        if last != 0.0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn variations_at(seq: &[Poly], x: f64) -> usize {
    variations(seq.iter().map(|q| eval(q, x).signum()))
}

fn variations_at_infinity(seq: &[Poly], positive: bool) -> usize {
    variations(seq.iter().map(|q| {
        let lead = q.last().unwrap().signum();
        let odd = (q.len() - 1) % 2 == 1;
        if !positive && odd {
            -lead
        } else {
            lead
        }
    }))
}

/// Number of distinct real roots.
pub fn sturm_count(p: &[f64]) -> usize {
    let seq = sturm_sequence(p);
    variations_at_infinity(&seq, false) - variations_at_infinity(&seq, true)
}

fn cauchy_bound(p: &[f64]) -> f64 {
    let p = trim(p.to_vec());
    let lead = *p.last().unwrap();
    1.0 + p[..p.len() - 1].iter().fold(0.0f64, |m, v| m.max((v / lead).abs()))
}

/// Distinct real roots, sorted, found by Sturm bisection to near machine precision.
pub fn real_roots(p: &[f64]) -> Vec<f64> {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return Vec::new();
    }
    let seq = sturm_sequence(&p);
    let b = cauchy_bound(&p);
    let mut out = Vec::new();
    isolate(&seq, -b, b, &mut out);
    out
}

/// Roots in `(lo, hi]`.
fn isolate(seq: &[Poly], lo: f64, hi: f64, out: &mut Vec<f64>) {
    let n = variations_at(seq, lo) - variations_at(seq, hi);
    if n == 0 {
        return;
    }
    let mid = 0.5 * (lo + hi);
    if n == 1 || mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi.abs().max(lo.abs()).max(1e-300) {
        if n == 1 {
            out.push(refine(seq, lo, hi));
        } else {
            out.push(mid);
        }
        return;
    }
    isolate(seq, lo, mid, out);
    isolate(seq, mid, hi, out);
}

fn refine(seq: &[Poly], mut lo: f64, mut hi: f64) -> f64 {
    let v_hi = variations_at(seq, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if variations_at(seq, mid) > v_hi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `x^2 + b x + c` as a polynomial in `x`.
pub fn quadratic(b: f64, c: f64) -> Poly {
    vec![c, b, 1.0]
}

/// `x^3 + b x + c`.
pub fn cubic(b: f64, c: f64) -> Poly {
    vec![c, b, 0.0, 1.0]
}

pub fn quadratic_disc(b: f64, c: f64) -> f64 {
    b * b - 4.0 * c
}

/// Positive exactly where `x^3 + b x + c` has one real root.
pub fn cubic_disc(b: f64, c: f64) -> f64 {
    4.0 * b * b * b + 27.0 * c * c
}

/// `b^2 - 4c` restricted to `(b, c) = p + λ v`, as a polynomial in `λ`.
pub fn quadratic_disc_on_line(p: &[f64], v: &[f64]) -> Poly {
    let b = vec![p[0], v[0]];
    let c = vec![p[1], v[1]];
    add(&mul(&b, &b), &scale(&c, -4.0))
}

/// `4b^3 + 27c^2` restricted to `(b, c) = p + λ v`.
pub fn cubic_disc_on_line(p: &[f64], v: &[f64]) -> Poly {
    let b = vec![p[0], v[0]];
    let c = vec![p[1], v[1]];
    add(&scale(&mul(&mul(&b, &b), &b), 4.0), &scale(&mul(&c, &c), 27.0))
}

/// Real `λ` with `p + λ v` on the discriminant, strictly inside `(enter, exit)`.
pub fn crossings(disc_on_line: &[f64], enter: f64, exit: f64) -> Vec<f64> {
    real_roots(disc_on_line)
        .into_iter()
        .filter(|&l| l > enter && l < exit)
        .collect()
}
