//! Fully connected network with a softmax output, trained on unregularized
//! cross-entropy.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::error::{check_dim, Error, Result};
use crate::rng::{domain, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn grad_from_output(self, a: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => a.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 }),
            Activation::Tanh => a.mapv(|v| 1.0 - v * v),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::InvalidConfig(format!("unknown activation '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Batch {
    Full,
    MiniBatch(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    GradientDescent,
    /// Adam with `β1 = 0.9`, `β2 = 0.999`, `ε = 1e-8`.
    Adam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr_init: f64,
    /// Factor applied to the rate when the epoch loss plateaus.
    pub lr_decay: f64,
    /// Plateau decay never takes the rate below this.
    pub lr_min: f64,
    pub plateau_patience: usize,
    pub plateau_min_improvement: f64,
    pub max_epochs: usize,
    pub batch: Batch,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr_init: 1e-2,
            lr_decay: 0.5,
            lr_min: 1e-3,
            plateau_patience: 20,
            plateau_min_improvement: 1e-6,
            max_epochs: 50_000,
            batch: Batch::Full,
            optimizer: Optimizer::Adam,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr_init > 0.0
            && self.lr_decay > 0.0
            && self.lr_decay < 1.0
            && self.lr_min > 0.0
            && self.lr_min <= self.lr_init
            && self.plateau_patience > 0
            && self.max_epochs > 0
            && !matches!(self.batch, Batch::MiniBatch(0));
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid training configuration {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: usize,
    pub train_accuracy: f64,
    /// False when the epoch budget ran out before every training point was
    /// classified correctly.
    pub separated: bool,
    pub final_loss: f64,
    pub final_lr: f64,
    pub config: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MlpRepr", try_from = "MlpRepr")]
pub struct MlpModel {
    /// Input width, hidden widths, class count.
    pub layer_sizes: Vec<usize>,
    /// One per hidden layer.
    pub activations: Vec<Activation>,
    /// Layer `l` maps width `layer_sizes[l]` to `layer_sizes[l + 1]`; shape `(out, in)`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub class_map: Vec<usize>,
}

/// On-disk layout: weights flattened row-major per layer.
#[derive(Serialize, Deserialize)]
struct MlpRepr {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    class_map: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl From<MlpModel> for MlpRepr {
    fn from(m: MlpModel) -> Self {
        Self {
            weights: m.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: m.biases.iter().map(|b| b.to_vec()).collect(),
            layer_sizes: m.layer_sizes,
            activations: m.activations,
            class_map: m.class_map,
        }
    }
}

impl TryFrom<MlpRepr> for MlpModel {
    type Error = Error;
    fn try_from(r: MlpRepr) -> Result<Self> {
        if r.layer_sizes.len() < 2 || r.weights.len() != r.layer_sizes.len() - 1 || r.biases.len() != r.weights.len() {
            return Err(Error::InvalidConfig("network layer counts do not chain".into()));
        }
        let mut weights = Vec::with_capacity(r.weights.len());
        for (l, w) in r.weights.into_iter().enumerate() {
            let shape = (r.layer_sizes[l + 1], r.layer_sizes[l]);
            weights.push(
                Array2::from_shape_vec(shape, w)
                    .map_err(|_| Error::InvalidConfig(format!("layer {l} weight count does not match its shape")))?,
            );
        }
        let m = MlpModel {
            layer_sizes: r.layer_sizes,
            activations: r.activations,
            weights,
            biases: r.biases.into_iter().map(Array1::from_vec).collect(),
            class_map: r.class_map,
        };
        m.validate()?;
        Ok(m)
    }
}

struct Forward {
    /// Input followed by every hidden activation.
    acts: Vec<Array2<f64>>,
    probs: Array2<f64>,
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(layer_sizes: &[usize], activations: &[Activation], class_map: Vec<usize>, rng: &mut R) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig("a network needs input and output layers".into()));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        check_dim("hidden activations", layer_sizes.len() - 2, activations.len())?;
        check_dim("output width", class_map.len(), *layer_sizes.last().unwrap())?;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-limit..limit)));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            activations: activations.to_vec(),
            weights,
            biases,
            class_map,
        })
    }

    /// Checks that shapes chain and weights are finite.
    pub fn validate(&self) -> Result<()> {
        let l = self.layer_sizes.len();
        if l < 2 || self.weights.len() != l - 1 || self.biases.len() != l - 1 || self.activations.len() != l - 2 {
            return Err(Error::InvalidConfig("network layer counts do not chain".into()));
        }
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            if w.dim() != (self.layer_sizes[i + 1], self.layer_sizes[i]) || b.len() != self.layer_sizes[i + 1] {
                return Err(Error::InvalidConfig(format!("layer {i} has the wrong shape")));
            }
            if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("network weights"));
            }
        }
        if self.class_map.len() != self.layer_sizes[l - 1] || self.class_map.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("class map must be sorted, distinct and match the output width".into()));
        }
        Ok(())
    }

    fn forward(&self, x: ArrayView2<f64>) -> Forward {
        let mut acts = vec![x.to_owned()];
        let last = self.weights.len() - 1;
        let mut out = None;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[l].dot(&w.t());
            z += b;
            if l < last {
                self.activations[l].apply(&mut z);
                acts.push(z);
            } else {
                softmax_rows(&mut z);
                out = Some(z);
            }
        }
        Forward {
            acts,
            probs: out.expect("at least one layer"),
        }
    }

    /// Class probabilities for a batch of rows.
    pub fn probabilities(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward(x).probs
    }

    /// `(label, class probabilities)`; argmax ties go to the lower class index.
    pub fn predict_proba(&self, q: &[f64]) -> Result<(usize, Vec<f64>)> {
        check_dim("query point", self.input_dim(), q.len())?;
        let x = ArrayView2::from_shape((1, q.len()), q).expect("row vector");
        let p = self.probabilities(x);
        let row = p.row(0);
        Ok((self.class_map[argmax(row)], row.to_vec()))
    }
}

impl Classifier for MlpModel {
    fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    fn class_map(&self) -> Vec<usize> {
        self.class_map.clone()
    }

    fn predict(&self, q: &[f64]) -> Result<usize> {
        self.predict_proba(q).map(|(l, _)| l)
    }

    fn predict_many(&self, qs: &[Vec<f64>]) -> Result<Vec<usize>> {
        let d = self.input_dim();
        for q in qs {
            check_dim("query point", d, q.len())?;
        }
        let chunks: Vec<Vec<usize>> = qs
            .par_chunks(4096)
            .map(|chunk| {
                let x = Array2::from_shape_fn((chunk.len(), d), |(i, j)| chunk[i][j]);
                let p = self.probabilities(x.view());
                p.rows().into_iter().map(|r| self.class_map[argmax(r)]).collect()
            })
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }
}

struct Grads {
    w: Vec<Array2<f64>>,
    b: Vec<Array1<f64>>,
}

/// Mean cross-entropy, correct count, and gradients on one batch.
fn loss_and_grads(model: &MlpModel, x: ArrayView2<f64>, y: &[usize]) -> (f64, usize, Grads) {
    let fwd = model.forward(x);
    let n = y.len() as f64;
    let mut loss = 0.0;
    let mut correct = 0;
    let mut delta = fwd.probs.clone();
    for (i, &c) in y.iter().enumerate() {
        let row = fwd.probs.row(i);
        loss -= row[c].max(f64::MIN_POSITIVE).ln();
        if argmax(row) == c {
            correct += 1;
        }
        delta[[i, c]] -= 1.0;
    }
    delta /= n;

    let layers = model.weights.len();
    let mut gw = vec![Array2::zeros((0, 0)); layers];
    let mut gb = vec![Array1::zeros(0); layers];
    for l in (0..layers).rev() {
        gw[l] = delta.t().dot(&fwd.acts[l]);
        gb[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let back = delta.dot(&model.weights[l]);
            delta = back * model.activations[l - 1].grad_from_output(&fwd.acts[l]);
        }
    }
    (loss / n, correct, Grads { w: gw, b: gb })
}

struct AdamState {
    t: i32,
    mw: Vec<Array2<f64>>,
    vw: Vec<Array2<f64>>,
    mb: Vec<Array1<f64>>,
    vb: Vec<Array1<f64>>,
}

impl AdamState {
    fn new(model: &MlpModel) -> Self {
        Self {
            t: 0,
            mw: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            vw: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            mb: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            vb: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }
}

fn apply_update(model: &mut MlpModel, g: &Grads, lr: f64, adam: Option<&mut AdamState>) {
    match adam {
        None => {
            for (w, gw) in model.weights.iter_mut().zip(&g.w) {
                w.scaled_add(-lr, gw);
            }
            for (b, gb) in model.biases.iter_mut().zip(&g.b) {
                b.scaled_add(-lr, gb);
            }
        }
        Some(st) => {
            const B1: f64 = 0.9;
            const B2: f64 = 0.999;
            const EPS: f64 = 1e-8;
            st.t += 1;
            let c1 = 1.0 - B1.powi(st.t);
            let c2 = 1.0 - B2.powi(st.t);
            let step = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
                *m = B1 * *m + (1.0 - B1) * g;
                *v = B2 * *v + (1.0 - B2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
            };
            for l in 0..model.weights.len() {
                ndarray::Zip::from(&mut model.weights[l])
                    .and(&mut st.mw[l])
                    .and(&mut st.vw[l])
                    .and(&g.w[l])
                    .for_each(|p, m, v, &g| step(p, m, v, g));
                ndarray::Zip::from(&mut model.biases[l])
                    .and(&mut st.mb[l])
                    .and(&mut st.vb[l])
                    .and(&g.b[l])
                    .for_each(|p, m, v, &g| step(p, m, v, g));
            }
        }
    }
}

/// Trains until every training point is classified correctly or the epoch
/// budget runs out; the second case is reported through
/// [`TrainReport::separated`] rather than as an error.
pub fn mlp_train(
    points: &[Vec<f64>],
    labels: &[usize],
    hidden: &[usize],
    activation: Activation,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    cfg.validate()?;
    check_dim("training labels", points.len(), labels.len())?;
    if points.is_empty() {
        return Err(Error::InvalidClasses("no training points".into()));
    }
    let mut class_map = labels.to_vec();
    class_map.sort_unstable();
    class_map.dedup();
    if class_map.len() < 2 {
        return Err(Error::InvalidClasses(format!(
            "training needs at least two classes, found {:?}",
            class_map
        )));
    }
    let dim = points[0].len();
    let x = Array2::from_shape_fn((points.len(), dim), |(i, j)| points[i][j]);
    for p in points {
        check_dim("training point", dim, p.len())?;
    }
    let y: Vec<usize> = labels
        .iter()
        .map(|l| class_map.binary_search(l).expect("label in class map"))
        .collect();

    let mut sizes = vec![dim];
    sizes.extend_from_slice(hidden);
    sizes.push(class_map.len());
    let mut rng = stream(cfg.seed, domain::TRAIN, 0);
    let mut model = MlpModel::init(&sizes, &vec![activation; hidden.len()], class_map, &mut rng)?;
    let mut adam = (cfg.optimizer == Optimizer::Adam).then(|| AdamState::new(&model));

    let mut lr = cfg.lr_init;
    let mut best_loss = f64::INFINITY;
    let mut stale = 0usize;
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut report = TrainReport {
        epochs: 0,
        train_accuracy: 0.0,
        separated: false,
        final_loss: f64::NAN,
        final_lr: lr,
        config: cfg.clone(),
    };

    for epoch in 0..=cfg.max_epochs {
        let (loss, correct, grads) = loss_and_grads(&model, x.view(), &y);
        report.epochs = epoch;
        report.train_accuracy = correct as f64 / y.len() as f64;
        report.final_loss = loss;
        report.final_lr = lr;
        if correct == y.len() {
            report.separated = true;
            break;
        }
        if epoch == cfg.max_epochs || !loss.is_finite() {
            break;
        }
        match cfg.batch {
            Batch::Full => apply_update(&mut model, &grads, lr, adam.as_mut()),
            Batch::MiniBatch(m) => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(m) {
                    let xb = x.select(Axis(0), chunk);
                    let yb: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
                    let (_, _, g) = loss_and_grads(&model, xb.view(), &yb);
                    apply_update(&mut model, &g, lr, adam.as_mut());
                }
            }
        }
        if loss < best_loss - cfg.plateau_min_improvement {
            best_loss = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.plateau_patience {
                lr = (lr * cfg.lr_decay).max(cfg.lr_min);
                stale = 0;
            }
        }
    }
    Ok((model, report))
}
