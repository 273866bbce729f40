//! Classifiers over labeled parameter points.

mod grid;
mod knn;
mod mlp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub use grid::{decision_grid, DecisionGrid, GridSpec, PALETTE};
pub use knn::KnnModel;
pub use mlp::{mlp_train, Activation, Batch, MlpModel, Optimizer, TrainConfig, TrainReport};

pub trait Classifier: Sync {
    fn input_dim(&self) -> usize;
    /// Sorted distinct labels the model can output.
    fn class_map(&self) -> Vec<usize>;
    fn predict(&self, q: &[f64]) -> Result<usize>;

    fn predict_many(&self, qs: &[Vec<f64>]) -> Result<Vec<usize>> {
        qs.par_iter().map(|q| self.predict(q)).collect()
    }
}

/// Either kind of trained model, as stored in model files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnyModel {
    Knn(KnnModel),
    Mlp(MlpModel),
}

impl Classifier for AnyModel {
    fn input_dim(&self) -> usize {
        match self {
            AnyModel::Knn(m) => m.input_dim(),
            AnyModel::Mlp(m) => m.input_dim(),
        }
    }

    fn class_map(&self) -> Vec<usize> {
        match self {
            AnyModel::Knn(m) => m.class_map(),
            AnyModel::Mlp(m) => m.class_map(),
        }
    }

    fn predict(&self, q: &[f64]) -> Result<usize> {
        match self {
            AnyModel::Knn(m) => m.predict(q),
            AnyModel::Mlp(m) => m.predict(q),
        }
    }

    fn predict_many(&self, qs: &[Vec<f64>]) -> Result<Vec<usize>> {
        match self {
            AnyModel::Knn(m) => m.predict_many(qs),
            AnyModel::Mlp(m) => m.predict_many(qs),
        }
    }
}

/// Fraction of `points` whose prediction equals the stored label.
pub fn evaluate_accuracy<C: Classifier + ?Sized>(model: &C, points: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    check_dim("test labels", points.len(), labels.len())?;
    if points.is_empty() {
        return Err(Error::InvalidConfig("empty test set".into()));
    }
    let pred = model.predict_many(points)?;
    let hits = pred.iter().zip(labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / points.len() as f64)
}
