use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::error::{check_dim, Error, Result};

/// Exact brute-force K-nearest-neighbor classifier under Euclidean distance.
///
/// Distance ties go to the lower training index; vote ties to the smaller label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    dim: usize,
    k: usize,
    /// Row-major `len × dim`.
    points: Vec<f64>,
    labels: Vec<usize>,
}

impl KnnModel {
    pub fn new(points: &[Vec<f64>], labels: &[usize], k: usize) -> Result<Self> {
        check_dim("knn labels", points.len(), labels.len())?;
        if k == 0 {
            return Err(Error::InvalidConfig("K must be positive".into()));
        }
        if points.len() < k {
            return Err(Error::InvalidConfig(format!(
                "K = {k} exceeds the {} training points",
                points.len()
            )));
        }
        let dim = points[0].len();
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            check_dim("knn point", dim, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("non-finite training point".into()));
            }
            flat.extend_from_slice(p);
        }
        Ok(Self {
            dim,
            k,
            points: flat,
            labels: labels.to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    fn dist2(&self, i: usize, q: &[f64]) -> f64 {
        self.point(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Index of the nearest training point; ties go to the lower index.
    pub fn nearest(&self, q: &[f64]) -> Result<usize> {
        check_dim("query point", self.dim, q.len())?;
        let mut best = (f64::INFINITY, 0);
        for i in 0..self.len() {
            let d = self.dist2(i, q);
            if d < best.0 {
                best = (d, i);
            }
        }
        Ok(best.1)
    }

    /// The `k` nearest indices ordered by `(distance, index)`.
    pub fn k_nearest(&self, q: &[f64]) -> Result<Vec<usize>> {
        check_dim("query point", self.dim, q.len())?;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for i in 0..self.len() {
            let d = self.dist2(i, q);
            if best.len() == self.k && d >= best[self.k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(self.k);
        }
        Ok(best.into_iter().map(|(_, i)| i).collect())
    }
}

impl Classifier for KnnModel {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn class_map(&self) -> Vec<usize> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    fn predict(&self, q: &[f64]) -> Result<usize> {
        if self.k == 1 {
            return Ok(self.labels[self.nearest(q)?]);
        }
        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        for i in self.k_nearest(q)? {
            *votes.entry(self.labels[i]).or_default() += 1;
        }
        let mut winner = (0usize, 0usize);
        for (&label, &count) in &votes {
            if count > winner.1 {
                winner = (label, count);
            }
        }
        Ok(winner.0)
    }
}
