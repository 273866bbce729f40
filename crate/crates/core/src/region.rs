//! Axis-aligned parameter boxes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub bounds: Vec<(f64, f64)>,
}

impl ParamBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidConfig("box has no axes".into()));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!("bad box interval [{lo}, {hi}]")));
            }
        }
        Ok(Self { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }

    pub fn contains_strictly(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(&v, &(lo, hi))| lo < v && v < hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect()
    }

    /// Parses `lo:hi,lo:hi,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let bounds = text
            .split(',')
            .map(|part| {
                let (lo, hi) = part
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidConfig(format!("box axis '{part}' is not lo:hi")))?;
                let lo: f64 = lo.trim().parse().map_err(|_| Error::InvalidConfig(format!("bad bound '{lo}'")))?;
                let hi: f64 = hi.trim().parse().map_err(|_| Error::InvalidConfig(format!("bad bound '{hi}'")))?;
                Ok((lo, hi))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bounds)
    }

    /// Parameter interval `(λ_enter, λ_exit)` of the line `p* + λ v` inside the box.
    pub fn line_interval(&self, p_star: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        check_dim("line base point", self.dim(), p_star.len())?;
        check_dim("line direction", self.dim(), v.len())?;
        if !self.contains_strictly(p_star) {
            return Err(Error::PointOutsideBox(p_star.to_vec()));
        }
        if v.iter().all(|&a| a == 0.0) {
            return Err(Error::InvalidConfig("zero line direction".into()));
        }
        let mut enter = f64::NEG_INFINITY;
        let mut exit = f64::INFINITY;
        for ((&p, &d), &(lo, hi)) in p_star.iter().zip(v).zip(&self.bounds) {
            if d == 0.0 {
                continue;
            }
            let a = (lo - p) / d;
            let b = (hi - p) / d;
            enter = enter.max(a.min(b));
            exit = exit.min(a.max(b));
        }
        Ok((enter, exit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ParamBox {
        ParamBox::new(vec![(-1.0, 1.0); 2]).unwrap()
    }

    #[test]
    fn diagonal_line() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = unit_square().line_interval(&[0.0, 0.0], &[h, h]).unwrap();
        assert!((a + 2f64.sqrt()).abs() < 1e-12);
        assert!((b - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn axis_line_and_outside() {
        let b = unit_square();
        assert_eq!(b.line_interval(&[0.5, 0.0], &[1.0, 0.0]).unwrap(), (-1.5, 0.5));
        assert!(matches!(
            b.line_interval(&[1.0, 0.0], &[1.0, 0.0]),
            Err(Error::PointOutsideBox(_))
        ));
    }

    #[test]
    fn parse_box() {
        let b = ParamBox::parse("-1:1, -0.5:2").unwrap();
        assert_eq!(b.bounds, vec![(-1.0, 1.0), (-0.5, 2.0)]);
        assert!(ParamBox::parse("1:-1").is_err());
        assert!(ParamBox::parse("0").is_err());
    }
}
