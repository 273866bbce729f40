use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::error::{check_dim, Error, Result};
use crate::region::ParamBox;

/// Colors by ascending label rank within a model's class map; ranks past the
/// end reuse the last color.
pub const PALETTE: [[u8; 3]; 7] = [
    [215, 48, 39],
    [252, 141, 89],
    [254, 224, 144],
    [224, 243, 248],
    [145, 191, 219],
    [69, 117, 180],
    [49, 54, 149],
];

/// A square grid over two parameter axes; other coordinates come from `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: (usize, usize),
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub base: Vec<f64>,
    pub resolution: usize,
}

impl GridSpec {
    /// The whole box for two parameters.
    pub fn full(omega: &ParamBox, resolution: usize) -> Result<Self> {
        check_dim("grid box dimension", 2, omega.dim())?;
        Self::slice(omega, (0, 1), &[0.0, 0.0], resolution)
    }

    /// Slice of `omega` through `base` along axes `axes`.
    pub fn slice(omega: &ParamBox, axes: (usize, usize), base: &[f64], resolution: usize) -> Result<Self> {
        check_dim("grid base point", omega.dim(), base.len())?;
        if axes.0 == axes.1 || axes.0 >= omega.dim() || axes.1 >= omega.dim() {
            return Err(Error::InvalidConfig(format!("bad grid axes {axes:?}")));
        }
        if resolution < 2 {
            return Err(Error::InvalidConfig("grid resolution must be at least 2".into()));
        }
        Ok(Self {
            axes,
            x_range: omega.bounds[axes.0],
            y_range: omega.bounds[axes.1],
            base: base.to_vec(),
            resolution,
        })
    }

    /// Center of a cell; row 0 is the top (largest second coordinate).
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let r = self.resolution as f64;
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let x = x0 + (col as f64 + 0.5) * (x1 - x0) / r;
        let y = y1 - (row as f64 + 0.5) * (y1 - y0) / r;
        (x, y)
    }

    pub fn cell_point(&self, row: usize, col: usize) -> Vec<f64> {
        let (x, y) = self.cell_center(row, col);
        let mut p = self.base.clone();
        p[self.axes.0] = x;
        p[self.axes.1] = y;
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionGrid {
    pub spec: GridSpec,
    /// Row-major predictions, row 0 on top.
    pub labels: Vec<usize>,
    pub class_map: Vec<usize>,
}

pub fn decision_grid<C: Classifier + ?Sized>(model: &C, spec: &GridSpec) -> Result<DecisionGrid> {
    check_dim("grid base point", model.input_dim(), spec.base.len())?;
    let r = spec.resolution;
    let points: Vec<Vec<f64>> = (0..r * r).map(|i| spec.cell_point(i / r, i % r)).collect();
    Ok(DecisionGrid {
        spec: spec.clone(),
        labels: model.predict_many(&points)?,
        class_map: model.class_map(),
    })
}

impl DecisionGrid {
    pub fn label_at(&self, row: usize, col: usize) -> usize {
        self.labels[row * self.spec.resolution + col]
    }

    /// `p_1,p_2,label` per cell in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "p_1,p_2,label")?;
        let r = self.spec.resolution;
        for row in 0..r {
            for col in 0..r {
                let (x, y) = self.spec.cell_center(row, col);
                writeln!(w, "{x},{y},{}", self.label_at(row, col))?;
            }
        }
        Ok(())
    }

    fn color(&self, label: usize) -> [u8; 3] {
        let rank = self.class_map.iter().position(|&c| c == label).unwrap_or(self.class_map.len());
        PALETTE[rank.min(PALETTE.len() - 1)]
    }

    /// Binary portable pixmap, one pixel per cell.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        let r = self.spec.resolution;
        write!(w, "P6\n{r} {r}\n255\n")?;
        let mut buf = Vec::with_capacity(3 * r * r);
        for &l in &self.labels {
            buf.extend_from_slice(&self.color(l));
        }
        w.write_all(&buf)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::KnnModel;

    #[test]
    fn constant_model_constant_grid() {
        let m = KnnModel::new(&[vec![0.0, 0.0]], &[4], 1).unwrap();
        let spec = GridSpec::full(&ParamBox::new(vec![(-1.0, 1.0); 2]).unwrap(), 4).unwrap();
        let g = decision_grid(&m, &spec).unwrap();
        assert!(g.labels.iter().all(|&l| l == 4));
        let mut ppm = Vec::new();
        g.write_ppm(&mut ppm).unwrap();
        assert!(ppm.starts_with(b"P6\n4 4\n255\n"));
        assert_eq!(&ppm[ppm.len() - 3..], &PALETTE[0]);
    }

    #[test]
    fn orientation_and_csv() {
        // Label 2 below the x axis, 0 above.
        let m = KnnModel::new(&[vec![0.0, -1.0], vec![0.0, 1.0]], &[2, 0], 1).unwrap();
        let spec = GridSpec::full(&ParamBox::new(vec![(-1.0, 1.0); 2]).unwrap(), 2).unwrap();
        let g = decision_grid(&m, &spec).unwrap();
        assert_eq!(g.labels, vec![0, 0, 2, 2]);
        assert_eq!(spec.cell_center(0, 0), (-0.5, 0.5));
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("p_1,p_2,label"));
        assert_eq!(text.lines().nth(1), Some("-0.5,0.5,0"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn slices_fix_other_coordinates() {
        let omega = ParamBox::new(vec![(-0.75, 0.75); 3]).unwrap();
        let spec = GridSpec::slice(&omega, (0, 2), &[0.0, 0.3, 0.0], 3).unwrap();
        assert_eq!(spec.cell_point(1, 1), vec![0.0, 0.3, 0.0]);
        assert!(GridSpec::slice(&omega, (1, 1), &[0.0; 3], 3).is_err());
        assert!(GridSpec::full(&omega, 3).is_err());
    }
}
