use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear cumulative distribution on `[0, 1]`.
///
/// Breakpoints start at `(0, 0)`, end at `(1, 1)`, have strictly increasing
/// abscissae and non-decreasing ordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCdf {
    points: Vec<(f64, f64)>,
}

impl ThresholdCdf {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCdf("need at least two breakpoints".into()));
        }
        if points[0] != (0.0, 0.0) {
            return Err(Error::InvalidCdf(format!("must start at (0, 0), got {:?}", points[0])));
        }
        if *points.last().unwrap() != (1.0, 1.0) {
            return Err(Error::InvalidCdf(format!("must end at (1, 1), got {:?}", points.last().unwrap())));
        }
        for pair in points.windows(2) {
            let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
            if !(x1 > x0) {
                return Err(Error::InvalidCdf(format!("abscissae not increasing at x = {x1}")));
            }
            if !(y1 >= y0) {
                return Err(Error::InvalidCdf(format!("not monotone at x = {x1}")));
            }
        }
        Ok(ThresholdCdf { points })
    }

    pub fn identity() -> Self {
        ThresholdCdf { points: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    /// Interpolates `g` at `segments + 1` evenly spaced breakpoints.
    pub fn sampled(g: impl Fn(f64) -> f64, segments: usize) -> Result<Self> {
        let segments = segments.max(1);
        let points = (0..=segments)
            .map(|i| {
                let x = i as f64 / segments as f64;
                (x, g(x))
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        // first breakpoint with abscissa >= x
        let j = self.points.partition_point(|&(px, _)| px < x);
        if j == 0 {
            return self.points[0].1;
        }
        let (x0, y0) = self.points[j - 1];
        let (x1, y1) = self.points[j];
        y0 + (x - x0) / (x1 - x0) * (y1 - y0)
    }

    /// Generalized inverse `inf { x : F(x) >= u }`.
    pub fn inverse(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let j = self.points.partition_point(|&(_, py)| py < u);
        if j == 0 {
            return 0.0;
        }
        let (x0, y0) = self.points[j - 1];
        let (x1, y1) = self.points[j];
        x0 + (u - y0) / (y1 - y0) * (x1 - x0)
    }
}
