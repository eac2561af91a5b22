use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A compactly supported, piecewise constant, non-negative density.
///
/// `values[j]` is the density on `[breakpoints[j], breakpoints[j + 1])`;
/// the density vanishes outside `[breakpoints[0], breakpoints[m]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantDensity {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantDensity {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "density needs m + 1 breakpoints for m values (got {} and {})",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "density breakpoints must be finite".into(),
            ));
        }
        if let Some(j) = breakpoints.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "density breakpoints not strictly increasing at {j}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "density values must be finite and non-negative, got {v}"
            )));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// Skips validation; callers guarantee increasing breakpoints and non-negative values.
    pub(crate) fn from_parts_unchecked(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(breakpoints.len(), values.len() + 1);
        Self {
            breakpoints,
            values,
        }
    }

    /// Uniform cells `[x_left + j dx, x_left + (j + 1) dx)`.
    pub fn from_cells(x_left: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        let breakpoints = (0..=values.len()).map(|j| x_left + j as f64 * dx).collect();
        Self::new(breakpoints, values)
    }

    /// `h · 𝟙_[a, b)`
    pub fn block(a: f64, b: f64, height: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![height])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of constant pieces.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .zip(self.widths())
            .map(|(v, w)| v * w)
            .sum()
    }

    /// `‖ρ‖_∞`
    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Convex hull of the support, `None` for the zero density.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|&v| v > 0.0)?;
        let last = self.values.iter().rposition(|&v| v > 0.0)?;
        Some((self.breakpoints[first], self.breakpoints[last + 1]))
    }

    /// Index of the piece containing `x`, if any.
    pub fn piece_at(&self, x: f64) -> Option<usize> {
        let m = self.values.len();
        if x < self.breakpoints[0] || x >= self.breakpoints[m] {
            return None;
        }
        Some(self.breakpoints.partition_point(|&b| b <= x) - 1)
    }

    /// Density value at `x` (right-continuous).
    pub fn value_at(&self, x: f64) -> f64 {
        self.piece_at(x).map_or(0.0, |j| self.values[j])
    }

    /// `∫_{-∞}^{x} ρ`
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &v) in self.values.iter().enumerate() {
            let (a, b) = (self.breakpoints[j], self.breakpoints[j + 1]);
            if x <= a {
                break;
            }
            acc += v * (x.min(b) - a);
        }
        acc
    }

    /// `∫_a^b ρ` for `a ≤ b`, evaluated piece by piece.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let lo = self
            .breakpoints
            .partition_point(|&x| x <= a)
            .saturating_sub(1);
        let mut acc = 0.0;
        for j in lo..self.values.len() {
            let (l, r) = (self.breakpoints[j], self.breakpoints[j + 1]);
            if l >= b {
                break;
            }
            let width = r.min(b) - l.max(a);
            if width > 0.0 {
                acc += self.values[j] * width;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed() {
        assert!(PiecewiseConstantDensity::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(PiecewiseConstantDensity::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(PiecewiseConstantDensity::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(PiecewiseConstantDensity::new(vec![0.0, 1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn mass_and_cdf() {
        let d =
            PiecewiseConstantDensity::new(vec![0.0, 0.5, 1.5, 2.0], vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(d.mass(), 1.0);
        assert_eq!(d.cdf(0.25), 0.25);
        assert_eq!(d.cdf(1.0), 0.5);
        assert_eq!(d.cdf(5.0), 1.0);
        assert_eq!(d.mass_between(0.25, 1.75), 0.5);
        assert_eq!(d.support_hull(), Some((0.0, 2.0)));
        assert_eq!(d.value_at(2.0), 0.0);
        assert_eq!(d.value_at(1.5), 1.0);
    }

    #[test]
    fn hull_skips_zero_edges() {
        let d =
            PiecewiseConstantDensity::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(d.support_hull(), Some((1.0, 2.0)));
        let z = PiecewiseConstantDensity::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        assert_eq!(z.support_hull(), None);
    }
}
