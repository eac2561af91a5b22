//! Discrete Kružkov entropy residual
//! `∬ |ρ−k| ψ_t + sgn(ρ−k)(f(ρ)−f(k)) φ ψ_x − sgn(ρ−k) f(k) φ′ ψ dx dt`.
//!
//! Time integration uses the trapezoid rule over the field's snapshots;
//! space uses the midpoint rule on sub-cells no wider than `w/64`, split at
//! every density breakpoint so the density is constant on each sub-cell.

use serde::{Deserialize, Serialize};

use crate::model::{PiecewiseConstantDensity, Potential, VelocityModel};
use crate::{Error, Result};

const SUBCELLS_PER_WIDTH: f64 = 64.0;

/// Cubic B-spline supported on `[−2, 2]`, unit integral.
pub fn bspline(s: f64) -> f64 {
    let a = s.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
    }
}

pub fn bspline_derivative(s: f64) -> f64 {
    let a = s.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        -0.5 * (2.0 - a).powi(2) * s.signum()
    } else {
        -2.0 * s + 1.5 * s * a
    }
}

/// `ψ(x, t) = B((x − x_c)/w_x) · B((t − t_c)/w_t)`, supported on `x_c ± 2w_x`, `t_c ± 2w_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpTestFunction {
    pub x_center: f64,
    pub t_center: f64,
    pub x_width: f64,
    pub t_width: f64,
}

impl BumpTestFunction {
    pub fn new(x_center: f64, t_center: f64, x_width: f64, t_width: f64) -> Result<Self> {
        if !(x_width > 0.0 && t_width > 0.0 && x_width.is_finite() && t_width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bump widths must be positive, got ({x_width}, {t_width})"
            )));
        }
        Ok(Self {
            x_center,
            t_center,
            x_width,
            t_width,
        })
    }

    pub fn x_support(&self) -> (f64, f64) {
        (
            self.x_center - 2.0 * self.x_width,
            self.x_center + 2.0 * self.x_width,
        )
    }

    pub fn t_support(&self) -> (f64, f64) {
        (
            self.t_center - 2.0 * self.t_width,
            self.t_center + 2.0 * self.t_width,
        )
    }

    fn sx(&self, x: f64) -> f64 {
        (x - self.x_center) / self.x_width
    }

    fn st(&self, t: f64) -> f64 {
        (t - self.t_center) / self.t_width
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        bspline(self.sx(x)) * bspline(self.st(t))
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        bspline_derivative(self.sx(x)) / self.x_width * bspline(self.st(t))
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        bspline(self.sx(x)) * bspline_derivative(self.st(t)) / self.t_width
    }
}

/// Densities at increasing times on a spatial window outside of which they vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub times: Vec<f64>,
    pub densities: Vec<PiecewiseConstantDensity>,
    pub x_window: (f64, f64),
}

impl DensityField {
    pub fn new(
        times: Vec<f64>,
        densities: Vec<PiecewiseConstantDensity>,
        x_window: (f64, f64),
    ) -> Result<Self> {
        if times.len() != densities.len() || times.len() < 2 {
            return Err(Error::InvalidInput(
                "density field needs at least two snapshots with matching times".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("snapshot times must increase".into()));
        }
        if !(x_window.1 > x_window.0) {
            return Err(Error::InvalidInput("empty spatial window".into()));
        }
        Ok(Self {
            times,
            densities,
            x_window,
        })
    }
}

fn sgn(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Spatial integral at one snapshot.
fn slice_integral(
    d: &PiecewiseConstantDensity,
    t: f64,
    k: f64,
    test: &BumpTestFunction,
    model: &VelocityModel,
    pot: &Potential,
) -> f64 {
    let (lo, hi) = test.x_support();
    let fk = model.flux(k);
    let n_sub = (4.0 * SUBCELLS_PER_WIDTH).ceil() as usize;
    let h = (hi - lo) / n_sub as f64;
    let mut cuts: Vec<f64> = (0..=n_sub).map(|j| lo + j as f64 * h).collect();
    cuts.extend(
        d.breakpoints()
            .iter()
            .copied()
            .filter(|&x| x > lo && x < hi),
    );
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let width = w[1] - w[0];
        if !(width > 0.0) {
            continue;
        }
        let x = 0.5 * (w[0] + w[1]);
        let rho = d.value_at(x);
        let s = sgn(rho - k);
        let integrand = (rho - k).abs() * test.dt(x, t)
            + s * (model.flux(rho) - fk) * pot.value(x) * test.dx(x, t)
            - s * fk * pot.derivative(x) * test.value(x, t);
        acc += integrand * width;
    }
    acc
}

/// Entropy residual of a density field for level `k` and test function `test`.
/// Entropy solutions give values `≥ 0` up to discretization error.
pub fn entropy_residual(
    field: &DensityField,
    k: f64,
    test: &BumpTestFunction,
    model: &VelocityModel,
    pot: &Potential,
) -> Result<f64> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::Domain {
            what: "entropy level",
            value: k,
        });
    }
    let (xl, xr) = test.x_support();
    let (tl, tr) = test.t_support();
    let (t0, t1) = (field.times[0], field.times[field.times.len() - 1]);
    if !(xl > field.x_window.0 && xr < field.x_window.1 && tl >= t0 && tr <= t1) {
        return Err(Error::InvalidInput(format!(
            "test support [{xl}, {xr}] x [{tl}, {tr}] leaks outside [{}, {}] x [{t0}, {t1}]",
            field.x_window.0, field.x_window.1
        )));
    }
    let values: Vec<f64> = field
        .times
        .iter()
        .zip(&field.densities)
        .map(|(&t, d)| {
            if t <= tl || t >= tr {
                0.0
            } else {
                slice_integral(d, t, k, test, model, pot)
            }
        })
        .collect();
    Ok(field
        .times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CaseLabel, PotentialForm, VelocityForm};

    fn lwr() -> VelocityModel {
        VelocityModel::new(VelocityForm::Linear {
            v_max: 1.0,
            rho_ref: 1.0,
        })
        .unwrap()
    }

    fn unit_drift() -> Potential {
        Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap()
    }

    fn times(count: usize) -> Vec<f64> {
        (0..count).map(|j| j as f64 / (count - 1) as f64).collect()
    }

    #[test]
    fn bspline_integrates_to_one() {
        let h = 1e-4;
        let total: f64 = (0..40_000)
            .map(|j| bspline(-2.0 + (j as f64 + 0.5) * h) * h)
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(bspline(0.0), 2.0 / 3.0);
        assert_eq!(bspline(1.0), 1.0 / 6.0);
        for s in [-1.7, -0.4, 0.3, 1.2] {
            let fd = (bspline(s + 1e-6) - bspline(s - 1e-6)) / 2e-6;
            assert!((fd - bspline_derivative(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_field_with_matching_level_vanishes() {
        let t = times(21);
        let d = vec![PiecewiseConstantDensity::block(-5.0, 5.0, 0.3).unwrap(); t.len()];
        let field = DensityField::new(t, d, (-5.0, 5.0)).unwrap();
        let test = BumpTestFunction::new(0.0, 0.5, 0.5, 0.1).unwrap();
        assert_eq!(
            entropy_residual(&field, 0.3, &test, &lwr(), &unit_drift()).unwrap(),
            0.0
        );
    }

    #[test]
    fn expansion_shock_is_detected() {
        let t = times(101);
        let jump = PiecewiseConstantDensity::new(vec![-1.0, 0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let field = DensityField::new(t.clone(), vec![jump; t.len()], (-1.0, 1.0)).unwrap();
        let test = BumpTestFunction::new(0.0, 0.5, 0.2, 0.1).unwrap();
        let r = entropy_residual(&field, 0.5, &test, &lwr(), &unit_drift()).unwrap();
        // −½ B(0) ∫B(τ/w_t)dτ = −w_t/3
        assert!((r + 0.1 / 3.0).abs() < 1e-4, "{r}");
    }

    #[test]
    fn leaking_support_rejected() {
        let t = times(11);
        let d = vec![PiecewiseConstantDensity::block(-1.0, 1.0, 0.5).unwrap(); t.len()];
        let field = DensityField::new(t, d, (-1.0, 1.0)).unwrap();
        let test = BumpTestFunction::new(0.8, 0.5, 0.2, 0.1).unwrap();
        assert!(matches!(
            entropy_residual(&field, 0.0, &test, &lwr(), &unit_drift()),
            Err(Error::InvalidInput(_))
        ));
    }
}
