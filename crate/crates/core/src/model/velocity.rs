//! Velocity laws `ρ ↦ v(ρ)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Analytic families plus a user table. Parameters are given in density units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case")]
pub enum VelocityForm {
    /// `v_max · (1 − ρ/ρ_ref)₊`. Vanishes from `ρ_ref` on, so `ρ_ref` doubles as cutoff.
    Linear { v_max: f64, rho_ref: f64 },
    /// `v_max / (1 + ρ)`, multiplied by `(1 − ρ/r_max)₊` when a cutoff is given.
    Reciprocal {
        v_max: f64,
        #[serde(default)]
        r_max: Option<f64>,
    },
    /// Free-flow plateau `v_max` on `[0, rho_free]`, then linear down to zero at `r_max`.
    CutoffLinear {
        v_max: f64,
        r_max: f64,
        #[serde(default)]
        rho_free: f64,
    },
    /// `v ≡ v_max`.
    Constant { v_max: f64 },
    /// Piecewise linear interpolation of `(rho, v)` knots, constant past the last knot.
    /// The Lipschitz constant must be declared and is checked against the knots.
    Table {
        rho: Vec<f64>,
        v: Vec<f64>,
        lip_v: f64,
        #[serde(default)]
        r_max: Option<f64>,
    },
}

/// A validated velocity law together with the constants the bound formulas consume.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityModel {
    form: VelocityForm,
    v_max: f64,
    lip_v: f64,
    r_max: Option<f64>,
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

impl VelocityModel {
    pub fn new(form: VelocityForm) -> Result<Self> {
        let (v_max, lip_v, r_max) = match &form {
            VelocityForm::Linear { v_max, rho_ref } => {
                positive("v_max", *v_max)?;
                positive("rho_ref", *rho_ref)?;
                (*v_max, v_max / rho_ref, Some(*rho_ref))
            }
            VelocityForm::Reciprocal { v_max, r_max } => {
                positive("v_max", *v_max)?;
                match r_max {
                    Some(r) => {
                        positive("r_max", *r)?;
                        (*v_max, v_max * (1.0 + 1.0 / r), Some(*r))
                    }
                    None => (*v_max, *v_max, None),
                }
            }
            VelocityForm::CutoffLinear {
                v_max,
                r_max,
                rho_free,
            } => {
                positive("v_max", *v_max)?;
                positive("r_max", *r_max)?;
                if !(*rho_free >= 0.0 && rho_free < r_max) {
                    return Err(Error::InvalidInput(format!(
                        "rho_free must lie in [0, r_max), got {rho_free}"
                    )));
                }
                (*v_max, v_max / (r_max - rho_free), Some(*r_max))
            }
            VelocityForm::Constant { v_max } => {
                positive("v_max", *v_max)?;
                (*v_max, 0.0, None)
            }
            VelocityForm::Table {
                rho,
                v,
                lip_v,
                r_max,
            } => {
                Self::validate_table(rho, v, *lip_v, *r_max)?;
                (v[0], *lip_v, *r_max)
            }
        };
        let model = Self {
            form,
            v_max,
            lip_v,
            r_max,
        };
        model.validate_samples(10_000)?;
        Ok(model)
    }

    fn validate_table(rho: &[f64], v: &[f64], lip_v: f64, r_max: Option<f64>) -> Result<()> {
        if rho.len() < 2 || rho.len() != v.len() {
            return Err(Error::InvalidInput(
                "velocity table needs at least two (rho, v) knots of equal length".into(),
            ));
        }
        if rho[0] != 0.0 {
            return Err(Error::InvalidInput(
                "velocity table must start at rho = 0".into(),
            ));
        }
        if !(lip_v.is_finite() && lip_v >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "declared lip_v invalid: {lip_v}"
            )));
        }
        for (i, w) in rho.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "velocity table knots not strictly increasing at {i}"
                )));
            }
            let (v0, v1) = (v[i], v[i + 1]);
            if v1 > v0 || v1 < 0.0 || !v1.is_finite() || !v0.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "velocity table must be non-negative and non-increasing (knot {})",
                    i + 1
                )));
            }
            let slope = (v0 - v1) / (w[1] - w[0]);
            if slope > lip_v * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "declared lip_v = {lip_v} below table slope {slope}"
                )));
            }
        }
        if !(v[0] > 0.0) {
            return Err(Error::InvalidInput("velocity table needs v(0) > 0".into()));
        }
        if let Some(r) = r_max {
            positive("r_max", r)?;
            let at = interp_table(rho, v, r);
            if at != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "declared r_max = {r} but v(r_max) = {at}"
                )));
            }
            if rho.iter().zip(v).any(|(&x, &y)| x < r && y <= 0.0) {
                return Err(Error::InvalidInput(
                    "velocity table vanishes before the declared r_max".into(),
                ));
            }
        }
        Ok(())
    }

    /// Sample-grid check of sign, monotonicity, Lipschitz bound and cutoff.
    fn validate_samples(&self, samples: usize) -> Result<()> {
        let top = 2.0 * self.r_max.unwrap_or(1.0).max(1.0) + 8.0;
        let h = top / samples as f64;
        let mut prev = self.speed(0.0);
        if (prev - self.v_max).abs() > 1e-14 * self.v_max {
            return Err(Error::InvalidInput("v(0) differs from v_max".into()));
        }
        for j in 1..=samples {
            let rho = j as f64 * h;
            let cur = self.speed(rho);
            if cur < 0.0 || cur > prev + 1e-15 {
                return Err(Error::InvalidInput(format!(
                    "velocity law not non-negative and non-increasing near rho = {rho}"
                )));
            }
            if (prev - cur) > self.lip_v * h * (1.0 + 1e-9) + 1e-15 {
                return Err(Error::InvalidInput(format!(
                    "velocity law exceeds its Lipschitz constant near rho = {rho}"
                )));
            }
            if let Some(r) = self.r_max {
                if (rho >= r && cur != 0.0) || (rho < r && cur <= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "cutoff violated near rho = {rho} (r_max = {r})"
                    )));
                }
            }
            prev = cur;
        }
        Ok(())
    }

    pub fn form(&self) -> &VelocityForm {
        &self.form
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Lipschitz constant of `v`.
    pub fn lip_v(&self) -> f64 {
        self.lip_v
    }

    /// Density from which `v` vanishes identically, when the law has one.
    pub fn r_max(&self) -> Option<f64> {
        self.r_max
    }

    /// Evaluates `v(ρ)`. Negative densities are rejected.
    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) {
            return Err(Error::Domain {
                what: "rho",
                value: rho,
            });
        }
        Ok(self.speed(rho))
    }

    /// `v(ρ)` for `ρ ≥ 0`; the caller guarantees the domain.
    #[inline]
    pub(crate) fn speed(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0);
        match &self.form {
            VelocityForm::Linear { v_max, rho_ref } => v_max * (1.0 - rho / rho_ref).max(0.0),
            VelocityForm::Reciprocal { v_max, r_max } => {
                let base = v_max / (1.0 + rho);
                match r_max {
                    Some(r) => base * (1.0 - rho / r).max(0.0),
                    None => base,
                }
            }
            VelocityForm::CutoffLinear {
                v_max,
                r_max,
                rho_free,
            } => {
                if rho <= *rho_free {
                    *v_max
                } else {
                    v_max * ((r_max - rho) / (r_max - rho_free)).max(0.0)
                }
            }
            VelocityForm::Constant { v_max } => *v_max,
            VelocityForm::Table { rho: knots, v, .. } => interp_table(knots, v, rho),
        }
    }

    /// The flux `f(ρ) = ρ v(ρ)`.
    #[inline]
    pub fn flux(&self, rho: f64) -> f64 {
        rho * self.speed(rho)
    }
}

pub(crate) fn interp_table(knots: &[f64], values: &[f64], x: f64) -> f64 {
    let last = knots.len() - 1;
    if x >= knots[last] {
        return values[last];
    }
    let j = knots.partition_point(|&k| k <= x).saturating_sub(1);
    let t = (x - knots[j]) / (knots[j + 1] - knots[j]);
    values[j] + t * (values[j + 1] - values[j])
}
