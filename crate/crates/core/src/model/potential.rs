//! Drift potentials `x ↦ φ(x)` and their case labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sign structure of the drift, which selects the particle scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// `φ ≥ 0`: forward movement.
    P1,
    /// `φ ≤ 0`: backward movement.
    P2,
    /// `x φ(x) ≥ 0`: repulsive movement.
    P3,
    /// `x φ(x) ≤ 0`: attractive movement.
    P4,
}

impl CaseLabel {
    /// Whether `φ(x)` respects the sign condition of this case at `x`.
    pub fn admits(self, x: f64, phi: f64, slack: f64) -> bool {
        match self {
            CaseLabel::P1 => phi >= -slack,
            CaseLabel::P2 => phi <= slack,
            CaseLabel::P3 => x * phi >= -slack * x.abs(),
            CaseLabel::P4 => x * phi <= slack * x.abs(),
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::P1 => "P1",
            CaseLabel::P2 => "P2",
            CaseLabel::P3 => "P3",
            CaseLabel::P4 => "P4",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(CaseLabel::P1),
            "P2" => Ok(CaseLabel::P2),
            "P3" => Ok(CaseLabel::P3),
            "P4" => Ok(CaseLabel::P4),
            other => Err(Error::Configuration(format!("unknown case label {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case")]
pub enum PotentialForm {
    /// `φ ≡ value`.
    Constant { value: f64 },
    /// `offset + amplitude · sin(frequency · x)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `amplitude · u / (1 + u²)` with `u = x / scale`. Odd, bounded, smooth:
    /// positive amplitude is repulsive, negative attractive.
    Saturating { amplitude: f64, scale: f64 },
    /// `amplitude · sign(x) · |x|^alpha`, `0 < alpha < 1`.
    ///
    /// Not Lipschitz at the origin and unbounded, so it sits outside the regular
    /// `W^{2,∞}` class. Only meant for collision/blow-up demonstrations.
    OddPower { amplitude: f64, alpha: f64 },
    /// Clamped cubic spline through `(x, phi)` with zero end slopes, constant
    /// outside the knot range. Sup-norms must be declared.
    Table {
        x: Vec<f64>,
        phi: Vec<f64>,
        sup_phi: f64,
        sup_dphi: f64,
        sup_ddphi: f64,
    },
}

/// A validated drift with exact sup-norms of `φ`, `φ′` and `φ″`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    form: PotentialForm,
    case_label: CaseLabel,
    sup_phi: f64,
    sup_dphi: f64,
    sup_ddphi: f64,
    spline: Option<CubicSpline>,
}

/// Default validation window and sample count.
pub const DEFAULT_WINDOW: (f64, f64) = (-10.0, 10.0);
pub const DEFAULT_SAMPLES: usize = 10_000;

impl Potential {
    pub fn new(form: PotentialForm, case_label: CaseLabel) -> Result<Self> {
        Self::with_window(form, case_label, DEFAULT_WINDOW, DEFAULT_SAMPLES)
    }

    /// Builds the potential and checks the case sign condition on `samples`
    /// uniformly spaced points of `window`.
    pub fn with_window(
        form: PotentialForm,
        case_label: CaseLabel,
        window: (f64, f64),
        samples: usize,
    ) -> Result<Self> {
        let finite = |x: f64| x.is_finite();
        let mut spline = None;
        let (sup_phi, sup_dphi, sup_ddphi) = match &form {
            PotentialForm::Constant { value } => {
                if !finite(*value) {
                    return Err(Error::InvalidInput(
                        "constant potential must be finite".into(),
                    ));
                }
                (value.abs(), 0.0, 0.0)
            }
            PotentialForm::Sinusoid {
                offset,
                amplitude,
                frequency,
            } => {
                if !(finite(*offset) && finite(*amplitude) && finite(*frequency)) {
                    return Err(Error::InvalidInput(
                        "sinusoid parameters must be finite".into(),
                    ));
                }
                if *frequency == 0.0 {
                    (offset.abs(), 0.0, 0.0)
                } else {
                    (
                        offset.abs() + amplitude.abs(),
                        (amplitude * frequency).abs(),
                        amplitude.abs() * frequency * frequency,
                    )
                }
            }
            PotentialForm::Saturating { amplitude, scale } => {
                if !(finite(*amplitude) && scale.is_finite() && *scale > 0.0) {
                    return Err(Error::InvalidInput(
                        "saturating potential needs finite amplitude and positive scale".into(),
                    ));
                }
                let a = amplitude.abs();
                // |d²/du² u/(1+u²)| peaks at u = √2 − 1.
                let u = std::f64::consts::SQRT_2 - 1.0;
                let peak = ((2.0 * u * u * u - 6.0 * u) / (1.0 + u * u).powi(3)).abs();
                (a / 2.0, a / scale, a * peak / (scale * scale))
            }
            PotentialForm::OddPower { amplitude, alpha } => {
                if !(finite(*amplitude) && *alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::InvalidInput(
                        "odd power potential needs 0 < alpha < 1".into(),
                    ));
                }
                (f64::INFINITY, f64::INFINITY, f64::INFINITY)
            }
            PotentialForm::Table {
                x,
                phi,
                sup_phi,
                sup_dphi,
                sup_ddphi,
            } => {
                if ![*sup_phi, *sup_dphi, *sup_ddphi]
                    .iter()
                    .all(|s| s.is_finite() && *s >= 0.0)
                {
                    return Err(Error::InvalidInput(
                        "tabulated potential must declare finite sup-norms".into(),
                    ));
                }
                spline = Some(CubicSpline::clamped(x, phi)?);
                (*sup_phi, *sup_dphi, *sup_ddphi)
            }
        };
        let pot = Self {
            form,
            case_label,
            sup_phi,
            sup_dphi,
            sup_ddphi,
            spline,
        };
        pot.validate(window, samples)?;
        Ok(pot)
    }

    fn validate(&self, window: (f64, f64), samples: usize) -> Result<()> {
        let (a, b) = window;
        if !(a < b) || samples < 2 {
            return Err(Error::InvalidInput("empty validation window".into()));
        }
        let slack = 1e-14 * self.sup_phi.clamp(1.0, 1e300);
        let declared = matches!(self.form, PotentialForm::Table { .. });
        for j in 0..samples {
            let x = a + (b - a) * j as f64 / (samples - 1) as f64;
            let phi = self.value(x);
            if !self.case_label.admits(x, phi, slack) {
                return Err(Error::Configuration(format!(
                    "potential violates the {} sign condition at x = {x} (phi = {phi})",
                    self.case_label
                )));
            }
            if declared {
                let over = |v: f64, s: f64| v.abs() > s * (1.0 + 1e-9) + 1e-12;
                if over(phi, self.sup_phi)
                    || over(self.derivative(x), self.sup_dphi)
                    || over(self.second_derivative(x), self.sup_ddphi)
                {
                    return Err(Error::InvalidInput(format!(
                        "tabulated potential exceeds a declared sup-norm near x = {x}"
                    )));
                }
            }
        }
        if matches!(self.case_label, CaseLabel::P3 | CaseLabel::P4)
            && self.value(0.0).abs() > 1e-12 * self.sup_phi.clamp(1.0, 1e300)
        {
            return Err(Error::Configuration(
                "a sign-changing drift must vanish at the origin".into(),
            ));
        }
        Ok(())
    }

    pub fn form(&self) -> &PotentialForm {
        &self.form
    }

    pub fn case_label(&self) -> CaseLabel {
        self.case_label
    }

    /// `‖φ‖_∞`
    pub fn sup_phi(&self) -> f64 {
        self.sup_phi
    }

    /// `‖φ′‖_∞`
    pub fn sup_dphi(&self) -> f64 {
        self.sup_dphi
    }

    /// `‖φ″‖_∞`
    pub fn sup_ddphi(&self) -> f64 {
        self.sup_ddphi
    }

    /// True when all three sup-norms are finite.
    pub fn is_regular(&self) -> bool {
        self.sup_phi.is_finite() && self.sup_dphi.is_finite() && self.sup_ddphi.is_finite()
    }

    /// Bound on `|φ|` over `[a, b]`. Exact for the singular form, the global
    /// sup otherwise.
    pub fn sup_abs_on(&self, a: f64, b: f64) -> f64 {
        match &self.form {
            PotentialForm::OddPower { amplitude, alpha } => {
                amplitude.abs() * a.abs().max(b.abs()).powf(*alpha)
            }
            _ => self.sup_phi,
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match &self.form {
            PotentialForm::Constant { value } => *value,
            PotentialForm::Sinusoid {
                offset,
                amplitude,
                frequency,
            } => offset + amplitude * (frequency * x).sin(),
            PotentialForm::Saturating { amplitude, scale } => {
                let u = x / scale;
                amplitude * u / (1.0 + u * u)
            }
            PotentialForm::OddPower { amplitude, alpha } => {
                if x == 0.0 {
                    0.0
                } else {
                    amplitude * x.signum() * x.abs().powf(*alpha)
                }
            }
            PotentialForm::Table { .. } => self.spline.as_ref().map_or(0.0, |s| s.value(x)),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.form {
            PotentialForm::Constant { .. } => 0.0,
            PotentialForm::Sinusoid {
                amplitude,
                frequency,
                ..
            } => amplitude * frequency * (frequency * x).cos(),
            PotentialForm::Saturating { amplitude, scale } => {
                let u = x / scale;
                let q = 1.0 + u * u;
                amplitude / scale * (1.0 - u * u) / (q * q)
            }
            PotentialForm::OddPower { amplitude, alpha } => {
                if x == 0.0 {
                    f64::INFINITY * amplitude.signum()
                } else {
                    amplitude * alpha * x.abs().powf(alpha - 1.0)
                }
            }
            PotentialForm::Table { .. } => self.spline.as_ref().map_or(0.0, |s| s.derivative(x)),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match &self.form {
            PotentialForm::Constant { .. } => 0.0,
            PotentialForm::Sinusoid {
                amplitude,
                frequency,
                ..
            } => -amplitude * frequency * frequency * (frequency * x).sin(),
            PotentialForm::Saturating { amplitude, scale } => {
                let u = x / scale;
                let q = 1.0 + u * u;
                amplitude / (scale * scale) * (2.0 * u * u * u - 6.0 * u) / (q * q * q)
            }
            PotentialForm::OddPower { amplitude, alpha } => {
                if x == 0.0 {
                    f64::NAN
                } else {
                    amplitude * alpha * (alpha - 1.0) * x.signum() * x.abs().powf(alpha - 2.0)
                }
            }
            PotentialForm::Table { .. } => {
                self.spline.as_ref().map_or(0.0, |s| s.second_derivative(x))
            }
        }
    }
}

/// Cubic spline with prescribed zero slope at both ends.
#[derive(Debug, Clone, PartialEq)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    fn clamped(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || n != y.len() {
            return Err(Error::InvalidInput(
                "potential table needs at least two (x, phi) knots of equal length".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "potential table knots must be finite and strictly increasing".into(),
            ));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        // tridiagonal system for the second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * slope[0];
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
        }
        sub[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = -6.0 * slope[n - 2];
        // Thomas algorithm
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    /// Segment index and local offsets, `None` outside the knot range.
    fn locate(&self, x: f64) -> Option<(usize, f64, f64, f64)> {
        let n = self.x.len();
        if x <= self.x[0] || x >= self.x[n - 1] {
            return None;
        }
        let i = self.x.partition_point(|&k| k <= x) - 1;
        let h = self.x[i + 1] - self.x[i];
        Some((i, h, self.x[i + 1] - x, x - self.x[i]))
    }

    fn value(&self, x: f64) -> f64 {
        match self.locate(x) {
            None if x <= self.x[0] => self.y[0],
            None => self.y[self.y.len() - 1],
            Some((i, h, a, b)) => {
                let (m0, m1) = (self.m[i], self.m[i + 1]);
                m0 * a * a * a / (6.0 * h)
                    + m1 * b * b * b / (6.0 * h)
                    + (self.y[i] / h - m0 * h / 6.0) * a
                    + (self.y[i + 1] / h - m1 * h / 6.0) * b
            }
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => 0.0,
            Some((i, h, a, b)) => {
                let (m0, m1) = (self.m[i], self.m[i + 1]);
                -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (self.y[i] / h - m0 * h / 6.0)
                    + (self.y[i + 1] / h - m1 * h / 6.0)
            }
        }
    }

    fn second_derivative(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => 0.0,
            Some((i, h, a, b)) => (self.m[i] * a + self.m[i + 1] * b) / h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_value() {
        let p = Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap();
        assert_eq!(p.value(3.7), 1.0);
        assert_eq!((p.sup_phi(), p.sup_dphi(), p.sup_ddphi()), (1.0, 0.0, 0.0));
    }

    #[test]
    fn saturating_attractive_vanishes_at_origin() {
        let p = Potential::new(
            PotentialForm::Saturating {
                amplitude: -1.0,
                scale: 1.0,
            },
            CaseLabel::P4,
        )
        .unwrap();
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.sup_phi(), 0.5);
        assert_eq!(p.sup_dphi(), 1.0);
    }

    #[test]
    fn odd_power_example() {
        let p = Potential::new(
            PotentialForm::OddPower {
                amplitude: -1.0,
                alpha: 0.5,
            },
            CaseLabel::P4,
        )
        .unwrap();
        assert_eq!(p.value(4.0), -2.0);
        assert_eq!(p.value(-4.0), 2.0);
        assert!(!p.is_regular());
        assert_eq!(p.sup_abs_on(-1.0, 4.0), 2.0);
    }

    #[test]
    fn wrong_case_label_rejected() {
        let sinus = PotentialForm::Sinusoid {
            offset: 1.0,
            amplitude: 0.5,
            frequency: 1.0,
        };
        assert!(Potential::new(sinus.clone(), CaseLabel::P1).is_ok());
        assert!(Potential::new(sinus, CaseLabel::P2).is_err());
        let repulsive = PotentialForm::Saturating {
            amplitude: 1.0,
            scale: 1.0,
        };
        assert!(Potential::new(repulsive.clone(), CaseLabel::P4).is_err());
        assert!(Potential::new(repulsive, CaseLabel::P3).is_ok());
    }

    #[test]
    fn spline_interpolates_and_is_clamped() {
        let x = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let phi = vec![0.0, 0.5, 1.0, 0.5, 0.0];
        let s = CubicSpline::clamped(&x, &phi).unwrap();
        for (xi, yi) in x.iter().zip(&phi) {
            assert!((s.value(*xi) - yi).abs() < 1e-14);
        }
        assert!(s.derivative(-2.0 + 1e-9).abs() < 1e-7);
        assert!(s.derivative(2.0 - 1e-9).abs() < 1e-7);
        // C¹ across an interior knot
        let d = s.derivative(1.0 - 1e-10) - s.derivative(1.0 + 1e-10);
        assert!(d.abs() < 1e-8);
    }

    #[test]
    fn table_sup_norms_checked() {
        let x = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let phi = vec![1.0, 1.5, 2.0, 1.5, 1.0];
        let form = |sup_phi| PotentialForm::Table {
            x: x.clone(),
            phi: phi.clone(),
            sup_phi,
            sup_dphi: 10.0,
            sup_ddphi: 10.0,
        };
        assert!(Potential::new(form(2.0), CaseLabel::P1).is_ok());
        assert!(Potential::new(form(1.0), CaseLabel::P1).is_err());
    }
}
