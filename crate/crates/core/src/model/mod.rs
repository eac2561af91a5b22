//! Problem data: velocity law, drift potential, initial density and the
//! constants derived from them.
//!
//! A problem is usually loaded from JSON:
//!
//! ```json
//! {
//!   "velocity":  { "form": "linear", "params": { "v_max": 1.0, "rho_ref": 1.0 } },
//!   "potential": { "form": "constant", "params": { "value": 1.0 }, "case": "P1" },
//!   "initial":   { "breakpoints": [0.0, 1.0], "values": [1.0] }
//! }
//! ```

mod density;
mod potential;
mod velocity;

use serde::{Deserialize, Serialize};

pub use density::PiecewiseConstantDensity;
pub use potential::{CaseLabel, Potential, PotentialForm, DEFAULT_SAMPLES, DEFAULT_WINDOW};
pub use velocity::{VelocityForm, VelocityModel};

use crate::{Error, Result};

/// Constants consumed by the maximum-principle, support and TV bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// `L = v_max ‖φ‖_∞`, the particle speed bound.
    pub big_l: f64,
    /// `L′ = v_max ‖φ′‖_∞`, the exponential rate of the spacing bound.
    pub big_l_prime: f64,
    /// `R̄ = ‖ρ̄‖_∞`
    pub r_bar: f64,
    /// Density cutoff of the velocity law, if any.
    pub r_max: Option<f64>,
}

fn product(v_max: f64, sup: f64) -> f64 {
    if v_max == 0.0 {
        0.0
    } else {
        v_max * sup
    }
}

impl ProblemConstants {
    pub fn derive(
        model: &VelocityModel,
        pot: &Potential,
        initial: &PiecewiseConstantDensity,
    ) -> Result<Self> {
        let r_bar = initial.sup();
        if !(r_bar > 0.0) {
            return Err(Error::InvalidInput(
                "initial density is identically zero".into(),
            ));
        }
        if pot.case_label() == CaseLabel::P4 {
            if let Some(r_max) = model.r_max() {
                if r_bar > r_max {
                    return Err(Error::Configuration(format!(
                        "attractive case needs sup of the initial density ({r_bar}) <= r_max ({r_max})"
                    )));
                }
            }
        }
        Ok(Self {
            big_l: product(model.v_max(), pot.sup_phi()),
            big_l_prime: product(model.v_max(), pot.sup_dphi()),
            r_bar,
            r_max: model.r_max(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub form: PotentialForm,
    pub case: CaseLabel,
    /// Validation window for the sign condition; defaults to `[-10, 10]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

/// The serialized form of a problem definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub velocity: VelocityForm,
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
}

/// A validated problem: everything a particle or reference run needs.
#[derive(Debug, Clone)]
pub struct Problem {
    pub velocity: VelocityModel,
    pub potential: Potential,
    pub initial: PiecewiseConstantDensity,
    pub constants: ProblemConstants,
}

impl Problem {
    pub fn new(
        velocity: VelocityModel,
        potential: Potential,
        initial: PiecewiseConstantDensity,
    ) -> Result<Self> {
        let constants = ProblemConstants::derive(&velocity, &potential, &initial)?;
        Ok(Self {
            velocity,
            potential,
            initial,
            constants,
        })
    }

    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        let velocity = VelocityModel::new(spec.velocity.clone())?;
        let window = spec.potential.window.unwrap_or(DEFAULT_WINDOW);
        let potential = Potential::with_window(
            spec.potential.form.clone(),
            spec.potential.case,
            window,
            DEFAULT_SAMPLES,
        )?;
        let initial = PiecewiseConstantDensity::new(
            spec.initial.breakpoints.clone(),
            spec.initial.values.clone(),
        )?;
        Self::new(velocity, potential, initial)
    }

    pub fn case_label(&self) -> CaseLabel {
        self.potential.case_label()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn density(h: f64) -> PiecewiseConstantDensity {
        PiecewiseConstantDensity::block(0.0, 1.0 / h, h).unwrap()
    }

    #[test]
    fn constants_for_constant_potential() {
        let v = VelocityModel::new(VelocityForm::Linear {
            v_max: 1.0,
            rho_ref: 1.0,
        })
        .unwrap();
        let p = Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap();
        let c = ProblemConstants::derive(&v, &p, &density(1.0)).unwrap();
        assert_eq!((c.big_l, c.big_l_prime, c.r_bar), (1.0, 0.0, 1.0));
    }

    #[test]
    fn constants_product_formula() {
        let v = VelocityModel::new(VelocityForm::Constant { v_max: 2.0 }).unwrap();
        // 1 + 0.5 sin(x): sup 1.5, sup of derivative 0.5
        let p = Potential::new(
            PotentialForm::Sinusoid {
                offset: 1.0,
                amplitude: 0.5,
                frequency: 1.0,
            },
            CaseLabel::P1,
        )
        .unwrap();
        let c = ProblemConstants::derive(&v, &p, &density(1.0)).unwrap();
        assert_eq!((c.big_l, c.big_l_prime), (3.0, 1.0));
    }

    #[test]
    fn empty_density_rejected() {
        let v = VelocityModel::new(VelocityForm::Constant { v_max: 1.0 }).unwrap();
        let p = Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap();
        let zero = PiecewiseConstantDensity::block(0.0, 1.0, 0.0).unwrap();
        assert!(ProblemConstants::derive(&v, &p, &zero).is_err());
    }

    #[test]
    fn attractive_case_checks_cutoff() {
        let v = VelocityModel::new(VelocityForm::Linear {
            v_max: 1.0,
            rho_ref: 1.0,
        })
        .unwrap();
        let p = Potential::new(
            PotentialForm::Saturating {
                amplitude: -1.0,
                scale: 1.0,
            },
            CaseLabel::P4,
        )
        .unwrap();
        assert!(ProblemConstants::derive(&v, &p, &density(2.0)).is_err());
        assert!(ProblemConstants::derive(&v, &p, &density(1.0)).is_ok());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let json = r#"{
            "velocity": {"form": "reciprocal", "params": {"v_max": 1.0, "r_max": 2.0}},
            "potential": {"form": "saturating", "params": {"amplitude": -1.0, "scale": 1.0}, "case": "P4"},
            "initial": {"breakpoints": [-0.5, 0.5], "values": [1.0]}
        }"#;
        let spec: ProblemSpec = serde_json::from_str(json).unwrap();
        let problem = Problem::from_spec(&spec).unwrap();
        assert_eq!(problem.case_label(), CaseLabel::P4);
        assert_eq!(problem.constants.r_max, Some(2.0));
        let back: ProblemSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
