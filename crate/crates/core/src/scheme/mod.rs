//! Follow-the-leader particle systems.
//!
//! With `Rᵢ = ℓ_n / (xᵢ₊₁ − xᵢ)` the four schemes read
//!
//! | case | interior particles | leaders |
//! |------|--------------------|---------|
//! | P1 (forward)    | `v(Rᵢ) φ(xᵢ)`, `i < n` | `x_n` at `v_max φ` |
//! | P2 (backward)   | `v(Rᵢ₋₁) φ(xᵢ)`, `i ≥ 1` | `x_0` at `v_max φ` |
//! | P3 (repulsive)  | backward for `1 ≤ i ≤ k_n`, forward for `k_n < i < n` | `x_0` and `x_n` |
//! | P4 (attractive) | forward for `i ≤ k_n`, backward for `i > k_n` | none |
//!
//! where `k_n` is the largest index with `x̄ᵢ ≤ 0` at time zero.

mod integrate;

use serde::{Deserialize, Serialize};

pub use integrate::{
    simulate, step, step_guarded, SimulationOptions, SnapshotDiagnostics, Trajectory,
};

use crate::atomizer::{split_index, AtomizationResult};
use crate::model::{CaseLabel, Potential, ProblemConstants, VelocityModel};
use crate::{Error, Result};

/// Upwind layout actually integrated.
///
/// P3/P4 data whose support sits on one side of the origin degrades to the
/// forward or backward scheme matching the drift direction there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Forward,
    Backward,
    /// `pinned` when `x̄_{k_n} = 0`: that particle is frozen at the origin.
    Repulsive {
        split: usize,
        pinned: bool,
    },
    Attractive {
        split: usize,
        pinned: bool,
    },
}

impl Scheme {
    fn resolve(case_label: CaseLabel, positions: &[f64]) -> Self {
        let n = positions.len() - 1;
        let k = split_index(positions);
        match (case_label, k) {
            (CaseLabel::P1, _) => Scheme::Forward,
            (CaseLabel::P2, _) => Scheme::Backward,
            (CaseLabel::P3, None) => Scheme::Forward,
            (CaseLabel::P3, Some(k)) if k == n => Scheme::Backward,
            (CaseLabel::P3, Some(k)) => Scheme::Repulsive {
                split: k,
                pinned: positions[k] == 0.0,
            },
            (CaseLabel::P4, None) => Scheme::Backward,
            (CaseLabel::P4, Some(k)) if k == n => Scheme::Forward,
            (CaseLabel::P4, Some(k)) => Scheme::Attractive {
                split: k,
                pinned: positions[k] == 0.0,
            },
        }
    }

    pub fn split(self) -> Option<usize> {
        match self {
            Scheme::Repulsive { split, .. } | Scheme::Attractive { split, .. } => Some(split),
            _ => None,
        }
    }

    pub fn pinned(self) -> bool {
        matches!(
            self,
            Scheme::Repulsive { pinned: true, .. } | Scheme::Attractive { pinned: true, .. }
        )
    }
}

/// Ordered particle positions with their mass quantum and scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSystem {
    positions: Vec<f64>,
    ell_n: f64,
    case_label: CaseLabel,
    scheme: Scheme,
    time: f64,
}

/// First adjacent pair that is not strictly increasing.
pub(crate) fn check_order(x: &[f64]) -> Result<()> {
    match x.windows(2).position(|w| !(w[1] > w[0])) {
        None => Ok(()),
        Some(i) => Err(Error::Collision {
            left: i,
            right: i + 1,
            x_left: x[i],
            x_right: x[i + 1],
        }),
    }
}

impl ParticleSystem {
    /// Builds a system at time zero; `k_n` and the scheme follow from the positions.
    pub fn new(positions: Vec<f64>, ell_n: f64, case_label: CaseLabel) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidInput("need at least two particles".into()));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "particle positions must be finite".into(),
            ));
        }
        if !(ell_n > 0.0 && ell_n.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mass quantum must be positive, got {ell_n}"
            )));
        }
        check_order(&positions)?;
        let scheme = Scheme::resolve(case_label, &positions);
        Ok(Self {
            positions,
            ell_n,
            case_label,
            scheme,
            time: 0.0,
        })
    }

    /// Builds the system for an atomized datum. For data straddling the
    /// origin in the sign-changing cases the split index must satisfy
    /// `2 ≤ k_n ≤ n − 3`.
    pub fn from_atomization(atom: &AtomizationResult, case_label: CaseLabel) -> Result<Self> {
        let sys = Self::new(atom.positions.clone(), atom.ell_n, case_label)?;
        if let Some(k) = sys.scheme.split() {
            let n = atom.n;
            if k < 2 || k + 3 > n {
                return Err(Error::InvalidInput(format!(
                    "split index k_n = {k} outside [2, n - 3] for n = {n}; increase n"
                )));
            }
        }
        Ok(sys)
    }

    pub(crate) fn advanced(&self, positions: Vec<f64>, time: f64) -> Self {
        Self {
            positions,
            time,
            ..self.clone()
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Number of particle intervals (`n + 1` particles).
    pub fn n(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn ell_n(&self) -> f64 {
        self.ell_n
    }

    pub fn case_label(&self) -> CaseLabel {
        self.case_label
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Split index for the sign-changing schemes.
    pub fn k_n(&self) -> Option<usize> {
        self.scheme.split()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn min_spacing(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `x_n − x_0`
    pub fn diameter(&self) -> f64 {
        self.positions[self.n()] - self.positions[0]
    }
}

/// `Rᵢ = ℓ_n / (xᵢ₊₁ − xᵢ)`
pub fn discrete_density_ratios(sys: &ParticleSystem) -> Result<Vec<f64>> {
    density_ratios(&sys.positions, sys.ell_n)
}

pub(crate) fn density_ratios(x: &[f64], ell_n: f64) -> Result<Vec<f64>> {
    check_order(x)?;
    Ok(x.windows(2).map(|w| ell_n / (w[1] - w[0])).collect())
}

/// Particle velocities of the scheme. Positions must be strictly increasing.
#[allow(clippy::needless_range_loop)]
pub(crate) fn velocities_into(
    x: &[f64],
    ell_n: f64,
    scheme: Scheme,
    model: &VelocityModel,
    pot: &Potential,
    out: &mut [f64],
) {
    let n = x.len() - 1;
    let ratio = |i: usize| ell_n / (x[i + 1] - x[i]);
    let forward = |i: usize| model.speed(ratio(i)) * pot.value(x[i]);
    let backward = |i: usize| model.speed(ratio(i - 1)) * pot.value(x[i]);
    let leader = |i: usize| model.v_max() * pot.value(x[i]);
    match scheme {
        Scheme::Forward => {
            for i in 0..n {
                out[i] = forward(i);
            }
            out[n] = leader(n);
        }
        Scheme::Backward => {
            out[0] = leader(0);
            for i in 1..=n {
                out[i] = backward(i);
            }
        }
        Scheme::Repulsive { split, pinned } => {
            out[0] = leader(0);
            for i in 1..=split {
                out[i] = backward(i);
            }
            for i in split + 1..n {
                out[i] = forward(i);
            }
            out[n] = leader(n);
            if pinned {
                out[split] = 0.0;
            }
        }
        Scheme::Attractive { split, pinned } => {
            for i in 0..=split {
                out[i] = forward(i);
            }
            for i in split + 1..=n {
                out[i] = backward(i);
            }
            if pinned {
                out[split] = 0.0;
            }
        }
    }
}

/// Right-hand side of the particle ODE system.
pub fn rhs(sys: &ParticleSystem, model: &VelocityModel, pot: &Potential) -> Result<Vec<f64>> {
    if sys.case_label != pot.case_label() {
        return Err(Error::Configuration(format!(
            "particle system built for {} but potential is labelled {}",
            sys.case_label,
            pot.case_label()
        )));
    }
    check_order(&sys.positions)?;
    let mut out = vec![0.0; sys.positions.len()];
    velocities_into(&sys.positions, sys.ell_n, sys.scheme, model, pot, &mut out);
    Ok(out)
}

/// Lower bound on consecutive spacings: `(ℓ_n/R̄) e^{−L′t}` in P1–P3,
/// `ℓ_n/R_max` in P4.
pub fn spacing_lower_bound(
    t: f64,
    constants: &ProblemConstants,
    ell_n: f64,
    case_label: CaseLabel,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "time must be non-negative, got {t}"
        )));
    }
    match case_label {
        CaseLabel::P4 => constants.r_max.map(|r| ell_n / r).ok_or_else(|| {
            Error::Configuration("attractive case needs a velocity cutoff r_max".into())
        }),
        _ => {
            let decay = if constants.big_l_prime == 0.0 {
                1.0
            } else {
                (-constants.big_l_prime * t).exp()
            };
            Ok(ell_n / constants.r_bar * decay)
        }
    }
}

/// Upper bound on the diameter `x_n − x_0`: `W₀ + 2Lt`, or `W₀` in P4.
pub fn diameter_upper_bound(
    t: f64,
    constants: &ProblemConstants,
    initial_width: f64,
    case_label: CaseLabel,
) -> f64 {
    match case_label {
        CaseLabel::P4 => initial_width,
        _ if t == 0.0 => initial_width,
        _ => initial_width + 2.0 * constants.big_l * t,
    }
}
