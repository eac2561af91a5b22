//! Follow-the-leader particle approximations of the scalar conservation law
//!
//! ```text
//! ρ_t + (ρ v(ρ) φ(x))_x = 0
//! ```
//!
//! with a non-increasing velocity law `v` and a space-dependent drift `φ`.
//! The particle schemes come in four flavours, selected by the sign structure
//! of the drift (forward, backward, repulsive, attractive). Around them the
//! crate provides the diagnostics needed to check the schemes numerically:
//! total variation, 1-Wasserstein distance via pseudo-inverses, discrete
//! maximum principles, a Godunov finite-volume reference solver and a
//! discrete Kružkov entropy-residual evaluator.
//!
//! Module map:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`model`] | velocity laws, drift potentials, piecewise constant densities, constants |
//! | [`atomizer`] | equal-mass atomization of an initial density |
//! | [`scheme`] | the four particle ODE systems and an ordering-guarded RK4 integrator |
//! | [`metrics`] | density reconstruction, TV, pseudo-inverse, W1 and L1 distances |
//! | [`reference`] | Godunov solver, exact LWR Riemann solver, entropy residuals |
//! | [`harness`] | convergence studies and property checks |
//! | [`cli`] | batch front end used by the `ftl` binary |

// `!(a < b)` style guards double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomizer;
pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model;
pub mod reference;
pub mod scheme;

pub use error::{Error, Result};
pub use model::{
    CaseLabel, PiecewiseConstantDensity, Potential, PotentialForm, Problem, ProblemConstants,
    ProblemSpec, VelocityForm, VelocityModel,
};
