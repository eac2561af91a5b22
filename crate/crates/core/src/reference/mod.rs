//! Entropy-solution oracles: Godunov finite volumes, exact LWR Riemann
//! solutions and a Kružkov entropy-residual detector.

mod entropy;
mod godunov;
mod riemann;

pub use entropy::{bspline, bspline_derivative, entropy_residual, BumpTestFunction, DensityField};
pub use godunov::{
    fv_solve, fv_solve_coupled, godunov_flux, godunov_interface_flux, FvGrid, FvSolution,
    StepRecord, CFL, MASS_TOLERANCE, NEGATIVE_TOLERANCE,
};
pub use riemann::{exact_lwr_riemann, LwrBlock, LwrRiemann};
