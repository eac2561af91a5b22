//! First-order Godunov finite volumes for `ρ_t + (f(ρ) φ(x))_x = 0`, `f(ρ) = ρ v(ρ)`.

use serde::{Deserialize, Serialize};

use crate::model::{PiecewiseConstantDensity, Potential, VelocityForm, VelocityModel};
use crate::{Error, Result};

pub const CFL: f64 = 0.45;
/// Cell values below this are reported instead of clamped.
pub const NEGATIVE_TOLERANCE: f64 = -1e-13;
/// Relative mass drift tolerated over a run.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Empty cells padded on each side of the reachable support.
const PAD_CELLS: f64 = 10.0;
/// Multiple of the diffusion length `√(dx L T)` added to the padding.
const DIFFUSIVE_PAD: f64 = 10.0;

/// Density where `f` stops increasing, for the unimodal analytic fluxes.
fn flux_peak(model: &VelocityModel) -> Option<f64> {
    match model.form() {
        VelocityForm::Linear { rho_ref, .. } => Some(0.5 * rho_ref),
        VelocityForm::Reciprocal { r_max: None, .. } | VelocityForm::Constant { .. } => {
            Some(f64::INFINITY)
        }
        VelocityForm::Reciprocal { r_max: Some(r), .. } => Some((1.0 + r).sqrt() - 1.0),
        VelocityForm::CutoffLinear {
            r_max, rho_free, ..
        } => Some(rho_free.max(0.5 * r_max)),
        VelocityForm::Table { .. } => None,
    }
}

/// Candidate extremum locations of the piecewise quadratic table flux on `[lo, hi]`.
fn table_candidates(knots: &[f64], v: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut c = vec![lo, hi];
    for (i, w) in knots.windows(2).enumerate() {
        if w[0] > lo && w[0] < hi {
            c.push(w[0]);
        }
        let slope = (v[i + 1] - v[i]) / (w[1] - w[0]);
        if slope != 0.0 {
            // f′ = v_i + slope (2ρ − ρ_i) vanishes here
            let vertex = 0.5 * (w[0] - v[i] / slope);
            if vertex > w[0].max(lo) && vertex < w[1].min(hi) {
                c.push(vertex);
            }
        }
    }
    if let Some(&last) = knots.last() {
        if last > lo && last < hi {
            c.push(last);
        }
    }
    c
}

fn extremum(model: &VelocityModel, lo: f64, hi: f64, maximize: bool) -> f64 {
    match flux_peak(model) {
        Some(peak) => {
            if maximize {
                model.flux(peak.clamp(lo, hi))
            } else {
                model.flux(lo).min(model.flux(hi))
            }
        }
        None => {
            let VelocityForm::Table { rho, v, .. } = model.form() else {
                unreachable!("only tables lack a closed-form peak")
            };
            let values = table_candidates(rho, v, lo, hi)
                .into_iter()
                .map(|r| model.flux(r));
            if maximize {
                values.fold(f64::NEG_INFINITY, f64::max)
            } else {
                values.fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Godunov flux of `f` alone: min over `[a, b]` if `a ≤ b`, max over `[b, a]` otherwise.
pub fn godunov_flux(a: f64, b: f64, model: &VelocityModel) -> f64 {
    if a <= b {
        extremum(model, a, b, false)
    } else {
        extremum(model, b, a, true)
    }
}

/// Interface flux for `f(ρ) φ`, upwinded by the sign of `φ` at the interface.
pub fn godunov_interface_flux(
    rho_left: f64,
    rho_right: f64,
    phi_iface: f64,
    model: &VelocityModel,
) -> f64 {
    if phi_iface >= 0.0 {
        phi_iface * godunov_flux(rho_left, rho_right, model)
    } else {
        phi_iface * godunov_flux(rho_right, rho_left, model)
    }
}

/// Uniform grid of `m` cells on `[x_left, x_right]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvGrid {
    pub x_left: f64,
    pub x_right: f64,
    pub m: usize,
    pub dx: f64,
    pub cell_centers: Vec<f64>,
    /// `φ` at the `m + 1` interfaces.
    pub interface_phi: Vec<f64>,
}

impl FvGrid {
    pub fn new(x_left: f64, x_right: f64, m: usize, pot: &Potential) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least two cells, got {m}"
            )));
        }
        if !(x_right > x_left && x_left.is_finite() && x_right.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid window [{x_left}, {x_right}] is empty or unbounded"
            )));
        }
        let dx = (x_right - x_left) / m as f64;
        let cell_centers = (0..m).map(|j| x_left + (j as f64 + 0.5) * dx).collect();
        let interface_phi = (0..=m).map(|j| pot.value(x_left + j as f64 * dx)).collect();
        Ok(Self {
            x_left,
            x_right,
            m,
            dx,
            cell_centers,
            interface_phi,
        })
    }

    /// Window `hull ± (L T + 10 dx + 10 √(dx L T))`. The last term covers the
    /// numerical diffusion ahead of the fronts, so the boundary fluxes vanish.
    pub fn around(
        hull: (f64, f64),
        big_l: f64,
        t_final: f64,
        m: usize,
        pot: &Potential,
    ) -> Result<Self> {
        if (m as f64) <= 4.0 * PAD_CELLS {
            return Err(Error::InvalidInput(format!(
                "grid of {m} cells too coarse for the {PAD_CELLS} cell padding"
            )));
        }
        let reach = big_l * t_final;
        if !reach.is_finite() {
            return Err(Error::Configuration(
                "unbounded drift: the reachable support is not finite".into(),
            ));
        }
        let core = hull.1 - hull.0 + 2.0 * reach;
        let pad_for = |dx: f64| reach + PAD_CELLS * dx + DIFFUSIVE_PAD * (dx * reach).sqrt();
        // fixed point of width = core + 2 pad(width / m)
        let mut width = core / (1.0 - 2.0 * PAD_CELLS / m as f64);
        for _ in 0..50 {
            width = core + 2.0 * (pad_for(width / m as f64) - reach);
        }
        let pad = 0.5 * (width - (hull.1 - hull.0));
        Self::new(hull.0 - pad, hull.1 + pad, m, pot)
    }

    fn edge(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.dx
    }

    /// Exact cell averages of a piecewise constant density.
    pub fn project(&self, d: &PiecewiseConstantDensity) -> Vec<f64> {
        (0..self.m)
            .map(|j| d.mass_between(self.edge(j), self.edge(j + 1)) / self.dx)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: f64,
    pub dt: f64,
    /// Upper bound on `|∂_ρ(f φ)|` used for the CFL condition.
    pub wave_speed: f64,
    /// Largest `|flux|` through the first and last interior interfaces.
    pub edge_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvSolution {
    pub x_left: f64,
    pub dx: f64,
    pub m: usize,
    pub times: Vec<f64>,
    /// Cell averages at each output time.
    pub cells: Vec<Vec<f64>>,
    pub steps: Vec<StepRecord>,
}

impl FvSolution {
    pub fn density(&self, k: usize) -> PiecewiseConstantDensity {
        let bp = (0..=self.m)
            .map(|j| self.x_left + j as f64 * self.dx)
            .collect();
        PiecewiseConstantDensity::from_parts_unchecked(bp, self.cells[k].clone())
    }

    pub fn mass(&self, k: usize) -> f64 {
        self.cells[k].iter().sum::<f64>() * self.dx
    }

    pub fn cell_centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(|j| self.x_left + (j as f64 + 0.5) * self.dx)
    }
}

/// Forward Euler with Godunov fluxes, landing exactly on each output time.
pub fn fv_solve(
    initial: &PiecewiseConstantDensity,
    model: &VelocityModel,
    grid: &FvGrid,
    t_final: f64,
    output_times: &[f64],
) -> Result<FvSolution> {
    let mut sols = fv_solve_states(
        vec![grid.project(initial)],
        model,
        grid,
        t_final,
        output_times,
    )?;
    Ok(sols.remove(0))
}

/// [`fv_solve`] for several data on one grid, advanced with a common step
/// sequence. The runs are then images of one monotone map per step, which is
/// what the L1 contraction property compares.
pub fn fv_solve_coupled(
    initials: &[PiecewiseConstantDensity],
    model: &VelocityModel,
    grid: &FvGrid,
    t_final: f64,
    output_times: &[f64],
) -> Result<Vec<FvSolution>> {
    let states = initials.iter().map(|d| grid.project(d)).collect();
    fv_solve_states(states, model, grid, t_final, output_times)
}

fn advance(
    u: &mut [f64],
    flux: &mut [f64],
    model: &VelocityModel,
    grid: &FvGrid,
    dt: f64,
    t: f64,
) -> Result<f64> {
    let m = grid.m;
    for j in 1..m {
        flux[j] = godunov_interface_flux(u[j - 1], u[j], grid.interface_phi[j], model);
    }
    let ratio = dt / grid.dx;
    for j in 0..m {
        let next = u[j] - ratio * (flux[j + 1] - flux[j]);
        u[j] = if next >= 0.0 {
            next
        } else if next >= NEGATIVE_TOLERANCE {
            0.0
        } else {
            return Err(Error::SolverBug(format!(
                "cell {j} went negative ({next:e}) at t = {t}"
            )));
        };
    }
    Ok(flux[1].abs().max(flux[m - 1].abs()))
}

fn fv_solve_states(
    mut states: Vec<Vec<f64>>,
    model: &VelocityModel,
    grid: &FvGrid,
    t_final: f64,
    output_times: &[f64],
) -> Result<Vec<FvSolution>> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidInput(format!("final time {t_final} invalid")));
    }
    if let Some(t) = output_times
        .iter()
        .find(|t| !(**t >= 0.0 && **t <= t_final))
    {
        return Err(Error::InvalidInput(format!(
            "output time {t} outside [0, {t_final}]"
        )));
    }
    let mut targets = output_times.to_vec();
    targets.extend([0.0, t_final]);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let m = grid.m;
    let dx = grid.dx;
    let phi_max = grid
        .interface_phi
        .iter()
        .fold(0.0, |a: f64, p| a.max(p.abs()));
    let mass0: Vec<f64> = states.iter().map(|u| u.iter().sum::<f64>() * dx).collect();
    let mut flux = vec![0.0; m + 1];
    let mut sols: Vec<FvSolution> = states
        .iter()
        .map(|_| FvSolution {
            x_left: grid.x_left,
            dx,
            m,
            times: Vec::with_capacity(targets.len()),
            cells: Vec::with_capacity(targets.len()),
            steps: Vec::new(),
        })
        .collect();
    let mut t = 0.0;
    for &target in &targets {
        while t < target {
            let u_max = states.iter().flatten().copied().fold(0.0, f64::max);
            let wave = phi_max * (model.v_max() + u_max * model.lip_v());
            let dt_cfl = if wave > 0.0 {
                CFL * dx / wave
            } else {
                f64::INFINITY
            };
            let remaining = target - t;
            let lands = dt_cfl >= remaining;
            let dt = if lands { remaining } else { dt_cfl };
            for (u, sol) in states.iter_mut().zip(&mut sols) {
                let edge_flux = advance(u, &mut flux, model, grid, dt, t)?;
                sol.steps.push(StepRecord {
                    time: t,
                    dt,
                    wave_speed: wave,
                    edge_flux,
                });
            }
            t = if lands { target } else { t + dt };
        }
        for ((u, sol), &m0) in states.iter().zip(&mut sols).zip(&mass0) {
            let mass: f64 = u.iter().sum::<f64>() * dx;
            if (mass - m0).abs() > MASS_TOLERANCE * m0.max(1.0) {
                return Err(Error::SolverBug(format!(
                    "mass drifted from {m0} to {mass} by t = {t}"
                )));
            }
            sol.times.push(target);
            sol.cells.push(u.clone());
        }
    }
    Ok(sols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CaseLabel, PotentialForm};

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

    /// Brute-force Godunov flux from a fine sample of `[lo, hi]`.
    fn enumerated(model: &VelocityModel, a: f64, b: f64) -> f64 {
        let (lo, hi) = (a.min(b), a.max(b));
        let samples = (0..=100_000).map(|k| model.flux(lo + (hi - lo) * k as f64 / 1e5));
        if a <= b {
            samples.fold(f64::INFINITY, f64::min)
        } else {
            samples.fold(f64::NEG_INFINITY, f64::max)
        }
    }

    #[test]
    fn consistency() {
        let m = lwr();
        for c in [0.0, 0.2, 0.5, 0.9] {
            assert_eq!(godunov_interface_flux(c, c, 2.0, &m), 2.0 * m.flux(c));
            assert_eq!(godunov_interface_flux(c, c, -2.0, &m), -2.0 * m.flux(c));
        }
    }

    #[test]
    fn transonic_and_stationary_shock() {
        let m = lwr();
        assert_eq!(godunov_interface_flux(1.0, 0.0, 1.0, &m), 0.25);
        assert_eq!(godunov_interface_flux(0.0, 1.0, 1.0, &m), 0.0);
        assert_eq!(enumerated(&m, 1.0, 0.0), 0.25);
    }

    #[test]
    fn mirror_rule_for_negative_drift() {
        let m = lwr();
        // with φ < 0 the roles of the states swap
        assert_eq!(godunov_interface_flux(0.0, 1.0, -1.0, &m), -0.25);
        assert_eq!(godunov_interface_flux(1.0, 0.0, -1.0, &m), 0.0);
    }

    #[test]
    fn closed_forms_match_enumeration() {
        let forms = [
            VelocityForm::Linear {
                v_max: 2.0,
                rho_ref: 3.0,
            },
            VelocityForm::Reciprocal {
                v_max: 1.0,
                r_max: None,
            },
            VelocityForm::Reciprocal {
                v_max: 1.0,
                r_max: Some(2.0),
            },
            VelocityForm::CutoffLinear {
                v_max: 1.0,
                r_max: 2.0,
                rho_free: 0.5,
            },
            VelocityForm::CutoffLinear {
                v_max: 1.0,
                r_max: 2.0,
                rho_free: 1.5,
            },
            VelocityForm::Table {
                rho: vec![0.0, 1.0, 1.1, 3.0],
                v: vec![1.0, 1.0, 0.1, 0.0],
                lip_v: 9.0,
                r_max: Some(3.0),
            },
        ];
        let states = [0.0, 0.3, 0.7, 1.0, 1.05, 1.4, 2.5, 3.5];
        for form in forms {
            let m = VelocityModel::new(form.clone()).unwrap();
            for &a in &states {
                for &b in &states {
                    let exact = godunov_flux(a, b, &m);
                    let brute = enumerated(&m, a, b);
                    assert!(
                        (exact - brute).abs() < 1e-4,
                        "{form:?} {a} {b}: {exact} vs {brute}"
                    );
                    // the closed form is the true extremum, never beaten by a sample
                    if a <= b {
                        assert!(exact <= brute + 1e-15);
                    } else {
                        assert!(exact >= brute - 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn grid_around_pads_reachable_support() {
        let g = FvGrid::around((0.0, 1.0), 1.0, 0.5, 400, &unit_drift()).unwrap();
        let pad = 0.5 + 10.0 * g.dx + 10.0 * (0.5 * g.dx).sqrt();
        assert!((g.x_left + pad).abs() < 1e-12);
        assert!((g.x_right - 1.0 - pad).abs() < 1e-12);
        let still = FvGrid::around((0.0, 1.0), 0.0, 0.5, 400, &unit_drift()).unwrap();
        assert!((still.x_left + 10.0 * still.dx).abs() < 1e-12);
        assert!(FvGrid::around((0.0, 1.0), 1.0, 0.5, 40, &unit_drift()).is_err());
    }

    #[test]
    fn constant_state_unchanged_in_interior() {
        let pot = unit_drift();
        let grid = FvGrid::new(-5.0, 5.0, 200, &pot).unwrap();
        let d = PiecewiseConstantDensity::block(-4.0, 4.0, 0.5).unwrap();
        let sol = fv_solve(&d, &lwr(), &grid, 0.5, &[]).unwrap();
        let last = sol.cells.last().unwrap();
        for (j, x) in sol.cell_centers().enumerate() {
            if (-3.0..=3.0).contains(&x) {
                assert!((last[j] - 0.5).abs() < 1e-14, "cell {j}");
            }
        }
    }

    #[test]
    fn conserves_mass_and_stays_non_negative() {
        let pot = unit_drift();
        let d = PiecewiseConstantDensity::block(0.0, 1.0, 1.0).unwrap();
        let grid = FvGrid::around((0.0, 1.0), 1.0, 1.0, 400, &pot).unwrap();
        let sol = fv_solve(&d, &lwr(), &grid, 1.0, &[0.25, 0.5]).unwrap();
        assert_eq!(sol.times, vec![0.0, 0.25, 0.5, 1.0]);
        for k in 0..sol.times.len() {
            assert!((sol.mass(k) - 1.0).abs() < 1e-12);
            assert!(sol.cells[k]
                .iter()
                .all(|&u| (0.0..=1.0 + 1e-12).contains(&u)));
        }
        let worst = sol.steps.iter().fold(0.0, |m: f64, s| m.max(s.edge_flux));
        assert!(worst < 1e-12, "{worst}");
    }
}
