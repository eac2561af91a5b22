//! Particle-versus-oracle convergence studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    check_contraction, check_density_cap, check_entropy, check_maximum_principle,
    check_sign_preservation, check_support, check_tv_uniform, check_w1_lipschitz,
    decreasing_with_slack, strictly_decreasing, EntropyCheck,
};
use super::config::{uniform_times, EntropyConfig, ExperimentConfig, ReferenceKind};
use crate::atomizer::{atomize, mean_value_ratios};
use crate::metrics::{l1_distance, reconstruct, total_variation, tv_of_values};
use crate::model::{CaseLabel, PiecewiseConstantDensity, PotentialForm, Problem, VelocityForm};
use crate::reference::{
    fv_solve, BumpTestFunction, DensityField, FvGrid, FvSolution, LwrBlock, LwrRiemann,
};
use crate::scheme::{simulate, ParticleSystem, SimulationOptions, Trajectory};
use crate::{Error, Result};

/// Space-time errors below this count as exact reproduction.
const EXACT_ERROR: f64 = 1e-10;

/// Per-`n` results of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NRow {
    pub n: usize,
    /// `Σ_t ‖ρⁿ(t) − ρ(t)‖₁ Δt` over the output times.
    pub l1_error: f64,
    pub tv_initial: f64,
    pub max_tv: f64,
    /// Worst relative spacing margin; `None` without a spacing bound.
    pub spacing_margin: Option<f64>,
    /// Worst `(R_max − max Rᵢ)/R_max` in the attractive case.
    pub density_cap_margin: Option<f64>,
    /// `max W₁(ρⁿ(t), ρⁿ(s)) / |t − s|`
    pub w1_ratio: f64,
    pub diameter_margin: f64,
    pub max_speed: f64,
    /// Sign-preservation results in the repulsive and attractive cases.
    pub sign_violation: Option<f64>,
    pub pinned_drift: Option<f64>,
    /// Largest `|mass − 1|` of the reconstructed densities.
    pub mass_defect: f64,
    pub entropy_min: Option<f64>,
    pub steps: usize,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFlags {
    pub error_strictly_decreasing: bool,
    /// Decreasing up to one small non-decrease.
    pub error_decreasing: bool,
    pub tv_spread: f64,
    pub tv_uniform: bool,
    pub tv_initial: bool,
    pub maximum_principle: bool,
    pub density_cap: bool,
    pub w1_lipschitz: bool,
    pub sign_preservation: bool,
    pub support: bool,
    pub entropy: Option<bool>,
    pub contraction_ratio: Option<f64>,
    pub contraction: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub name: String,
    pub case: CaseLabel,
    pub t_final: f64,
    pub reference: ReferenceKind,
    pub grid_m: usize,
    pub output_times: Vec<f64>,
    /// `L`, the particle speed bound.
    pub big_l: f64,
    pub initial_tv: f64,
    pub rows: Vec<NRow>,
    /// Largest mass drift of the Godunov oracle, if one was run.
    pub reference_mass_drift: Option<f64>,
    pub test_bank: Vec<BumpTestFunction>,
    pub k_grid: Vec<f64>,
    pub entropy: Option<EntropyCheck>,
    pub flags: ReportFlags,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.l1_error).collect()
    }

    pub fn row(&self, n: usize) -> Option<&NRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

enum Oracle {
    Exact(LwrBlock),
    /// `ρ̄(x − ct)` for a constant velocity law and drift.
    Translation(PiecewiseConstantDensity, f64),
    Godunov(FvSolution),
}

impl Oracle {
    fn l1(&self, d: &PiecewiseConstantDensity, k: usize, t: f64) -> Result<f64> {
        match self {
            Oracle::Exact(block) => block.l1_to(d, t),
            Oracle::Translation(initial, speed) => {
                let shifted = initial
                    .breakpoints()
                    .iter()
                    .map(|x| x + speed * t)
                    .collect();
                let moved = PiecewiseConstantDensity::new(shifted, initial.values().to_vec())?;
                Ok(l1_distance(d, &moved))
            }
            Oracle::Godunov(sol) => Ok(l1_distance(d, &sol.density(k))),
        }
    }
}

fn exact_oracle(problem: &Problem, t_final: f64) -> Result<Oracle> {
    let unsupported =
        |why: &str| Error::Configuration(format!("exact reference unavailable: {why}"));
    let PotentialForm::Constant { value } = problem.potential.form() else {
        return Err(unsupported("drift is not constant"));
    };
    let (v_max, rho_ref) = match problem.velocity.form() {
        VelocityForm::Constant { v_max } => {
            return Ok(Oracle::Translation(problem.initial.clone(), v_max * value));
        }
        VelocityForm::Linear { v_max, rho_ref } => (*v_max, *rho_ref),
        _ => return Err(unsupported("velocity law is neither linear nor constant")),
    };
    if !(*value > 0.0) {
        return Err(unsupported("drift must be positive"));
    }
    let d = &problem.initial;
    let positive: Vec<usize> = (0..d.len()).filter(|&j| d.values()[j] > 0.0).collect();
    let [j] = positive[..] else {
        return Err(unsupported("initial datum is not a single block"));
    };
    let bp = d.breakpoints();
    let block = LwrBlock::new(
        LwrRiemann::new(v_max * value, rho_ref)?,
        bp[j],
        bp[j + 1],
        d.values()[j],
    )?;
    if t_final > block.valid_until() {
        return Err(unsupported(&format!(
            "block solution only valid up to t = {}",
            block.valid_until()
        )));
    }
    Ok(Oracle::Exact(block))
}

fn support_hull(d: &PiecewiseConstantDensity) -> Result<(f64, f64)> {
    d.support_hull()
        .ok_or_else(|| Error::InvalidInput("initial density is identically zero".into()))
}

fn test_bank(e: &EntropyConfig, hull: (f64, f64), t_final: f64) -> Result<Vec<BumpTestFunction>> {
    let (a, b) = hull;
    let w = b - a;
    let xs = e
        .x_centers
        .clone()
        .unwrap_or_else(|| vec![a, 0.5 * (a + b), b]);
    let ts = e
        .t_centers
        .clone()
        .unwrap_or_else(|| vec![t_final / 3.0, 2.0 * t_final / 3.0]);
    let widths = e
        .widths
        .clone()
        .unwrap_or_else(|| vec![(0.1 * w, t_final / 12.0), (0.2 * w, t_final / 8.0)]);
    let mut bank = Vec::with_capacity(xs.len() * ts.len() * widths.len());
    for &x in &xs {
        for &t in &ts {
            for &(wx, wt) in &widths {
                bank.push(BumpTestFunction::new(x, t, wx, wt)?);
            }
        }
    }
    Ok(bank)
}

fn k_grid(e: &EntropyConfig, r_bar: f64) -> Vec<f64> {
    e.k_levels.clone().unwrap_or_else(|| {
        [0.0, 0.25, 0.5, 0.75, 1.0, 1.25]
            .iter()
            .map(|f| f * r_bar)
            .collect()
    })
}

struct Run {
    row: NRow,
    field: Option<DensityField>,
}

fn run_one(
    problem: &Problem,
    n: usize,
    sim_times: &[f64],
    refine: usize,
    oracle: &Oracle,
    window: Option<(f64, f64)>,
) -> Result<Run> {
    let t_final = sim_times[sim_times.len() - 1];
    let atom = atomize(&problem.initial, n)?;
    let sys = ParticleSystem::from_atomization(&atom, problem.case_label())?;
    let opts = SimulationOptions::new(t_final).with_output_times(sim_times.to_vec());
    let traj = simulate(
        &sys,
        &problem.velocity,
        &problem.potential,
        &problem.constants,
        &opts,
    )?;
    let densities: Vec<PiecewiseConstantDensity> = traj.snapshots.iter().map(reconstruct).collect();

    let mut l1_error = 0.0;
    for (k, j) in (refine..sim_times.len()).step_by(refine).enumerate() {
        let dt = sim_times[j] - sim_times[j - refine];
        l1_error += oracle.l1(&densities[j], k + 1, sim_times[j])? * dt;
    }
    let row = summarize(problem, n, &traj, &densities, l1_error)?;
    let field = match window {
        Some(w) => Some(DensityField::new(traj.times.clone(), densities, w)?),
        None => None,
    };
    Ok(Run { row, field })
}

fn summarize(
    problem: &Problem,
    n: usize,
    traj: &Trajectory,
    densities: &[PiecewiseConstantDensity],
    l1_error: f64,
) -> Result<NRow> {
    let constants = &problem.constants;
    let sign = matches!(problem.case_label(), CaseLabel::P3 | CaseLabel::P4)
        .then(|| check_sign_preservation(traj));
    let support = check_support(traj, constants);
    Ok(NRow {
        n,
        l1_error,
        tv_initial: tv_of_values(&mean_value_ratios(
            &problem.initial,
            traj.snapshots[0].positions(),
        )),
        max_tv: traj.diagnostics.iter().map(|d| d.tv).fold(0.0, f64::max),
        spacing_margin: check_maximum_principle(traj, constants),
        density_cap_margin: match (problem.case_label(), constants.r_max) {
            (CaseLabel::P4, Some(r)) => Some(check_density_cap(traj, r)),
            _ => None,
        },
        w1_ratio: check_w1_lipschitz(traj)?,
        diameter_margin: support.diameter_margin,
        max_speed: support.max_speed,
        sign_violation: sign.map(|s| s.worst_violation),
        pinned_drift: sign.and_then(|s| s.pinned_drift),
        mass_defect: densities
            .iter()
            .map(|d| (d.mass() - 1.0).abs())
            .fold(0.0, f64::max),
        entropy_min: None,
        steps: traj.steps,
        halvings: traj.halvings,
    })
}

/// Runs every `n` of the study against the configured oracle and evaluates
/// all property checks.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let t_final = cfg.t_final;
    let hull = support_hull(&problem.initial)?;
    let refine = cfg.entropy.as_ref().map_or(1, |e| e.time_refinement);
    let sim_times = uniform_times(t_final, cfg.output_count * refine);
    let output_times = cfg.output_times();
    let big_l = problem.constants.big_l;

    let (oracle, reference_mass_drift, grid_window) = match cfg.reference {
        ReferenceKind::Exact => (exact_oracle(&problem, t_final)?, None, None),
        ReferenceKind::Godunov => {
            let grid = FvGrid::around(hull, big_l, t_final, cfg.grid_m, &problem.potential)?;
            let sol = fv_solve(
                &problem.initial,
                &problem.velocity,
                &grid,
                t_final,
                &output_times,
            )?;
            let m0 = sol.mass(0);
            let drift = (0..sol.times.len())
                .map(|k| (sol.mass(k) - m0).abs())
                .fold(0.0, f64::max);
            (
                Oracle::Godunov(sol),
                Some(drift),
                Some((grid.x_left, grid.x_right)),
            )
        }
    };

    let window = cfg.entropy.as_ref().map(|_| {
        grid_window.unwrap_or_else(|| {
            let pad = big_l * t_final + (hull.1 - hull.0);
            (hull.0 - pad, hull.1 + pad)
        })
    });
    let mut runs = cfg
        .n_values
        .par_iter()
        .map(|&n| {
            run_one(&problem, n, &sim_times, refine, &oracle, window).map_err(|e| Error::Run {
                n,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<Run>>>()?;

    let (test_bank, k_levels, entropy) = match &cfg.entropy {
        Some(e) => {
            let bank = test_bank(e, hull, t_final)?;
            let ks = k_grid(e, problem.constants.r_bar);
            let fields: Vec<(usize, DensityField)> = runs
                .iter_mut()
                .filter_map(|r| r.field.take().map(|f| (r.row.n, f)))
                .collect();
            let check = check_entropy(&fields, &ks, &bank, &problem.velocity, &problem.potential)?;
            for run in &mut runs {
                run.row.entropy_min = check
                    .rows
                    .iter()
                    .filter(|r| r.n == run.row.n)
                    .map(|r| r.residual)
                    .reduce(f64::min);
            }
            (bank, ks, Some(check))
        }
        None => (Vec::new(), Vec::new(), None),
    };

    let contraction_ratio = match &cfg.contraction {
        Some(c) => {
            let partner = PiecewiseConstantDensity::new(
                c.partner.breakpoints.clone(),
                c.partner.values.clone(),
            )?;
            let other = support_hull(&partner)?;
            let union = (hull.0.min(other.0), hull.1.max(other.1));
            let grid = FvGrid::around(union, big_l, t_final, cfg.grid_m, &problem.potential)?;
            Some(check_contraction(
                &problem.initial,
                &partner,
                &problem.velocity,
                &grid,
                t_final,
                &output_times,
            )?)
        }
        None => None,
    };

    let rows: Vec<NRow> = runs.into_iter().map(|r| r.row).collect();
    let initial_tv = total_variation(&problem.initial);
    let flags = evaluate_flags(
        cfg,
        &problem,
        &rows,
        initial_tv,
        entropy.as_ref(),
        contraction_ratio,
    );
    Ok(ConvergenceReport {
        name: cfg.name.clone(),
        case: problem.case_label(),
        t_final,
        reference: cfg.reference,
        grid_m: cfg.grid_m,
        output_times,
        big_l,
        initial_tv,
        rows,
        reference_mass_drift,
        test_bank,
        k_grid: k_levels,
        entropy,
        flags,
    })
}

fn evaluate_flags(
    cfg: &ExperimentConfig,
    problem: &Problem,
    rows: &[NRow],
    initial_tv: f64,
    entropy: Option<&EntropyCheck>,
    contraction_ratio: Option<f64>,
) -> ReportFlags {
    let tol = &cfg.tolerances;
    let big_l = problem.constants.big_l;
    let errors: Vec<f64> = rows.iter().map(|r| r.l1_error).collect();
    let max_tv: Vec<f64> = rows.iter().map(|r| r.max_tv).collect();
    let tv_spread = check_tv_uniform(&max_tv);
    let w0 = problem.initial.support_hull().map_or(0.0, |(a, b)| b - a);

    // an exact scheme leaves only round-off in the error column
    let exact = errors.iter().all(|&e| e <= EXACT_ERROR);
    let error_strictly_decreasing = exact || strictly_decreasing(&errors);
    let error_decreasing = exact || decreasing_with_slack(&errors, tol.decay_slack);
    let tv_uniform = tv_spread <= tol.tv_spread;
    let tv_initial = rows.iter().all(|r| r.tv_initial <= initial_tv + 1e-12);
    let maximum_principle = rows
        .iter()
        .all(|r| r.spacing_margin.is_none_or(|m| m >= -tol.bound_rel));
    let density_cap = rows
        .iter()
        .all(|r| r.density_cap_margin.is_none_or(|m| m >= -tol.bound_rel));
    let w1_lipschitz = !big_l.is_finite()
        || rows
            .iter()
            .all(|r| r.w1_ratio <= 2.0 * big_l * (1.0 + tol.w1_rel));
    let sign_preservation = rows.iter().all(|r| {
        r.sign_violation.is_none_or(|v| v <= 1e-9) && r.pinned_drift.is_none_or(|p| p <= 1e-12)
    });
    let support = rows.iter().all(|r| {
        r.diameter_margin >= -1e-9 * (1.0 + w0 + 2.0 * big_l * cfg.t_final)
            && r.max_speed <= big_l * (1.0 + 1e-9)
    });
    let entropy_pass = entropy.map(|e| e.pass);
    let contraction = contraction_ratio.map(|r| r <= 1.0 + tol.contraction_rel);
    let pass = error_decreasing
        && tv_uniform
        && tv_initial
        && maximum_principle
        && density_cap
        && w1_lipschitz
        && sign_preservation
        && support
        && entropy_pass.unwrap_or(true)
        && contraction.unwrap_or(true);
    ReportFlags {
        error_strictly_decreasing,
        error_decreasing,
        tv_spread,
        tv_uniform,
        tv_initial,
        maximum_principle,
        density_cap,
        w1_lipschitz,
        sign_preservation,
        support,
        entropy: entropy_pass,
        contraction_ratio,
        contraction,
        pass,
    }
}
