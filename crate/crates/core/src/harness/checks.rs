//! Property checks. Each is a pure function of trajectories or solver output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{l1_distance, pseudo_inverse, quantile_distance, reconstruct};
use crate::model::{PiecewiseConstantDensity, Potential, ProblemConstants, VelocityModel};
use crate::reference::{
    entropy_residual, fv_solve_coupled, BumpTestFunction, DensityField, FvGrid,
};
use crate::scheme::{diameter_upper_bound, spacing_lower_bound, Trajectory};
use crate::Result;

/// Worst `(min spacing − bound)/bound` over the snapshots; `None` when no
/// spacing bound applies (attractive case without a cutoff).
pub fn check_maximum_principle(traj: &Trajectory, constants: &ProblemConstants) -> Option<f64> {
    traj.snapshots
        .iter()
        .map(|s| {
            spacing_lower_bound(s.time(), constants, s.ell_n(), s.case_label())
                .ok()
                .map(|b| (s.min_spacing() - b) / b)
        })
        .try_fold(f64::INFINITY, |acc, m| m.map(|m| acc.min(m)))
}

/// Worst `(R_max − max Rᵢ)/R_max` over the snapshots.
pub fn check_density_cap(traj: &Trajectory, r_max: f64) -> f64 {
    traj.diagnostics
        .iter()
        .map(|d| (r_max - d.max_density) / r_max)
        .fold(f64::INFINITY, f64::min)
}

/// Largest `W₁(ρⁿ(t), ρⁿ(s)) / |t − s|` over all snapshot pairs.
pub fn check_w1_lipschitz(traj: &Trajectory) -> Result<f64> {
    let quantiles = traj
        .snapshots
        .iter()
        .map(|s| pseudo_inverse(&reconstruct(s)))
        .collect::<Result<Vec<_>>>()?;
    let times = &traj.times;
    Ok((0..quantiles.len())
        .into_par_iter()
        .map(|a| {
            (a + 1..quantiles.len())
                .map(|b| quantile_distance(&quantiles[a], &quantiles[b]) / (times[b] - times[a]))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// `max / min` of the per-`n` maxima of TV over time.
pub fn check_tv_uniform(max_tv: &[f64]) -> f64 {
    let hi = max_tv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = max_tv.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    /// Largest excursion of a particle to the wrong side of the origin.
    pub worst_violation: f64,
    /// Largest `|x_{k_n}(t)|` when `x̄_{k_n} = 0`.
    pub pinned_drift: Option<f64>,
}

/// Particles starting left of the origin stay `≤ 0`, those starting right stay
/// `≥ 0`, and a particle starting at the origin stays there.
pub fn check_sign_preservation(traj: &Trajectory) -> SignCheck {
    let initial = traj.snapshots[0].positions();
    let mut worst: f64 = 0.0;
    let mut pinned: Option<f64> = None;
    for s in &traj.snapshots {
        for (&x0, &x) in initial.iter().zip(s.positions()) {
            if x0 < 0.0 {
                worst = worst.max(x);
            } else if x0 > 0.0 {
                worst = worst.max(-x);
            } else {
                pinned = Some(pinned.unwrap_or(0.0).max(x.abs()));
            }
        }
    }
    SignCheck {
        worst_violation: worst,
        pinned_drift: pinned,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportCheck {
    /// Smallest `bound − (x_n − x_0)` over the snapshots.
    pub diameter_margin: f64,
    /// Largest particle speed seen at a snapshot.
    pub max_speed: f64,
}

pub fn check_support(traj: &Trajectory, constants: &ProblemConstants) -> SupportCheck {
    let first = &traj.snapshots[0];
    let w0 = first.diameter();
    let diameter_margin = traj
        .snapshots
        .iter()
        .map(|s| diameter_upper_bound(s.time(), constants, w0, s.case_label()) - s.diameter())
        .fold(f64::INFINITY, f64::min);
    let max_speed = traj
        .diagnostics
        .iter()
        .map(|d| d.max_speed)
        .fold(0.0, f64::max);
    SupportCheck {
        diameter_margin,
        max_speed,
    }
}

/// `max_t ‖u₁(t) − u₂(t)‖₁ / ‖u₁(0) − u₂(0)‖₁` for two Godunov runs on one grid
/// with a shared step sequence. The denominator is the distance of the
/// projected data; identical data give 0.
pub fn check_contraction(
    first: &PiecewiseConstantDensity,
    second: &PiecewiseConstantDensity,
    model: &VelocityModel,
    grid: &FvGrid,
    t_final: f64,
    output_times: &[f64],
) -> Result<f64> {
    let sols = fv_solve_coupled(
        &[first.clone(), second.clone()],
        model,
        grid,
        t_final,
        output_times,
    )?;
    let (a, b) = (&sols[0], &sols[1]);
    let initial = l1_distance(&a.density(0), &b.density(0));
    if initial == 0.0 {
        return Ok(0.0);
    }
    Ok((0..a.times.len())
        .map(|k| l1_distance(&a.density(k), &b.density(k)) / initial)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub n: usize,
    pub k: f64,
    /// Index into the test-function bank.
    pub test: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCheck {
    pub rows: Vec<EntropyRow>,
    /// `(n, max(0, −min residual))`
    pub negative_part: Vec<(usize, f64)>,
    /// `max n · negative part`
    pub fitted_c: f64,
    pub pass: bool,
}

/// Entropy residual table over `(n, k, test)`.
///
/// Passes when the negative part decays at least like `1/n` between the
/// largest `n` and the largest `n` at most a quarter of it.
pub fn check_entropy(
    fields: &[(usize, DensityField)],
    k_grid: &[f64],
    bank: &[BumpTestFunction],
    model: &VelocityModel,
    pot: &Potential,
) -> Result<EntropyCheck> {
    let jobs: Vec<(usize, usize, usize)> = (0..fields.len())
        .flat_map(|f| (0..k_grid.len()).flat_map(move |k| (0..bank.len()).map(move |t| (f, k, t))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(f, k, t)| {
            let (n, field) = &fields[f];
            entropy_residual(field, k_grid[k], &bank[t], model, pot).map(|residual| EntropyRow {
                n: *n,
                k: k_grid[k],
                test: t,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let negative_part: Vec<(usize, f64)> = fields
        .iter()
        .map(|(n, _)| {
            let worst = rows
                .iter()
                .filter(|r| r.n == *n)
                .map(|r| r.residual)
                .fold(f64::INFINITY, f64::min);
            (*n, (-worst).max(0.0))
        })
        .collect();
    let fitted_c = negative_part
        .iter()
        .map(|&(n, neg)| n as f64 * neg)
        .fold(0.0, f64::max);
    let pass = match negative_part.last() {
        None => true,
        Some(&(n_hi, neg_hi)) => {
            let lo = negative_part
                .iter()
                .rev()
                .find(|(n, _)| 4 * n <= n_hi)
                .or(negative_part.first())
                .copied();
            match lo {
                Some((n_lo, neg_lo)) if n_lo < n_hi => neg_hi <= neg_lo * n_lo as f64 / n_hi as f64,
                _ => neg_hi == 0.0,
            }
        }
    };
    Ok(EntropyCheck {
        rows,
        negative_part,
        fitted_c,
        pass,
    })
}

/// Strictly decreasing sequence.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Decreasing, except for at most one adjacent non-decrease within `slack`
/// relative.
pub fn decreasing_with_slack(values: &[f64], slack: f64) -> bool {
    let mut allowance = 1;
    for w in values.windows(2) {
        if w[1] < w[0] {
            continue;
        }
        if allowance > 0 && w[1] <= w[0] * (1.0 + slack) {
            allowance -= 1;
        } else {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CaseLabel, PotentialForm, VelocityForm};
    use crate::scheme::{simulate, ParticleSystem, SimulationOptions};

    fn constants(l: f64) -> ProblemConstants {
        ProblemConstants {
            big_l: l,
            big_l_prime: 0.0,
            r_bar: 1.0,
            r_max: None,
        }
    }

    fn uniform(n: usize) -> ParticleSystem {
        let x = (0..=n).map(|i| i as f64 / n as f64).collect();
        ParticleSystem::new(x, 1.0 / n as f64, CaseLabel::P1).unwrap()
    }

    #[test]
    fn rigid_translation_has_ratio_l() {
        let model = VelocityModel::new(VelocityForm::Constant { v_max: 1.0 }).unwrap();
        let pot = Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap();
        let opts = SimulationOptions::new(0.5).with_uniform_outputs(6);
        let traj = simulate(&uniform(10), &model, &pot, &constants(1.0), &opts).unwrap();
        let ratio = check_w1_lipschitz(&traj).unwrap();
        assert!((ratio - 1.0).abs() < 1e-9, "{ratio}");
        assert!(check_maximum_principle(&traj, &constants(1.0)).unwrap() >= -1e-12);
        let support = check_support(&traj, &constants(1.0));
        assert!(support.diameter_margin >= 0.0);
        assert_eq!(support.max_speed, 1.0);
    }

    #[test]
    fn frozen_dynamics() {
        let model = VelocityModel::new(VelocityForm::Linear {
            v_max: 1.0,
            rho_ref: 1.0,
        })
        .unwrap();
        let pot = Potential::new(PotentialForm::Constant { value: 0.0 }, CaseLabel::P1).unwrap();
        let opts = SimulationOptions::new(1.0).with_uniform_outputs(5);
        let traj = simulate(&uniform(8), &model, &pot, &constants(0.0), &opts).unwrap();
        assert_eq!(check_w1_lipschitz(&traj).unwrap(), 0.0);
        assert!(traj.diagnostics.iter().all(|d| d.tv == 2.0));
    }

    #[test]
    fn decay_flags() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
        assert!(decreasing_with_slack(&[3.0, 3.05, 1.0], 0.02));
        assert!(!decreasing_with_slack(&[3.0, 3.1, 1.0], 0.02));
        assert!(!decreasing_with_slack(&[3.0, 3.01, 3.02], 0.02));
    }

    #[test]
    fn tv_spread() {
        assert_eq!(check_tv_uniform(&[2.0, 2.0, 2.0]), 1.0);
        assert_eq!(check_tv_uniform(&[2.0, 2.5, 2.2]), 1.25);
    }

    #[test]
    fn identical_data_contract_to_zero() {
        let model = VelocityModel::new(VelocityForm::Linear {
            v_max: 1.0,
            rho_ref: 1.0,
        })
        .unwrap();
        let pot = Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap();
        let d = PiecewiseConstantDensity::block(0.0, 1.0, 1.0).unwrap();
        let grid = FvGrid::around((0.0, 1.0), 1.0, 0.2, 200, &pot).unwrap();
        assert_eq!(
            check_contraction(&d, &d, &model, &grid, 0.2, &[0.1]).unwrap(),
            0.0
        );
    }
}
