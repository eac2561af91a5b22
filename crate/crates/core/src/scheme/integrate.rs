//! Classical RK4 time stepping with an ordering guard.

use serde::{Deserialize, Serialize};

use super::{check_order, density_ratios, spacing_lower_bound, velocities_into, ParticleSystem};
use crate::metrics::tv_of_values;
use crate::model::{Potential, ProblemConstants, VelocityModel};
use crate::{Error, Result};

/// Relative slack before a spacing below the analytic bound is reported.
const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub t_final: f64,
    /// Snapshot times besides `0` and `t_final`.
    pub output_times: Vec<f64>,
    pub dt_max: f64,
    /// Fraction of the spacing a particle pair may close per step.
    pub safety: f64,
    /// Halving floor relative to `t_final`.
    pub dt_floor_rel: f64,
    /// Re-check the spacing bound at every snapshot.
    pub validate_bounds: bool,
}

impl SimulationOptions {
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            output_times: Vec::new(),
            dt_max: f64::INFINITY,
            safety: 0.5,
            dt_floor_rel: 1e-12,
            validate_bounds: true,
        }
    }

    /// `count` equispaced snapshots on `[0, t_final]`, endpoints included.
    pub fn with_uniform_outputs(mut self, count: usize) -> Self {
        let count = count.max(2);
        self.output_times = (0..count)
            .map(|j| self.t_final * j as f64 / (count - 1) as f64)
            .collect();
        self
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub time: f64,
    pub min_spacing: f64,
    /// Analytic spacing lower bound, when one is available.
    pub bound: Option<f64>,
    pub max_density: f64,
    pub tv: f64,
    /// `n ℓ_n`, which is exactly the particle mass.
    pub mass: f64,
    pub leftmost: f64,
    pub rightmost: f64,
    pub max_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<ParticleSystem>,
    pub diagnostics: Vec<SnapshotDiagnostics>,
    /// Accepted RK4 steps.
    pub steps: usize,
    /// Steps whose size was halved by the ordering guard.
    pub halvings: usize,
}

impl Trajectory {
    pub fn last(&self) -> &ParticleSystem {
        self.snapshots
            .last()
            .expect("trajectory always holds the initial state")
    }
}

fn axpy(x: &[f64], a: f64, k: &[f64], out: &mut [f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

/// One RK4 step of size `dt`, without any step-size guard.
pub fn step(
    sys: &ParticleSystem,
    model: &VelocityModel,
    pot: &Potential,
    dt: f64,
) -> Result<ParticleSystem> {
    let (next, _) = step_guarded(sys, model, pot, dt, dt)?;
    Ok(next)
}

/// RK4 step that halves `dt` whenever a stage or the result loses ordering.
/// Returns the new state and the step size actually taken.
pub fn step_guarded(
    sys: &ParticleSystem,
    model: &VelocityModel,
    pot: &Potential,
    dt: f64,
    dt_floor: f64,
) -> Result<(ParticleSystem, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let x = sys.positions();
    let (ell, scheme) = (sys.ell_n(), sys.scheme());
    let len = x.len();
    let mut k1 = vec![0.0; len];
    velocities_into(x, ell, scheme, model, pot, &mut k1);
    let (mut k2, mut k3, mut k4) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let mut stage = vec![0.0; len];

    let mut h = dt;
    loop {
        let attempt = (|| -> Result<Vec<f64>> {
            axpy(x, 0.5 * h, &k1, &mut stage);
            check_order(&stage)?;
            velocities_into(&stage, ell, scheme, model, pot, &mut k2);
            axpy(x, 0.5 * h, &k2, &mut stage);
            check_order(&stage)?;
            velocities_into(&stage, ell, scheme, model, pot, &mut k3);
            axpy(x, h, &k3, &mut stage);
            check_order(&stage)?;
            velocities_into(&stage, ell, scheme, model, pot, &mut k4);
            let next: Vec<f64> = (0..len)
                .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect();
            check_order(&next)?;
            Ok(next)
        })();
        match attempt {
            Ok(next) => return Ok((sys.advanced(next, sys.time() + h), h)),
            Err(Error::Collision { left, right, .. }) => {
                let halved = 0.5 * h;
                if halved < dt_floor {
                    return Err(Error::Stiffness {
                        time: sys.time(),
                        dt: halved,
                        floor: dt_floor,
                        left,
                        right,
                    });
                }
                h = halved;
            }
            Err(e) => return Err(e),
        }
    }
}

fn diagnose(
    sys: &ParticleSystem,
    model: &VelocityModel,
    pot: &Potential,
    constants: &ProblemConstants,
) -> Result<SnapshotDiagnostics> {
    let x = sys.positions();
    let r = density_ratios(x, sys.ell_n())?;
    let mut v = vec![0.0; x.len()];
    velocities_into(x, sys.ell_n(), sys.scheme(), model, pot, &mut v);
    Ok(SnapshotDiagnostics {
        time: sys.time(),
        min_spacing: sys.min_spacing(),
        bound: spacing_lower_bound(sys.time(), constants, sys.ell_n(), sys.case_label()).ok(),
        max_density: r.iter().copied().fold(0.0, f64::max),
        tv: tv_of_values(&r),
        mass: sys.n() as f64 * sys.ell_n(),
        leftmost: x[0],
        rightmost: x[x.len() - 1],
        max_speed: v.iter().fold(0.0, |m: f64, s| m.max(s.abs())),
    })
}

/// Largest step keeping every pair from closing more than `safety` of its gap.
fn step_cap(sys: &ParticleSystem, model: &VelocityModel, pot: &Potential, safety: f64) -> f64 {
    let x = sys.positions();
    let spacing = sys.min_spacing();
    let pad = sys.diameter().max(1.0);
    let l_step = model.v_max() * pot.sup_abs_on(x[0] - pad, x[x.len() - 1] + pad);
    if l_step > 0.0 && l_step.is_finite() {
        safety * spacing / (2.0 * l_step)
    } else if l_step == 0.0 {
        f64::INFINITY
    } else {
        // unbounded drift: rely on the ordering guard alone
        safety * spacing
    }
}

/// Integrates `initial` to `opts.t_final`, landing exactly on each snapshot time.
pub fn simulate(
    initial: &ParticleSystem,
    model: &VelocityModel,
    pot: &Potential,
    constants: &ProblemConstants,
    opts: &SimulationOptions,
) -> Result<Trajectory> {
    let t0 = initial.time();
    if !(opts.t_final >= t0 && opts.t_final.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "final time {} must be finite and >= {t0}",
            opts.t_final
        )));
    }
    if !(opts.safety > 0.0 && opts.safety <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "safety factor {} not in (0, 1]",
            opts.safety
        )));
    }
    if initial.case_label() != pot.case_label() {
        return Err(Error::Configuration(format!(
            "particle system built for {} but potential is labelled {}",
            initial.case_label(),
            pot.case_label()
        )));
    }
    if let Some(t) = opts
        .output_times
        .iter()
        .find(|t| !(**t >= t0 && **t <= opts.t_final))
    {
        return Err(Error::InvalidInput(format!(
            "output time {t} outside [{t0}, {}]",
            opts.t_final
        )));
    }
    let mut targets: Vec<f64> = opts.output_times.clone();
    targets.push(t0);
    targets.push(opts.t_final);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let floor = opts.dt_floor_rel * opts.t_final.max(f64::MIN_POSITIVE);
    let mut traj = Trajectory {
        times: Vec::with_capacity(targets.len()),
        snapshots: Vec::with_capacity(targets.len()),
        diagnostics: Vec::with_capacity(targets.len()),
        steps: 0,
        halvings: 0,
    };
    let mut current = initial.clone();
    for &target in &targets {
        while current.time() < target {
            let remaining = target - current.time();
            let cap = step_cap(&current, model, pot, opts.safety).min(opts.dt_max);
            let lands = cap >= remaining;
            let dt = if lands { remaining } else { cap };
            let (mut next, taken) = step_guarded(&current, model, pot, dt, floor)?;
            if taken < dt {
                traj.halvings += 1;
            } else if lands {
                next = next.advanced(next.positions().to_vec(), target);
            }
            traj.steps += 1;
            current = next;
        }
        let diag = diagnose(&current, model, pot, constants)?;
        if opts.validate_bounds {
            if let Some(bound) = diag.bound {
                if diag.min_spacing < bound * (1.0 - BOUND_SLACK) {
                    return Err(Error::MaximumPrinciple {
                        time: target,
                        spacing: diag.min_spacing,
                        bound,
                    });
                }
            }
        }
        traj.times.push(target);
        traj.snapshots.push(current.clone());
        traj.diagnostics.push(diag);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CaseLabel, PotentialForm, VelocityForm};

    fn linear() -> VelocityModel {
        VelocityModel::new(VelocityForm::Linear {
            v_max: 1.0,
            rho_ref: 1.0,
        })
        .unwrap()
    }

    fn unit_drift() -> Potential {
        Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap()
    }

    fn constants() -> ProblemConstants {
        ProblemConstants {
            big_l: 1.0,
            big_l_prime: 0.0,
            r_bar: 1.0,
            r_max: Some(1.0),
        }
    }

    #[test]
    fn single_step_matches_euler_oracle() {
        // two particles at 0 and 1 with ℓ = 1: the gap s obeys s′ = 1/s
        let sys = ParticleSystem::new(vec![0.0, 1.0], 1.0, CaseLabel::P1).unwrap();
        let next = step(&sys, &linear(), &unit_drift(), 0.1).unwrap();
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let h = 1e-6;
        for _ in 0..100_000 {
            let va = 1.0 - 1.0 / (b - a);
            a += h * va;
            b += h;
        }
        assert!((next.positions()[0] - a).abs() < 1e-5);
        assert!((next.positions()[1] - 1.1).abs() < 1e-14);
        assert!((next.positions()[0] - (1.1 - 1.2f64.sqrt())).abs() < 1e-6);
        assert_eq!(next.time(), 0.1);
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let sys = ParticleSystem::new(vec![0.0, 0.5, 1.0], 0.5, CaseLabel::P1).unwrap();
        let opts = SimulationOptions::new(0.5).with_uniform_outputs(6);
        let traj = simulate(&sys, &linear(), &unit_drift(), &constants(), &opts).unwrap();
        let expected: Vec<f64> = (0..6).map(|j| 0.5 * j as f64 / 5.0).collect();
        assert_eq!(traj.times, expected);
        for (t, s) in traj.times.iter().zip(&traj.snapshots) {
            assert_eq!(s.time(), *t);
        }
        assert_eq!(traj.diagnostics[0].mass, 1.0);
        assert!(traj.diagnostics.iter().all(|d| d.max_speed <= 1.0));
    }

    #[test]
    fn rejects_output_times_outside_horizon() {
        let sys = ParticleSystem::new(vec![0.0, 1.0], 1.0, CaseLabel::P1).unwrap();
        let opts = SimulationOptions::new(1.0).with_output_times(vec![2.0]);
        assert!(simulate(&sys, &linear(), &unit_drift(), &constants(), &opts).is_err());
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let sys = ParticleSystem::new(vec![0.0, 1.0], 1.0, CaseLabel::P1).unwrap();
        let traj = simulate(
            &sys,
            &linear(),
            &unit_drift(),
            &constants(),
            &SimulationOptions::new(0.0),
        )
        .unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.steps, 0);
    }

    #[test]
    fn guard_reports_stiffness_below_floor() {
        // particle 0 runs at speed 1/2 into a jammed particle one unit ahead
        let sys = ParticleSystem::new(vec![0.0, 1.0, 1.01], 0.5, CaseLabel::P1).unwrap();
        assert!(matches!(
            step_guarded(&sys, &linear(), &unit_drift(), 10.0, 10.0),
            Err(Error::Stiffness {
                left: 0,
                right: 1,
                ..
            })
        ));
        let (next, taken) = step_guarded(&sys, &linear(), &unit_drift(), 10.0, 1e-9).unwrap();
        assert!(taken < 10.0);
        assert!(next.min_spacing() > 0.0);
        // rigid translation never needs halving
        let rigid = VelocityModel::new(VelocityForm::Constant { v_max: 1.0 }).unwrap();
        assert_eq!(
            step_guarded(&sys, &rigid, &unit_drift(), 10.0, 10.0)
                .unwrap()
                .1,
            10.0
        );
    }
}
