//! CSV, JSON and plain-text artifacts.
//!
//! Every float is written with `{:.16e}` (17 significant digits), which
//! round-trips exactly. Missing values are empty CSV fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::harness::ConvergenceReport;
use crate::metrics::reconstruct;
use crate::reference::FvSolution;
use crate::scheme::Trajectory;
use crate::Result;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Long format `t,i,x`: one row per particle and snapshot.
pub fn write_trajectory_csv<W: Write>(w: &mut W, traj: &Trajectory) -> Result<()> {
    writeln!(w, "t,i,x")?;
    for s in &traj.snapshots {
        let t = fmt(s.time());
        for (i, &x) in s.positions().iter().enumerate() {
            writeln!(w, "{t},{i},{}", fmt(x))?;
        }
    }
    Ok(())
}

/// Reconstructed densities `t,j,x_left,x_right,rho`: one row per interval.
pub fn write_particle_densities_csv<W: Write>(w: &mut W, traj: &Trajectory) -> Result<()> {
    writeln!(w, "t,j,x_left,x_right,rho")?;
    for s in &traj.snapshots {
        let t = fmt(s.time());
        let d = reconstruct(s);
        let bp = d.breakpoints();
        for (j, &rho) in d.values().iter().enumerate() {
            writeln!(w, "{t},{j},{},{},{}", fmt(bp[j]), fmt(bp[j + 1]), fmt(rho))?;
        }
    }
    Ok(())
}

/// Cell averages `t,i,x,rho` with `x` the cell center.
pub fn write_reference_csv<W: Write>(w: &mut W, sol: &FvSolution) -> Result<()> {
    writeln!(w, "t,i,x,rho")?;
    let centers: Vec<String> = sol.cell_centers().map(fmt).collect();
    for (t, cells) in sol.times.iter().zip(&sol.cells) {
        let t = fmt(*t);
        for (i, (x, &rho)) in centers.iter().zip(cells).enumerate() {
            writeln!(w, "{t},{i},{x},{}", fmt(rho))?;
        }
    }
    Ok(())
}

const REPORT_COLUMNS: &str = "n,l1_error,tv_initial,max_tv,spacing_margin,density_cap_margin,\
w1_ratio,diameter_margin,max_speed,sign_violation,pinned_drift,mass_defect,entropy_min,steps,halvings";

/// One row per particle count.
pub fn write_report_csv<W: Write>(w: &mut W, report: &ConvergenceReport) -> Result<()> {
    writeln!(w, "{REPORT_COLUMNS}")?;
    for r in &report.rows {
        let fields = [
            r.n.to_string(),
            fmt(r.l1_error),
            fmt(r.tv_initial),
            fmt(r.max_tv),
            fmt_opt(r.spacing_margin),
            fmt_opt(r.density_cap_margin),
            fmt(r.w1_ratio),
            fmt(r.diameter_margin),
            fmt(r.max_speed),
            fmt_opt(r.sign_violation),
            fmt_opt(r.pinned_drift),
            fmt(r.mass_defect),
            fmt_opt(r.entropy_min),
            r.steps.to_string(),
            r.halvings.to_string(),
        ];
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_json<W: Write, T: serde::Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Human-readable account of a study.
pub fn report_summary(report: &ConvergenceReport) -> String {
    let f = &report.flags;
    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line(format!(
        "study {} ({:?}, T = {})",
        report.name, report.case, report.t_final
    ));
    line(format!(
        "reference {:?}, grid m = {}, L = {}, TV of initial datum = {}",
        report.reference, report.grid_m, report.big_l, report.initial_tv
    ));
    line(String::new());
    line(format!(
        "{:>6}  {:>12}  {:>10}  {:>10}  {:>8}",
        "n", "L1 error", "max TV", "W1 ratio", "steps"
    ));
    for r in &report.rows {
        line(format!(
            "{:>6}  {:>12.6e}  {:>10.6}  {:>10.6}  {:>8}",
            r.n, r.l1_error, r.max_tv, r.w1_ratio, r.steps
        ));
    }
    line(String::new());
    line(format!("{} error decreasing", verdict(f.error_decreasing)));
    line(format!(
        "{} error strictly decreasing",
        verdict(f.error_strictly_decreasing)
    ));
    line(format!(
        "{} TV spread {:.6}",
        verdict(f.tv_uniform),
        f.tv_spread
    ));
    line(format!("{} initial TV", verdict(f.tv_initial)));
    line(format!(
        "{} maximum principle",
        verdict(f.maximum_principle)
    ));
    line(format!("{} density cap", verdict(f.density_cap)));
    line(format!("{} W1 Lipschitz", verdict(f.w1_lipschitz)));
    line(format!(
        "{} sign preservation",
        verdict(f.sign_preservation)
    ));
    line(format!("{} support", verdict(f.support)));
    if let (Some(ok), Some(e)) = (f.entropy, &report.entropy) {
        line(format!(
            "{} entropy (fitted C = {:.6e})",
            verdict(ok),
            e.fitted_c
        ));
    }
    if let (Some(ok), Some(ratio)) = (f.contraction, f.contraction_ratio) {
        line(format!(
            "{} L1 contraction (ratio {ratio:.12})",
            verdict(ok)
        ));
    }
    line(format!("overall {}", verdict(f.pass)));
    s
}

/// Writes through a buffered file, creating or truncating it.
pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        CaseLabel, Potential, PotentialForm, ProblemConstants, VelocityForm, VelocityModel,
    };
    use crate::scheme::{simulate, ParticleSystem, SimulationOptions};

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn trajectory_layout() {
        let model = VelocityModel::new(VelocityForm::Constant { v_max: 1.0 }).unwrap();
        let pot = Potential::new(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1).unwrap();
        let sys = ParticleSystem::new(vec![0.0, 0.5, 1.0], 0.5, CaseLabel::P1).unwrap();
        let constants = ProblemConstants {
            big_l: 1.0,
            big_l_prime: 0.0,
            r_bar: 1.0,
            r_max: None,
        };
        let opts = SimulationOptions::new(1.0).with_uniform_outputs(3);
        let traj = simulate(&sys, &model, &pot, &constants, &opts).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert_eq!(lines[1], "0.0000000000000000e0,0,0.0000000000000000e0");
        let mut buf = Vec::new();
        write_particle_densities_csv(&mut buf, &traj).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 2);
    }
}
