//! Batch front end of the `ftl` binary.
//!
//! ```text
//! ftl simulate  --config problem.json [--n 200] [--out DIR]
//! ftl reference --config problem.json
//! ftl study     --config study.json
//! ftl check     --config study.json
//! ```
//!
//! Exit status: 0 on success, 1 when a check fails or a run errors out,
//! 2 on usage and configuration errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::atomizer::atomize;
use crate::harness::{run_convergence, run_metric_oracles, ExperimentConfig};
use crate::io::{
    fmt, report_summary, write_file, write_json, write_particle_densities_csv, write_reference_csv,
    write_report_csv, write_trajectory_csv,
};
use crate::model::CaseLabel;
use crate::reference::{fv_solve, FvGrid};
use crate::scheme::{simulate, ParticleSystem, SimulationOptions};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Random densities and flux pairs drawn by `check`.
const ORACLE_PAIRS: usize = 100;
const ORACLE_FLUX_PAIRS: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "ftl",
    version,
    about = "Follow-the-leader particle schemes and their reference solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the particle scheme once and write trajectory.csv and density_particles.csv.
    Simulate(CommonArgs),
    /// Run the Godunov solver and write density_reference.csv.
    Reference(CommonArgs),
    /// Run a convergence study and write report.json, report.csv and summary.txt.
    Study(CommonArgs),
    /// Run the study plus randomized metric and flux oracles.
    Check(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    /// Particle count of single runs.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    #[arg(long = "case", value_parser = parse_case)]
    pub case: Option<CaseLabel>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_case(s: &str) -> std::result::Result<CaseLabel, String> {
    s.parse::<CaseLabel>().map_err(|e| e.to_string())
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Reference(a)
            | Command::Study(a)
            | Command::Check(a) => a,
        }
    }
}

/// Loads the config and applies the command-line overrides.
pub fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    if !args.config.is_file() {
        return Err(Error::Configuration(format!(
            "config file {} does not exist",
            args.config.display()
        )));
    }
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(n) = args.n {
        cfg.n = Some(n);
    }
    if let Some(t) = args.t_final {
        cfg.t_final = t;
    }
    if let Some(case) = args.case {
        cfg.problem.potential.case = case;
    }
    cfg.validate()?;
    cfg.build_problem()?;
    Ok(cfg)
}

fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let problem = cfg.build_problem()?;
    let n = cfg.single_n();
    let atom = atomize(&problem.initial, n)?;
    let sys = ParticleSystem::from_atomization(&atom, problem.case_label())?;
    let opts = SimulationOptions::new(cfg.t_final).with_output_times(cfg.output_times());
    let traj = simulate(
        &sys,
        &problem.velocity,
        &problem.potential,
        &problem.constants,
        &opts,
    )?;
    write_file(&out.join("trajectory.csv"), |w| {
        write_trajectory_csv(w, &traj)
    })?;
    write_file(&out.join("density_particles.csv"), |w| {
        write_particle_densities_csv(w, &traj)
    })?;
    let last = traj.diagnostics[traj.diagnostics.len() - 1];
    let summary = format!(
        "simulate {} ({:?}, n = {n}, T = {})\nsteps {}, halvings {}\n\
         final support [{}, {}], min spacing {}, max density {}, TV {}\n",
        cfg.name,
        problem.case_label(),
        cfg.t_final,
        traj.steps,
        traj.halvings,
        fmt(last.leftmost),
        fmt(last.rightmost),
        fmt(last.min_spacing),
        fmt(last.max_density),
        fmt(last.tv),
    );
    fs::write(out.join("summary.txt"), summary)?;
    Ok(true)
}

fn run_reference(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let problem = cfg.build_problem()?;
    let hull = problem
        .initial
        .support_hull()
        .ok_or_else(|| Error::InvalidInput("initial density is identically zero".into()))?;
    let grid = FvGrid::around(
        hull,
        problem.constants.big_l,
        cfg.t_final,
        cfg.grid_m,
        &problem.potential,
    )?;
    let sol = fv_solve(
        &problem.initial,
        &problem.velocity,
        &grid,
        cfg.t_final,
        &cfg.output_times(),
    )?;
    write_file(&out.join("density_reference.csv"), |w| {
        write_reference_csv(w, &sol)
    })?;
    let drift = (0..sol.times.len())
        .map(|k| (sol.mass(k) - sol.mass(0)).abs())
        .fold(0.0, f64::max);
    let summary = format!(
        "reference {} (m = {}, window [{}, {}], T = {})\nsteps {}, mass drift {}\n",
        cfg.name,
        grid.m,
        fmt(grid.x_left),
        fmt(grid.x_right),
        cfg.t_final,
        sol.steps.len(),
        fmt(drift),
    );
    fs::write(out.join("summary.txt"), summary)?;
    Ok(true)
}

fn run_study(cfg: &ExperimentConfig, out: &Path, oracles: bool) -> Result<bool> {
    let report = run_convergence(cfg)?;
    write_file(&out.join("report.json"), |w| write_json(w, &report))?;
    write_file(&out.join("report.csv"), |w| write_report_csv(w, &report))?;
    let mut summary = report_summary(&report);
    let mut pass = report.flags.pass;
    if oracles {
        let o = run_metric_oracles(cfg.seed, ORACLE_PAIRS, ORACLE_PAIRS, ORACLE_FLUX_PAIRS)?;
        write_file(&out.join("oracles.json"), |w| write_json(w, &o))?;
        summary.push_str(&format!(
            "\noracles (seed {}): W1 max error {:.3e}, TV envelope failures {}, flux max error {:.3e}\n\
             oracles {}\n",
            o.seed,
            o.w1_max_error,
            o.tv_envelope_failures,
            o.flux_max_error,
            if o.pass { "PASS" } else { "FAIL" }
        ));
        pass &= o.pass;
    }
    fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(pass)
}

fn execute(command: &Command, cfg: &ExperimentConfig) -> Result<bool> {
    let out = &command.common().out;
    match command {
        Command::Simulate(_) => run_simulate(cfg, out),
        Command::Reference(_) => run_reference(cfg, out),
        Command::Study(_) => run_study(cfg, out, false),
        Command::Check(_) => run_study(cfg, out, true),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let common = cli.command.common();
    let cfg = match load_config(common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = fs::create_dir_all(&common.out) {
        eprintln!(
            "error: cannot create output directory {}: {e}",
            common.out.display()
        );
        return EXIT_USAGE;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_FAILED;
        }
    };
    match pool.install(|| execute(&cli.command, &cfg)) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!(
                "checks failed; see {}",
                common.out.join("summary.txt").display()
            );
            EXIT_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILED
        }
    }
}
