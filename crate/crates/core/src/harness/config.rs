use serde::{Deserialize, Serialize};

use crate::model::{CaseLabel, InitialSpec, Problem, ProblemSpec};
use crate::{Error, Result};

/// Oracle the particle densities are compared against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Exact solution: a translate of the datum for `v ≡ v_max`, or the block
    /// solution for `v = v_max(1 − ρ/ρ_ref)` with a positive constant drift
    /// and a single-block datum.
    Exact,
    /// Fine-grid Godunov solution.
    #[default]
    Godunov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative slack on the spacing and density bounds.
    pub bound_rel: f64,
    /// Relative slack on the W1 Lipschitz constant `2L`.
    pub w1_rel: f64,
    /// Largest accepted ratio of the per-`n` maximal TV.
    pub tv_spread: f64,
    /// Relative size of the single tolerated non-decrease in the error column.
    pub decay_slack: f64,
    /// Relative slack on the L1 contraction ratio.
    pub contraction_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bound_rel: 1e-6,
            w1_rel: 1e-6,
            tv_spread: 1.25,
            decay_slack: 0.02,
            contraction_rel: 1e-6,
        }
    }
}

/// Test-function bank and entropy levels for the residual table. Unset
/// entries are derived from the initial support `[a, b]`, its width `W` and
/// the horizon `T`: centers `{a, (a+b)/2, b} × {T/3, 2T/3}`, widths
/// `{(W/10, T/12), (W/5, T/8)}` and levels `R̄ · {0, 1/4, 1/2, 3/4, 1, 5/4}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    /// Snapshots per output interval used for the time quadrature.
    #[serde(default = "default_refinement")]
    pub time_refinement: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_centers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_centers: Option<Vec<f64>>,
    /// `(x width, t width)` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_levels: Option<Vec<f64>>,
}

fn default_refinement() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionConfig {
    /// Second initial datum, run on the same grid as the first.
    pub partner: InitialSpec,
}

/// A problem plus the harness settings of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(flatten)]
    pub problem: ProblemSpec,
    /// Particle count for single runs; defaults to the largest of `n_values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_grid_m")]
    pub grid_m: usize,
    pub t_final: f64,
    /// Number of uniform output intervals on `[0, T]`.
    #[serde(default = "default_output_count")]
    pub output_count: usize,
    #[serde(default)]
    pub reference: ReferenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

fn default_n_values() -> Vec<usize> {
    vec![50, 100, 200, 400]
}

fn default_grid_m() -> usize {
    4096
}

fn default_output_count() -> usize {
    40
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Configuration(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(e) => Error::Configuration(format!("{}: {e}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Configuration(msg));
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!(
                "t_final must be positive and finite, got {}",
                self.t_final
            ));
        }
        if self.n_values.is_empty() {
            return bad("n_values is empty".into());
        }
        if self.n_values.iter().any(|&n| n < 2) {
            return bad("every n must be at least 2".into());
        }
        if self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n_values must be strictly ascending".into());
        }
        let n_max = self.n_values[self.n_values.len() - 1].max(self.n.unwrap_or(0));
        if self.grid_m < 8 * n_max {
            return bad(format!(
                "grid_m = {} must be at least 8 x the largest n ({n_max})",
                self.grid_m
            ));
        }
        if self.output_count == 0 {
            return bad("output_count must be positive".into());
        }
        if let Some(e) = &self.entropy {
            if e.time_refinement == 0 {
                return bad("entropy.time_refinement must be positive".into());
            }
        }
        Ok(())
    }

    pub fn build_problem(&self) -> Result<Problem> {
        Problem::from_spec(&self.problem)
    }

    pub fn case_label(&self) -> CaseLabel {
        self.problem.potential.case
    }

    /// Particle count for single runs.
    pub fn single_n(&self) -> usize {
        self.n.unwrap_or(self.n_values[self.n_values.len() - 1])
    }

    /// Output times `j T / output_count`, `j = 0..=output_count`.
    pub fn output_times(&self) -> Vec<f64> {
        uniform_times(self.t_final, self.output_count)
    }
}

pub(crate) fn uniform_times(t_final: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|j| t_final * j as f64 / intervals as f64)
        .collect()
}
