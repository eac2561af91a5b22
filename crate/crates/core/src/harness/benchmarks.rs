//! Built-in benchmark problems, one or more per case.

use super::config::{
    ContractionConfig, EntropyConfig, ExperimentConfig, ReferenceKind, Tolerances,
};
use crate::model::{
    CaseLabel, InitialSpec, Potential, PotentialForm, PotentialSpec, ProblemConstants, ProblemSpec,
    VelocityForm, VelocityModel,
};
use crate::scheme::ParticleSystem;
use crate::Result;

fn lwr() -> VelocityForm {
    VelocityForm::Linear {
        v_max: 1.0,
        rho_ref: 1.0,
    }
}

fn block(a: f64, b: f64) -> InitialSpec {
    InitialSpec {
        breakpoints: vec![a, b],
        values: vec![1.0 / (b - a)],
    }
}

fn potential(form: PotentialForm, case: CaseLabel) -> PotentialSpec {
    PotentialSpec {
        form,
        case,
        window: None,
    }
}

fn config(
    name: &str,
    problem: ProblemSpec,
    t_final: f64,
    n_values: Vec<usize>,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        problem,
        n: None,
        n_values,
        grid_m: 4096,
        t_final,
        output_count: 40,
        reference: ReferenceKind::Godunov,
        entropy: None,
        contraction: None,
        tolerances: Tolerances::default(),
        seed: 0,
    }
}

/// `v = 1 − ρ`, `φ ≡ 1`, `ρ̄ = 𝟙_[0,1]`, `T = 1/2`, against the exact solution.
pub fn riemann_p1() -> ExperimentConfig {
    let problem = ProblemSpec {
        velocity: lwr(),
        potential: potential(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1),
        initial: block(0.0, 1.0),
    };
    let mut cfg = config("riemann_p1", problem, 0.5, vec![50, 100, 200, 400]);
    cfg.reference = ReferenceKind::Exact;
    cfg.entropy = Some(EntropyConfig {
        time_refinement: 4,
        ..EntropyConfig::default()
    });
    cfg.contraction = Some(ContractionConfig {
        partner: block(0.05, 1.05),
    });
    cfg
}

/// `φ(x) = 1 + sin(x)/2` with the data of [`riemann_p1`], against fine Godunov.
pub fn sinusoid_p1() -> ExperimentConfig {
    let problem = ProblemSpec {
        velocity: lwr(),
        potential: potential(
            PotentialForm::Sinusoid {
                offset: 1.0,
                amplitude: 0.5,
                frequency: 1.0,
            },
            CaseLabel::P1,
        ),
        initial: block(0.0, 1.0),
    };
    config("sinusoid_p1", problem, 0.5, vec![100, 200, 400])
}

/// `φ(x) = −(1 + sin(x)/2)`: backward movement.
pub fn sinusoid_p2() -> ExperimentConfig {
    let problem = ProblemSpec {
        velocity: lwr(),
        potential: potential(
            PotentialForm::Sinusoid {
                offset: -1.0,
                amplitude: -0.5,
                frequency: 1.0,
            },
            CaseLabel::P2,
        ),
        initial: block(0.0, 1.0),
    };
    config("sinusoid_p2", problem, 0.5, vec![100, 200, 400])
}

/// Repulsive saturating drift. `pinned` centers the block on the origin so
/// that one particle sits exactly at 0 for even `n`.
pub fn repulsive_p3(pinned: bool) -> ExperimentConfig {
    let initial = if pinned {
        block(-0.5, 0.5)
    } else {
        block(-1.0 / 3.0, 2.0 / 3.0)
    };
    let problem = ProblemSpec {
        velocity: lwr(),
        potential: potential(
            PotentialForm::Saturating {
                amplitude: 1.0,
                scale: 1.0,
            },
            CaseLabel::P3,
        ),
        initial,
    };
    let name = if pinned {
        "repulsive_p3_pinned"
    } else {
        "repulsive_p3"
    };
    let mut cfg = config(name, problem, 1.0, vec![100, 200, 400]);
    cfg.contraction = Some(ContractionConfig {
        partner: block(-0.45, 0.55),
    });
    cfg
}

/// Attractive saturating drift with a cutoff velocity (`R_max = 2`).
pub fn attractive_p4() -> ExperimentConfig {
    let problem = ProblemSpec {
        velocity: VelocityForm::CutoffLinear {
            v_max: 1.0,
            r_max: 2.0,
            rho_free: 0.0,
        },
        potential: potential(
            PotentialForm::Saturating {
                amplitude: -1.0,
                scale: 1.0,
            },
            CaseLabel::P4,
        ),
        initial: block(-0.5, 0.5),
    };
    config("attractive_p4", problem, 2.0, vec![100, 200, 400])
}

/// `v ≡ 1`, `φ ≡ 1`: every particle translates at unit speed.
pub fn rigid_translation() -> ExperimentConfig {
    let problem = ProblemSpec {
        velocity: VelocityForm::Constant { v_max: 1.0 },
        potential: potential(PotentialForm::Constant { value: 1.0 }, CaseLabel::P1),
        initial: block(0.0, 1.0),
    };
    let mut cfg = config("rigid_translation", problem, 0.5, vec![100, 200, 400]);
    cfg.reference = ReferenceKind::Exact;
    cfg
}

/// Every case benchmark.
pub fn all() -> Vec<ExperimentConfig> {
    vec![
        riemann_p1(),
        sinusoid_p1(),
        sinusoid_p2(),
        repulsive_p3(false),
        repulsive_p3(true),
        attractive_p4(),
        rigid_translation(),
    ]
}

/// Two particles at `±1` with `ℓ = 1` under the attractive drift
/// `−sign(x)|x|^{1/2}` and `v = v_max/(1 + ρ)`, optionally with a cutoff.
pub struct Demonstrator {
    pub system: ParticleSystem,
    pub velocity: VelocityModel,
    pub potential: Potential,
    pub constants: ProblemConstants,
}

pub fn blow_up_demonstrator(r_max: Option<f64>) -> Result<Demonstrator> {
    let velocity = VelocityModel::new(VelocityForm::Reciprocal { v_max: 1.0, r_max })?;
    let potential = Potential::new(
        PotentialForm::OddPower {
            amplitude: -1.0,
            alpha: 0.5,
        },
        CaseLabel::P4,
    )?;
    let system = ParticleSystem::new(vec![-1.0, 1.0], 1.0, CaseLabel::P4)?;
    let constants = ProblemConstants {
        big_l: f64::INFINITY,
        big_l_prime: f64::INFINITY,
        r_bar: 0.5,
        r_max,
    };
    Ok(Demonstrator {
        system,
        velocity,
        potential,
        constants,
    })
}
