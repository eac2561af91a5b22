//! Seeded randomized cross-checks of the metric layer and the Godunov flux
//! against brute-force evaluations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{smoothed_tv, total_variation, wasserstein1, SmoothedAbs};
use crate::model::{PiecewiseConstantDensity, VelocityForm, VelocityModel};
use crate::reference::godunov_flux;
use crate::Result;

/// Sample count of the brute-force W1 quadrature.
pub const W1_SAMPLES: usize = 100_000;
pub const W1_TOLERANCE: f64 = 1e-4;
pub const FLUX_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub seed: u64,
    pub w1_pairs: usize,
    pub w1_max_error: f64,
    pub tv_densities: usize,
    /// Densities whose `TV_σ` left the envelope `[TV, TV + (m−1)σ/2]` or
    /// failed to decrease with `σ`.
    pub tv_envelope_failures: usize,
    pub flux_pairs: usize,
    pub flux_max_error: f64,
    pub pass: bool,
}

/// Unit-mass density with 1 to 6 pieces, occasionally with an empty piece.
pub fn random_density<R: Rng>(rng: &mut R) -> PiecewiseConstantDensity {
    let pieces = rng.gen_range(1..=6);
    let mut bp = vec![rng.gen_range(-1.0..1.0)];
    for _ in 0..pieces {
        let last = bp[bp.len() - 1];
        bp.push(last + rng.gen_range(0.05..1.0));
    }
    let mut values: Vec<f64> = (0..pieces)
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(0.1..2.0)
            }
        })
        .collect();
    if values.iter().all(|&v| v == 0.0) {
        values[0] = 1.0;
    }
    let mass: f64 = values
        .iter()
        .zip(bp.windows(2))
        .map(|(v, w)| v * (w[1] - w[0]))
        .sum();
    let values = values.iter().map(|v| v / mass).collect();
    PiecewiseConstantDensity::new(bp, values).expect("generated density is valid")
}

/// Quantile samples `X(z_k)`, `z_k = k/(samples−1)`, by a monotone sweep.
fn quantile_samples(d: &PiecewiseConstantDensity, samples: usize) -> Vec<f64> {
    let bp = d.breakpoints();
    let values = d.values();
    let mut out = Vec::with_capacity(samples);
    let mut j = 0;
    let mut below = 0.0;
    for k in 0..samples {
        let z = k as f64 / (samples - 1) as f64;
        loop {
            let mass = values[j] * (bp[j + 1] - bp[j]);
            if j + 1 == values.len() || (values[j] > 0.0 && below + mass >= z) {
                break;
            }
            below += mass;
            j += 1;
        }
        let x = if values[j] > 0.0 {
            bp[j] + (z - below) / values[j]
        } else {
            bp[j + 1]
        };
        out.push(x.clamp(bp[j], bp[j + 1]));
    }
    out
}

/// Trapezoid rule on `samples` uniform quantile levels.
pub fn w1_brute_force(
    a: &PiecewiseConstantDensity,
    b: &PiecewiseConstantDensity,
    samples: usize,
) -> f64 {
    let qa = quantile_samples(a, samples);
    let qb = quantile_samples(b, samples);
    let h = 1.0 / (samples - 1) as f64;
    let diff: Vec<f64> = qa.iter().zip(&qb).map(|(x, y)| (x - y).abs()).collect();
    h * (diff.iter().sum::<f64>() - 0.5 * (diff[0] + diff[samples - 1]))
}

/// Extremum of `f` over `[min(a,b), max(a,b)]` by enumeration: the minimum
/// when `a ≤ b`, the maximum otherwise. A grid of `cells` levels per unit is
/// refined by the same factor around the best coarse candidate.
pub fn flux_by_enumeration(a: f64, b: f64, model: &VelocityModel, cells: usize) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    let better = |x: f64, y: f64| if a <= b { x < y } else { x > y };
    let scan = |from: f64, to: f64, h: f64| {
        let first = (from / h).ceil() as i64;
        let last = (to / h).floor() as i64;
        let mut best = (lo, model.flux(lo));
        for r in [hi].into_iter().chain((first..=last).map(|k| k as f64 * h)) {
            let f = model.flux(r);
            if better(f, best.1) {
                best = (r, f);
            }
        }
        best
    };
    let h = 1.0 / cells as f64;
    let (r, _) = scan(lo, hi, h);
    let (_, f) = scan((r - h).max(lo), (r + h).min(hi), h / cells as f64);
    f
}

pub fn run_metric_oracles(
    seed: u64,
    w1_pairs: usize,
    tv_densities: usize,
    flux_pairs: usize,
) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..w1_pairs)
        .map(|_| (random_density(&mut rng), random_density(&mut rng)))
        .collect();
    let w1_max_error = pairs
        .par_iter()
        .map(|(a, b)| Ok((wasserstein1(a, b)? - w1_brute_force(a, b, W1_SAMPLES)).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let sigmas = [1.0, 1e-1, 1e-2, 1e-4, 1e-8];
    let mut tv_envelope_failures = 0;
    for _ in 0..tv_densities {
        let d = random_density(&mut rng);
        let tv = total_variation(&d);
        let m = d.len();
        let slack = 1e-12 * (1.0 + tv);
        let mut previous = f64::INFINITY;
        let ok = sigmas.iter().all(|&sigma| {
            let s = smoothed_tv(&d, SmoothedAbs::new(sigma).expect("positive sigma"));
            let inside = tv - slack <= s && s <= tv + (m as f64 - 1.0) * sigma / 2.0 + slack;
            let monotone = s <= previous + slack;
            previous = s;
            inside && monotone
        });
        if !ok {
            tv_envelope_failures += 1;
        }
    }

    let models = [
        VelocityForm::Linear {
            v_max: 1.0,
            rho_ref: 1.0,
        },
        VelocityForm::Reciprocal {
            v_max: 1.0,
            r_max: Some(2.0),
        },
        VelocityForm::CutoffLinear {
            v_max: 1.0,
            r_max: 2.0,
            rho_free: 0.25,
        },
    ]
    .map(|f| VelocityModel::new(f).expect("built-in velocity law"));
    let mut flux_max_error: f64 = 0.0;
    for k in 0..flux_pairs {
        let model = &models[k % models.len()];
        let top = model.r_max().unwrap_or(1.0);
        let a = rng.gen_range(0.0..=top);
        let b = rng.gen_range(0.0..=top);
        let err = (godunov_flux(a, b, model) - flux_by_enumeration(a, b, model, 1 << 10)).abs();
        flux_max_error = flux_max_error.max(err);
    }

    let pass = w1_max_error <= W1_TOLERANCE
        && tv_envelope_failures == 0
        && flux_max_error <= FLUX_TOLERANCE;
    Ok(OracleReport {
        seed,
        w1_pairs,
        w1_max_error,
        tv_densities,
        tv_envelope_failures,
        flux_pairs,
        flux_max_error,
        pass,
    })
}
