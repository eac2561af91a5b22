//! Density reconstruction, total variation and distances between densities.
//!
//! Distances are exact for piecewise constant data: L¹ is summed over the
//! merged breakpoints, and W¹ integrates `|X₁ − X₂|` between two piecewise
//! linear quantile functions segment by segment, splitting at sign changes.

use serde::{Deserialize, Serialize};

use crate::model::PiecewiseConstantDensity;
use crate::scheme::ParticleSystem;
use crate::{Error, Result};

/// Tolerance on unit mass for quantile functions.
pub const UNIT_MASS_TOLERANCE: f64 = 1e-9;

/// `ρⁿ = Σ Rᵢ 𝟙_[xᵢ, xᵢ₊₁)`
pub fn reconstruct(sys: &ParticleSystem) -> PiecewiseConstantDensity {
    let x = sys.positions();
    let ell = sys.ell_n();
    let values = x.windows(2).map(|w| ell / (w[1] - w[0])).collect();
    PiecewiseConstantDensity::from_parts_unchecked(x.to_vec(), values)
}

/// `v₀ + v_{m−1} + Σ |vᵢ₊₁ − vᵢ|`
pub fn tv_of_values(values: &[f64]) -> f64 {
    match values {
        [] => 0.0,
        [first, .., last] | [first @ last] => {
            let interior: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            first.abs() + last.abs() + interior
        }
    }
}

/// Total variation, counting the jumps at both ends of the support.
pub fn total_variation(d: &PiecewiseConstantDensity) -> f64 {
    tv_of_values(d.values())
}

/// C¹ approximation of `|·|`, quadratic on `(−σ, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedAbs {
    pub sigma: f64,
}

impl SmoothedAbs {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain {
                what: "smoothing width",
                value: sigma,
            });
        }
        Ok(Self { sigma })
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z.abs() >= self.sigma {
            z.abs()
        } else {
            z * z / (2.0 * self.sigma) + 0.5 * self.sigma
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        if z.abs() >= self.sigma {
            z.signum()
        } else {
            z / self.sigma
        }
    }
}

/// `v₀ + v_{m−1} + Σ η_σ(vᵢ − vᵢ₊₁)`
pub fn smoothed_tv(d: &PiecewiseConstantDensity, eta: SmoothedAbs) -> f64 {
    let v = d.values();
    match v {
        [] => 0.0,
        [first, .., last] | [first @ last] => {
            let interior: f64 = v.windows(2).map(|w| eta.eval(w[0] - w[1])).sum();
            first.abs() + last.abs() + interior
        }
    }
}

/// Piecewise linear quantile function `X(z)` on `[0, 1]`.
///
/// Segment `j` covers `[knots[j], knots[j + 1])` with
/// `X(z) = offsets[j] + slopes[j] (z − knots[j])`. Zero-density pieces are
/// jumps of `X` and own no segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoInverse {
    pub knots: Vec<f64>,
    pub offsets: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl PseudoInverse {
    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    fn segment_at(&self, z: f64) -> usize {
        let j = self.knots.partition_point(|&k| k <= z);
        j.saturating_sub(1).min(self.segments() - 1)
    }

    fn eval_on(&self, j: usize, z: f64) -> f64 {
        self.offsets[j] + self.slopes[j] * (z - self.knots[j])
    }

    pub fn eval(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        self.eval_on(self.segment_at(z), z)
    }
}

pub fn pseudo_inverse(d: &PiecewiseConstantDensity) -> Result<PseudoInverse> {
    let mass = d.mass();
    if !(mass > 0.0) {
        return Err(Error::InvalidInput(
            "pseudo-inverse of a zero-mass density".into(),
        ));
    }
    if (mass - 1.0).abs() > UNIT_MASS_TOLERANCE {
        return Err(Error::Normalization { mass });
    }
    let bp = d.breakpoints();
    let mut knots = vec![0.0];
    let mut offsets = Vec::new();
    let mut slopes = Vec::new();
    let mut cum = 0.0;
    for (j, &v) in d.values().iter().enumerate() {
        if v > 0.0 {
            offsets.push(bp[j]);
            slopes.push(mass / v);
            cum += v * (bp[j + 1] - bp[j]);
            knots.push(cum / mass);
        }
    }
    *knots.last_mut().expect("at least one positive piece") = 1.0;
    Ok(PseudoInverse {
        knots,
        offsets,
        slopes,
    })
}

/// `∫ |a + (b − a) s| ds` over `s ∈ [0, 1]`.
fn abs_linear_mean(a: f64, b: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * (a.abs() + b.abs())
    } else {
        0.5 * (a * a + b * b) / (a.abs() + b.abs())
    }
}

/// `∫₀¹ |X₁ − X₂| dz`, exact up to round-off.
pub fn wasserstein1(d1: &PiecewiseConstantDensity, d2: &PiecewiseConstantDensity) -> Result<f64> {
    let (m1, m2) = (d1.mass(), d2.mass());
    if (m1 - m2).abs() > UNIT_MASS_TOLERANCE {
        return Err(Error::MassMismatch {
            left: m1,
            right: m2,
        });
    }
    let (q1, q2) = (pseudo_inverse(d1)?, pseudo_inverse(d2)?);
    Ok(quantile_distance(&q1, &q2))
}

pub fn quantile_distance(q1: &PseudoInverse, q2: &PseudoInverse) -> f64 {
    let mut z: Vec<f64> = q1.knots.iter().chain(&q2.knots).copied().collect();
    z.sort_by(f64::total_cmp);
    z.dedup();
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    for w in z.windows(2) {
        let (za, zb) = (w[0], w[1]);
        if !(zb > za) {
            continue;
        }
        while i + 1 < q1.segments() && q1.knots[i + 1] <= za {
            i += 1;
        }
        while j + 1 < q2.segments() && q2.knots[j + 1] <= za {
            j += 1;
        }
        let da = q1.eval_on(i, za) - q2.eval_on(j, za);
        let db = q1.eval_on(i, zb) - q2.eval_on(j, zb);
        total += (zb - za) * abs_linear_mean(da, db);
    }
    total
}

/// `∫ |ρ₁ − ρ₂| dx` over the union of both breakpoint sets.
pub fn l1_distance(d1: &PiecewiseConstantDensity, d2: &PiecewiseConstantDensity) -> f64 {
    let mut x: Vec<f64> = d1
        .breakpoints()
        .iter()
        .chain(d2.breakpoints())
        .copied()
        .collect();
    x.sort_by(f64::total_cmp);
    x.dedup();
    x.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (d1.value_at(mid) - d2.value_at(mid)).abs() * (w[1] - w[0])
        })
        .sum()
}

/// Caller-supplied constants of the total variation estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TvCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub zeta: f64,
}

/// `(TV₀ + αt + βe^{L′t}) · exp(γt(1 + t) + ζe^{L′t})`
pub fn tv_bound(t: f64, big_l_prime: f64, tv0: f64, c: TvCoefficients) -> f64 {
    let grow = (big_l_prime * t).exp();
    let beta_term = if c.beta == 0.0 { 0.0 } else { c.beta * grow };
    let zeta_term = if c.zeta == 0.0 { 0.0 } else { c.zeta * grow };
    (tv0 + c.alpha * t + beta_term) * (c.gamma * t * (1.0 + t) + zeta_term).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CaseLabel;

    fn density(bp: &[f64], v: &[f64]) -> PiecewiseConstantDensity {
        PiecewiseConstantDensity::new(bp.to_vec(), v.to_vec()).unwrap()
    }

    fn block(a: f64, b: f64, h: f64) -> PiecewiseConstantDensity {
        PiecewiseConstantDensity::block(a, b, h).unwrap()
    }

    #[test]
    fn reconstruct_examples() {
        let s = ParticleSystem::new(vec![0.0, 0.25, 0.5, 0.75, 1.0], 0.25, CaseLabel::P1).unwrap();
        let d = reconstruct(&s);
        assert_eq!(d.values(), &[1.0; 4]);
        assert_eq!(d.mass(), 1.0);
        let s = ParticleSystem::new(vec![0.0, 1.0, 2.0], 0.5, CaseLabel::P1).unwrap();
        assert_eq!(reconstruct(&s).values(), &[0.5, 0.5]);
        let s = ParticleSystem::new(vec![0.0, 0.5, 2.0], 0.5, CaseLabel::P1).unwrap();
        let v = reconstruct(&s).values().to_vec();
        assert_eq!(v[0], 1.0);
        assert!((v[1] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(total_variation(&block(0.0, 1.0, 3.0)), 6.0);
        assert_eq!(
            total_variation(&density(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 2.0])),
            6.0
        );
        let s = ParticleSystem::new(
            (0..=8).map(|i| i as f64 / 8.0).collect(),
            0.125,
            CaseLabel::P1,
        )
        .unwrap();
        assert_eq!(total_variation(&reconstruct(&s)), 2.0);
    }

    #[test]
    fn smoothed_tv_examples() {
        let d = density(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]);
        let tiny = smoothed_tv(&d, SmoothedAbs::new(1e-12).unwrap());
        assert!((tiny - 6.0).abs() < 1e-9);
        let flat = density(&[0.0, 1.0, 2.0], &[1.0, 1.0]);
        assert_eq!(smoothed_tv(&flat, SmoothedAbs::new(1.0).unwrap()), 2.5);
        let wide = smoothed_tv(&d, SmoothedAbs::new(10.0).unwrap());
        assert!((wide - 13.25).abs() < 1e-14);
    }

    #[test]
    fn smoothed_abs_rejects_bad_width() {
        assert!(SmoothedAbs::new(0.0).is_err());
        assert!(SmoothedAbs::new(f64::NAN).is_err());
    }

    #[test]
    fn pseudo_inverse_examples() {
        let q = pseudo_inverse(&block(0.0, 1.0, 1.0)).unwrap();
        for z in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(q.eval(z), z);
        }
        let q = pseudo_inverse(&block(2.5, 3.5, 1.0)).unwrap();
        assert_eq!(q.eval(0.25), 2.75);
        let q = pseudo_inverse(&density(&[0.0, 0.5, 2.0], &[1.0, 1.0 / 3.0])).unwrap();
        assert_eq!(q.eval(0.25), 0.25);
        assert!((q.eval(0.75) - (0.5 + 3.0 * 0.25)).abs() < 1e-15);
        assert!(pseudo_inverse(&block(0.0, 1.0, 0.0)).is_err());
        assert!(pseudo_inverse(&block(0.0, 1.0, 2.0)).is_err());
    }

    #[test]
    fn pseudo_inverse_jumps_over_gaps() {
        let q = pseudo_inverse(&density(&[0.0, 0.5, 1.5, 2.0], &[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(q.segments(), 2);
        assert_eq!(q.eval(0.5), 1.5);
        assert!((q.eval(0.4999999) - 0.4999999).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_examples() {
        let unit = block(0.0, 1.0, 1.0);
        assert_eq!(wasserstein1(&unit, &unit).unwrap(), 0.0);
        let shifted = wasserstein1(&unit, &block(0.3, 1.3, 1.0)).unwrap();
        assert!((shifted - 0.3).abs() < 1e-15);
        let squeezed = wasserstein1(&unit, &block(0.0, 0.5, 2.0)).unwrap();
        assert!((squeezed - 0.25).abs() < 1e-15);
        assert!(matches!(
            wasserstein1(&unit, &block(0.0, 1.0, 0.5)),
            Err(Error::MassMismatch { .. })
        ));
    }

    #[test]
    fn wasserstein_with_crossing_quantiles() {
        // X₁(z) = z against X₂(z) ≈ 0.5: ∫|z − 0.5| = 1/4
        let point_like = block(0.5, 0.5 + 1.0 / 1024.0, 1024.0);
        let w = wasserstein1(&block(0.0, 1.0, 1.0), &point_like).unwrap();
        let oracle: f64 = (0..200_000)
            .map(|k| {
                let z = (k as f64 + 0.5) / 200_000.0;
                (z - (0.5 + z / 1024.0)).abs()
            })
            .sum::<f64>()
            / 200_000.0;
        assert!((w - oracle).abs() < 1e-9);
    }

    #[test]
    fn l1_examples() {
        let unit = block(0.0, 1.0, 1.0);
        assert_eq!(l1_distance(&unit, &unit), 0.0);
        assert_eq!(l1_distance(&unit, &block(0.5, 1.5, 1.0)), 1.0);
        assert!((l1_distance(&unit, &block(0.0, 1.0, 0.9)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn tv_bound_examples() {
        let zero = TvCoefficients::default();
        assert_eq!(tv_bound(0.0, 1.0, 2.0, zero), 2.0);
        let linear = TvCoefficients {
            alpha: 0.5,
            beta: 1.0,
            ..zero
        };
        assert_eq!(tv_bound(2.0, 0.0, 2.0, linear), 4.0);
        let full = TvCoefficients {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.5,
            zeta: 0.1,
        };
        let e = std::f64::consts::E;
        let expected = (3.0 + e) * (1.0 + 0.1 * e).exp();
        assert!((tv_bound(1.0, 1.0, 2.0, full) - expected).abs() < 1e-13);
    }
}
