//! Equal-mass atomization of an initial density into `n + 1` particles.
//!
//! Positions follow the recursive sup-definition
//! `x̄ᵢ = sup{x : ∫_{x̄ᵢ₋₁}^{x} ρ̄ < ℓ_n}` with the endpoints pinned to the
//! convex hull of the support. On piecewise constant data the CDF is
//! piecewise linear, so each position is found in closed form; inside a zero
//! plateau of the CDF the sup lands on the left edge of the plateau.

use serde::{Deserialize, Serialize};

use crate::model::PiecewiseConstantDensity;
use crate::{Error, Result};

/// Allowed deviation of the initial mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomizationResult {
    /// `x̄₀ < … < x̄_n`
    pub positions: Vec<f64>,
    /// Mass quantum `ℓ_n = 1/n`.
    pub ell_n: f64,
    /// Largest `i` with `x̄ᵢ ≤ 0`; `None` when every particle is positive.
    pub k_n: Option<usize>,
    pub n: usize,
}

/// Largest index of a non-positive entry in an increasing sequence.
pub fn split_index(positions: &[f64]) -> Option<usize> {
    positions.partition_point(|&x| x <= 0.0).checked_sub(1)
}

pub fn atomize(initial: &PiecewiseConstantDensity, n: usize) -> Result<AtomizationResult> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need n >= 2 particle intervals, got {n}"
        )));
    }
    let mass = initial.mass();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::Normalization { mass });
    }
    let (x_min, x_max) = initial
        .support_hull()
        .ok_or_else(|| Error::InvalidInput("initial density is identically zero".into()))?;

    let bp = initial.breakpoints();
    let vals = initial.values();
    // cumulative mass at the left edge of each piece
    let mut cum = Vec::with_capacity(vals.len() + 1);
    cum.push(0.0);
    for (j, v) in vals.iter().enumerate() {
        cum.push(cum[j] + v * (bp[j + 1] - bp[j]));
    }

    let mut positions = Vec::with_capacity(n + 1);
    positions.push(x_min);
    let mut j = 0;
    for i in 1..n {
        let target = mass * i as f64 / n as f64;
        while j < vals.len() && !(vals[j] > 0.0 && cum[j + 1] >= target) {
            j += 1;
        }
        let x = if j == vals.len() {
            x_max
        } else {
            (bp[j] + (target - cum[j]) / vals[j]).clamp(bp[j], bp[j + 1])
        };
        positions.push(x);
    }
    positions.push(x_max);

    if let Some(i) = positions.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!(
            "atomization produced non-increasing positions at {i} (n = {n} too large for the data resolution?)"
        )));
    }
    Ok(AtomizationResult {
        k_n: split_index(&positions),
        positions,
        ell_n: 1.0 / n as f64,
        n,
    })
}

/// `max_i |∫_{x̄ᵢ}^{x̄ᵢ₊₁} ρ̄ − ℓ_n|`
pub fn verify_equal_mass(initial: &PiecewiseConstantDensity, result: &AtomizationResult) -> f64 {
    result
        .positions
        .windows(2)
        .map(|w| (initial.mass_between(w[0], w[1]) - result.ell_n).abs())
        .fold(0.0, f64::max)
}

/// `Rᵢ(0)` evaluated as the mean of `ρ̄` over `[x̄ᵢ, x̄ᵢ₊₁]`.
///
/// Equal to `ℓ_n / (x̄ᵢ₊₁ − x̄ᵢ)` in exact arithmetic; inside a constant piece
/// the mean reproduces the piece value without the rounding of the spacing.
pub fn mean_value_ratios(initial: &PiecewiseConstantDensity, positions: &[f64]) -> Vec<f64> {
    positions
        .windows(2)
        .map(|w| initial.mass_between(w[0], w[1]) / (w[1] - w[0]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_quantiles() {
        let d = PiecewiseConstantDensity::block(0.0, 1.0, 1.0).unwrap();
        let a = atomize(&d, 4).unwrap();
        assert_eq!(a.positions, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(a.ell_n, 0.25);
        assert_eq!(verify_equal_mass(&d, &a), 0.0);
    }

    #[test]
    fn rescaled_block() {
        let d = PiecewiseConstantDensity::block(0.0, 0.5, 2.0).unwrap();
        assert_eq!(atomize(&d, 2).unwrap().positions, vec![0.0, 0.25, 0.5]);
    }

    #[test]
    fn gap_takes_left_plateau_edge() {
        let d =
            PiecewiseConstantDensity::new(vec![0.0, 0.5, 1.5, 2.0], vec![1.0, 0.0, 1.0]).unwrap();
        let a = atomize(&d, 2).unwrap();
        assert_eq!(a.positions, vec![0.0, 0.5, 2.0]);
        assert_eq!(verify_equal_mass(&d, &a), 0.0);
    }

    #[test]
    fn symmetric_split_hits_origin_exactly() {
        let d = PiecewiseConstantDensity::block(-0.5, 0.5, 1.0).unwrap();
        let a = atomize(&d, 2).unwrap();
        assert_eq!(a.positions, vec![-0.5, 0.0, 0.5]);
        assert_eq!(a.k_n, Some(1));
    }

    #[test]
    fn k_n_undefined_for_positive_support() {
        let d = PiecewiseConstantDensity::block(1.0, 2.0, 1.0).unwrap();
        assert_eq!(atomize(&d, 4).unwrap().k_n, None);
    }

    #[test]
    fn mean_value_ratios_are_exact_on_blocks() {
        let d = PiecewiseConstantDensity::block(0.0, 1.0, 1.0).unwrap();
        for n in [3, 100, 400, 1000] {
            let a = atomize(&d, n).unwrap();
            assert!(mean_value_ratios(&d, &a.positions)
                .iter()
                .all(|&r| r == 1.0));
        }
    }

    #[test]
    fn errors() {
        let d = PiecewiseConstantDensity::block(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(atomize(&d, 1), Err(Error::InvalidInput(_))));
        let heavy = PiecewiseConstantDensity::block(0.0, 1.0, 1.0 + 1e-9).unwrap();
        assert!(matches!(
            atomize(&heavy, 4),
            Err(Error::Normalization { .. })
        ));
        let nearly = PiecewiseConstantDensity::block(0.0, 1.0, 1.0 + 1e-11).unwrap();
        assert!(atomize(&nearly, 4).is_ok());
    }
}
