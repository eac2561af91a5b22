//! Exact solutions of `ρ_t + (v_max ρ (1 − ρ/ρ_ref))_x = 0`.

use serde::{Deserialize, Serialize};

use crate::model::PiecewiseConstantDensity;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LwrRiemann {
    pub v_max: f64,
    pub rho_ref: f64,
}

impl LwrRiemann {
    pub fn new(v_max: f64, rho_ref: f64) -> Result<Self> {
        if !(v_max > 0.0 && rho_ref > 0.0 && v_max.is_finite() && rho_ref.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "LWR flux needs positive v_max and rho_ref, got {v_max}, {rho_ref}"
            )));
        }
        Ok(Self { v_max, rho_ref })
    }

    pub fn flux(&self, rho: f64) -> f64 {
        self.v_max * rho * (1.0 - rho / self.rho_ref)
    }

    /// `f′(ρ)`
    pub fn char_speed(&self, rho: f64) -> f64 {
        self.v_max * (1.0 - 2.0 * rho / self.rho_ref)
    }

    /// Inverse of `f′` on the fan.
    fn fan(&self, xi: f64) -> f64 {
        0.5 * self.rho_ref * (1.0 - xi / self.v_max)
    }

    fn check(&self, rho: f64) -> Result<()> {
        if (0.0..=self.rho_ref).contains(&rho) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "Riemann state",
                value: rho,
            })
        }
    }

    /// Rankine–Hugoniot speed of the jump `a → b`.
    pub fn shock_speed(&self, a: f64, b: f64) -> f64 {
        self.v_max * (1.0 - (a + b) / self.rho_ref)
    }

    /// Self-similar solution at `ξ = x/t`.
    pub fn solve(&self, rho_left: f64, rho_right: f64, xi: f64) -> Result<f64> {
        self.check(rho_left)?;
        self.check(rho_right)?;
        Ok(if rho_left == rho_right {
            rho_left
        } else if rho_left < rho_right {
            if xi < self.shock_speed(rho_left, rho_right) {
                rho_left
            } else {
                rho_right
            }
        } else {
            let (lo, hi) = (self.char_speed(rho_left), self.char_speed(rho_right));
            if xi <= lo {
                rho_left
            } else if xi >= hi {
                rho_right
            } else {
                self.fan(xi)
            }
        })
    }
}

/// `ρ_ref`-normalized exact Riemann solution.
pub fn exact_lwr_riemann(rho_left: f64, rho_right: f64, x_over_t: f64) -> Result<f64> {
    LwrRiemann::new(1.0, 1.0)?.solve(rho_left, rho_right, x_over_t)
}

/// Piece of a piecewise linear profile: `value(x)` interpolates linearly on `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LinearPiece {
    x0: f64,
    x1: f64,
    v0: f64,
    v1: f64,
}

/// Exact solution for block data `h 𝟙_[a, b)` before the fan meets the shock.
///
/// The left edge is a shock of speed `v_max (1 − h/ρ_ref)`; the right edge
/// opens a fan between `f′(h)` and `v_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LwrBlock {
    pub flux: LwrRiemann,
    pub a: f64,
    pub b: f64,
    pub height: f64,
}

impl LwrBlock {
    pub fn new(flux: LwrRiemann, a: f64, b: f64, height: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidInput(format!("block [{a}, {b}) is empty")));
        }
        if !(height > 0.0 && height <= flux.rho_ref) {
            return Err(Error::Domain {
                what: "block height",
                value: height,
            });
        }
        Ok(Self { flux, a, b, height })
    }

    /// Time at which the fan reaches the shock.
    pub fn valid_until(&self) -> f64 {
        (self.b - self.a) * self.flux.rho_ref / (self.flux.v_max * self.height)
    }

    fn pieces(&self, t: f64) -> Result<Vec<LinearPiece>> {
        if !(t >= 0.0 && t <= self.valid_until() * (1.0 + 1e-12)) {
            return Err(Error::InvalidInput(format!(
                "block solution valid on [0, {}], asked for t = {t}",
                self.valid_until()
            )));
        }
        let h = self.height;
        let shock = self.a + self.flux.shock_speed(0.0, h) * t;
        let fan_tail = (self.b + self.flux.char_speed(h) * t).max(shock);
        let fan_head = self.b + self.flux.v_max * t;
        let mut pieces = vec![LinearPiece {
            x0: shock,
            x1: fan_tail,
            v0: h,
            v1: h,
        }];
        if fan_head > fan_tail {
            pieces.push(LinearPiece {
                x0: fan_tail,
                x1: fan_head,
                v0: self.flux.fan((fan_tail - self.b) / t),
                v1: 0.0,
            });
        }
        Ok(pieces)
    }

    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(if x >= self.a && x < self.b {
                self.height
            } else {
                0.0
            });
        }
        self.flux.check(0.0)?;
        let xi = |x: f64| (x - self.b) / t;
        let shock = self.a + self.flux.shock_speed(0.0, self.height) * t;
        if t > self.valid_until() * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "block solution valid on [0, {}], asked for t = {t}",
                self.valid_until()
            )));
        }
        if x < shock {
            return Ok(0.0);
        }
        self.flux.solve(self.height, 0.0, xi(x))
    }

    /// `∫_{x0}^{x1} ρ(x, t) dx`
    pub fn integral(&self, x0: f64, x1: f64, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for p in self.pieces(t)? {
            let (l, r) = (x0.max(p.x0), x1.min(p.x1));
            if r > l {
                let slope = if p.x1 > p.x0 {
                    (p.v1 - p.v0) / (p.x1 - p.x0)
                } else {
                    0.0
                };
                let vl = p.v0 + slope * (l - p.x0);
                let vr = p.v0 + slope * (r - p.x0);
                acc += 0.5 * (vl + vr) * (r - l);
            }
        }
        Ok(acc)
    }

    /// Exact `∫ |d − ρ(·, t)| dx` against a piecewise constant density.
    pub fn l1_to(&self, d: &PiecewiseConstantDensity, t: f64) -> Result<f64> {
        let pieces = self.pieces(t)?;
        let mut x: Vec<f64> = d.breakpoints().to_vec();
        for p in &pieces {
            x.extend([p.x0, p.x1]);
        }
        x.sort_by(f64::total_cmp);
        x.dedup();
        let exact_at = |p: &LinearPiece, y: f64| {
            if p.x1 > p.x0 {
                p.v0 + (p.v1 - p.v0) * (y - p.x0) / (p.x1 - p.x0)
            } else {
                p.v0
            }
        };
        let mut acc = 0.0;
        for w in x.windows(2) {
            let (l, r) = (w[0], w[1]);
            if !(r > l) {
                continue;
            }
            let mid = 0.5 * (l + r);
            let approx = d.value_at(mid);
            let (el, er) = match pieces.iter().find(|p| mid >= p.x0 && mid < p.x1) {
                Some(p) => (exact_at(p, l), exact_at(p, r)),
                None => (0.0, 0.0),
            };
            let (a, b) = (approx - el, approx - er);
            let mean = if a * b >= 0.0 {
                0.5 * (a.abs() + b.abs())
            } else {
                0.5 * (a * a + b * b) / (a.abs() + b.abs())
            };
            acc += mean * (r - l);
        }
        Ok(acc)
    }

    /// Exact cell averages on a uniform grid.
    pub fn project(
        &self,
        x_left: f64,
        dx: f64,
        m: usize,
        t: f64,
    ) -> Result<PiecewiseConstantDensity> {
        let values = (0..m)
            .map(|j| {
                let x0 = x_left + j as f64 * dx;
                self.integral(x0, x0 + dx, t).map(|mass| mass / dx)
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseConstantDensity::from_cells(x_left, dx, values)
    }
}
