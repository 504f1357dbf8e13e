//! Stable laws `S_α(dispersion, β, location)`.
//!
//! Parameters are stored in the dispersion form: `dispersion = σ^α`, so that
//! scaling a variable by `c` multiplies the dispersion by `c^α` and the Lévy
//! motion marginal `L(t)` is simply `S_α(t, β, 0)`. The three characteristic
//! function branches are
//!
//! ```text
//! α ∉ {1, 2}: φ(t) = exp(−d|t|^α (1 − iβ sgn(t) tan(πα/2)) + iμt)
//! α = 1     : φ(t) = exp(−d|t| (1 + iβ sgn(t) (2/π) log|t|) + iμt)
//! α = 2     : φ(t) = exp(−d t²/2 + iμt)
//! ```
//!
//! At `α = 2` the dispersion is therefore the variance, and `S₂(1, β, 0)` is the
//! standard normal law; `β` has no effect there.

mod cdf;
mod sample;

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gamma;

pub use cdf::cdf;
pub use sample::{sample, StableSampler};

/// Value of a characteristic function.
pub type ComplexValue = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStableParams")]
pub struct StableParams {
    alpha: f64,
    beta: f64,
    dispersion: f64,
    location: f64,
}

#[derive(Deserialize)]
struct RawStableParams {
    alpha: f64,
    beta: f64,
    dispersion: f64,
    location: f64,
}

impl TryFrom<RawStableParams> for StableParams {
    type Error = Error;

    fn try_from(r: RawStableParams) -> Result<Self> {
        StableParams::new(r.alpha, r.beta, r.dispersion, r.location)
    }
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, dispersion: f64, location: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid("alpha", format!("{alpha} is outside (0, 2]")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::invalid("beta", format!("{beta} is outside [-1, 1]")));
        }
        if !(dispersion > 0.0 && dispersion.is_finite()) {
            return Err(Error::invalid(
                "dispersion",
                format!("{dispersion} must be positive and finite"),
            ));
        }
        if !location.is_finite() {
            return Err(Error::NonFinite {
                name: "location",
                value: location,
            });
        }
        Ok(Self {
            alpha,
            beta,
            dispersion,
            location,
        })
    }

    /// `S_α(1, β, 0)`.
    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, 0.0)
    }

    /// `N(mean, variance)` as an `α = 2` law.
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::new(2.0, 0.0, variance, mean)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    /// `σ = dispersion^{1/α}`; the standard deviation at `α = 2`.
    pub fn scale(&self) -> f64 {
        self.dispersion.powf(self.alpha.recip())
    }

    pub fn is_gaussian(&self) -> bool {
        self.alpha == 2.0
    }

    pub fn is_cauchy_branch(&self) -> bool {
        self.alpha == 1.0
    }

    /// Map a point `x` of this law onto the standard law `S_α(1, β, 0)`.
    pub(crate) fn standardize(&self, x: f64) -> f64 {
        let sigma = self.scale();
        if self.is_cauchy_branch() {
            (x - self.location - FRAC_2_PI * self.beta * sigma * sigma.ln()) / sigma
        } else {
            (x - self.location) / sigma
        }
    }
}

/// Characteristic function `E exp(itX)` of `X ~ params`.
pub fn char_fn(params: &StableParams, t: f64) -> Result<ComplexValue> {
    if !t.is_finite() {
        return Err(Error::NonFinite { name: "t", value: t });
    }
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let StableParams {
        alpha,
        beta,
        dispersion: d,
        location: mu,
    } = *params;
    let at = t.abs();
    let sgn = t.signum();
    let exponent = if alpha == 2.0 {
        Complex64::new(-0.5 * d * t * t, mu * t)
    } else if alpha == 1.0 {
        let mag = d * at;
        Complex64::new(-mag, -mag * beta * sgn * FRAC_2_PI * at.ln() + mu * t)
    } else {
        let mag = d * at.powf(alpha);
        Complex64::new(-mag, mag * beta * sgn * (0.5 * PI * alpha).tan() + mu * t)
    };
    Ok(exponent.exp())
}

/// Parameters of `cX + d` for `X ~ params` and `c > 0`.
///
/// At `α = 1` with `β ≠ 0` the location picks up the `−(2/π)βcσ log c` drift
/// generated by the logarithm in the characteristic function; everywhere else
/// the map is `dispersion ← c^α dispersion`, `location ← c·location + d`.
pub fn scale_shift(params: &StableParams, c: f64, d: f64) -> Result<StableParams> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("scale factor {c} must be positive")));
    }
    if !d.is_finite() {
        return Err(Error::NonFinite { name: "d", value: d });
    }
    let alpha = params.alpha;
    let mut location = c * params.location + d;
    if alpha == 1.0 {
        location -= FRAC_2_PI * params.beta * c * params.dispersion * c.ln();
    }
    StableParams::new(alpha, params.beta, c.powf(alpha) * params.dispersion, location)
}

/// `Γ(α+1)^{1/α}`, the scale factor relating `∫₀ᵗ L(x)/x dx` to `L(t)`.
pub fn limit_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::invalid("alpha", format!("{alpha} is outside (1, 2]")));
    }
    Ok(gamma(alpha + 1.0).powf(alpha.recip()))
}
