use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use rand::RngCore;

use super::StableParams;
use crate::error::{Error, Result};
use crate::rng::{exp1, open01, SeedStream};

/// Exact sampler for one stable law (Chambers–Mallows–Stuck).
///
/// Constants depending only on the parameters are computed once; each draw
/// consumes two uniforms.
#[derive(Clone, Copy, Debug)]
pub struct StableSampler {
    params: StableParams,
    kind: Kind,
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    // Box–Muller; `sd` is the standard deviation.
    Gaussian { sd: f64 },
    Cauchy { sigma: f64, drift: f64 },
    General { sigma: f64, shift: f64, factor: f64 },
}

impl StableSampler {
    pub fn new(params: StableParams) -> Self {
        let alpha = params.alpha();
        let beta = params.beta();
        let sigma = params.scale();
        let kind = if alpha == 2.0 {
            Kind::Gaussian { sd: sigma }
        } else if alpha == 1.0 {
            Kind::Cauchy {
                sigma,
                drift: FRAC_2_PI * beta * sigma * sigma.ln(),
            }
        } else {
            let zeta = beta * (FRAC_PI_2 * alpha).tan();
            Kind::General {
                sigma,
                shift: zeta.atan() / alpha,
                factor: (1.0 + zeta * zeta).powf(0.5 / alpha),
            }
        };
        Self { params, kind }
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    #[inline]
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let mu = self.params.location();
        match self.kind {
            Kind::Gaussian { sd } => {
                let r = (-2.0 * open01(rng).ln()).sqrt();
                mu + sd * r * (2.0 * PI * open01(rng)).cos()
            }
            Kind::Cauchy { sigma, drift } => {
                let beta = self.params.beta();
                let v = PI * (open01(rng) - 0.5);
                let w = exp1(rng);
                let lever = FRAC_PI_2 + beta * v;
                let z = FRAC_2_PI * (lever * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / lever).ln());
                mu + sigma * z + drift
            }
            Kind::General { sigma, shift, factor } => {
                let alpha = self.params.alpha();
                let v = PI * (open01(rng) - 0.5);
                let w = exp1(rng);
                let arg = alpha * (v + shift);
                let z = factor * arg.sin() / v.cos().powf(alpha.recip())
                    * ((v - arg).cos() / w).powf((1.0 - alpha) / alpha);
                mu + sigma * z
            }
        }
    }

    pub fn fill<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out {
            *x = self.draw(rng);
        }
    }
}

/// `n` i.i.d. draws from `params`, reproducible from `stream`.
pub fn sample(params: &StableParams, stream: &SeedStream, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "sample size must be at least 1"));
    }
    let sampler = StableSampler::new(*params);
    let mut rng = stream.rng();
    let mut out = vec![0.0; n];
    sampler.fill(&mut rng, &mut out);
    Ok(out)
}
