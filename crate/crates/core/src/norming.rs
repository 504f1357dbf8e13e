//! Centering `b_n = nμ` and scaling `a_n = n^{1/α} L(n)` per family, plus the
//! sums behind the bound `Σ_{k≤n} E|S_k − kμ|/k = O(a_n)`.
//!
//! Registered scaling sequences:
//!
//! | family                     | `a_n`                                   |
//! |----------------------------|-----------------------------------------|
//! | finite variance `σ²`       | `σ √n`                                  |
//! | exact stable `S_α(d,β,μ)`  | `(d n)^{1/α}`                           |
//! | Pareto tail `c x^{−α}`, α<2 | `(c n / C_α)^{1/α}`                    |
//! | Pareto tail `c x^{−2}`     | `√c · √(n (1 + ln n))`                  |
//!
//! with `C_α = (1 − α)/(Γ(2 − α) cos(πα/2))`, the tail constant of
//! `S_α(1, β, 0)`: `P(|Z| > x) ~ C_α x^{−α}`.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gamma;
use crate::paths::{DoaSpec, Family};
use crate::rng::SeedStream;

/// `C_α` such that `P(|Z| > x) ~ C_α x^{−α}` for `Z ~ S_α(1, β, 0)`, `α ∈ (1, 2)`.
pub fn stable_tail_constant(alpha: f64) -> f64 {
    (1.0 - alpha) / (gamma(2.0 - alpha) * (FRAC_PI_2 * alpha).cos())
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Rule {
    /// `coef · n^{exponent}`
    Power { coef: f64, exponent: f64 },
    /// `coef · √(n (1 + ln n))`
    SqrtNLogN { coef: f64 },
}

impl Rule {
    fn eval(&self, n: u64) -> f64 {
        let n = n as f64;
        match *self {
            Rule::Power { coef, exponent } => coef * n.powf(exponent),
            Rule::SqrtNLogN { coef } => coef * (n * (1.0 + n.ln())).sqrt(),
        }
    }
}

fn registered_rule(spec: &DoaSpec) -> Result<Rule> {
    let power = |coef: f64, alpha: f64| Rule::Power {
        coef,
        exponent: alpha.recip(),
    };
    let rule = match *spec.family() {
        Family::Exponential { rate } => power(rate.recip(), 2.0),
        Family::ExactStable { params } => power(params.scale(), params.alpha()),
        Family::Pareto {
            tail_index, scale, ..
        } => heavy_tail_rule(tail_index, scale.powf(tail_index), || {
            tail_index * scale * scale / ((tail_index - 1.0).powi(2) * (tail_index - 2.0))
        }),
        Family::TwoSidedPareto { tail_index, .. } => {
            let mu = spec.mu();
            heavy_tail_rule(tail_index, 1.0, || tail_index / (tail_index - 2.0) - mu * mu)
        }
        Family::Constant { .. } => return Err(Error::NoNormingFormula(spec.family().name().into())),
    };
    Ok(rule)
}

// Tail `P(|X| > x) ~ c x^{−α}`; `variance` is only called when α > 2.
fn heavy_tail_rule(alpha: f64, c: f64, variance: impl Fn() -> f64) -> Rule {
    if alpha < 2.0 {
        Rule::Power {
            coef: (c / stable_tail_constant(alpha)).powf(alpha.recip()),
            exponent: alpha.recip(),
        }
    } else if alpha == 2.0 {
        Rule::SqrtNLogN { coef: c.sqrt() }
    } else {
        Rule::Power {
            coef: variance().sqrt(),
            exponent: 0.5,
        }
    }
}

/// `(a_n, b_n)` for the registered family of `spec`.
pub fn norming_sequence(spec: &DoaSpec, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("n", "n must be at least 1"));
    }
    let rule = registered_rule(spec)?;
    Ok((rule.eval(n), n as f64 * spec.mu()))
}

type ScaleFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// A norming sequence bound to its distribution.
#[derive(Clone)]
pub struct NormingSeq {
    spec: DoaSpec,
    label: String,
    scale: ScaleFn,
}

impl std::fmt::Debug for NormingSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormingSeq")
            .field("spec", &self.spec)
            .field("label", &self.label)
            .finish()
    }
}

impl NormingSeq {
    pub fn registered(spec: DoaSpec) -> Result<Self> {
        let rule = registered_rule(&spec)?;
        Ok(Self {
            spec,
            label: spec.family().name().to_string(),
            scale: Arc::new(move |n| rule.eval(n)),
        })
    }

    pub fn custom(spec: DoaSpec, label: impl Into<String>, scale: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            spec,
            label: label.into(),
            scale: Arc::new(scale),
        }
    }

    /// `a_n · n^{power}`; a deliberately wrong growth rate for negative controls.
    pub fn with_power_adjustment(&self, power: f64) -> Self {
        let inner = self.scale.clone();
        Self {
            spec: self.spec,
            label: format!("{}*n^{power}", self.label),
            scale: Arc::new(move |n| inner(n) * (n as f64).powf(power)),
        }
    }

    pub fn spec(&self) -> &DoaSpec {
        &self.spec
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn a(&self, n: u64) -> f64 {
        (self.scale)(n)
    }

    pub fn b(&self, n: u64) -> f64 {
        n as f64 * self.spec.mu()
    }

    /// CSV rows `n,a_n,b_n,family` for each `n`.
    pub fn write_table<W: Write>(&self, mut w: W, ns: &[u64]) -> Result<()> {
        writeln!(w, "n,a_n,b_n,family")?;
        for &n in ns {
            writeln!(w, "{n},{},{},{}", self.a(n), self.b(n), self.label)?;
        }
        Ok(())
    }
}

/// `Σ_{k=1}^n a_k / k` by direct summation.
pub fn karamata_partial_sum(a: &NormingSeq, n: u64) -> f64 {
    (1..=n).map(|k| a.a(k) / k as f64).sum()
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps: u64,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            reps: xs.len() as u64,
        }
    }

    /// `mean ± z·se`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_error, self.mean + z * self.std_error)
    }
}

/// Monte Carlo estimate of `E|S_k − kμ|`.
pub fn mean_abs_deviation(spec: &DoaSpec, k: u64, reps: u64, stream: &SeedStream) -> Result<McEstimate> {
    if reps == 0 {
        return Err(Error::invalid("reps", "need at least one replicate"));
    }
    if k == 0 {
        return Err(Error::invalid("k", "k must be at least 1"));
    }
    let mu = spec.mu();
    let devs: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.split(r).rng();
            let mut buf = vec![0.0; k as usize];
            spec.fill(&mut rng, &mut buf);
            (buf.iter().sum::<f64>() - k as f64 * mu).abs()
        })
        .collect();
    Ok(McEstimate::from_samples(&devs))
}

/// The normalised sum `Σ_{k≤n} Ê|S_k − kμ|/k / a_n` at one `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaPoint {
    pub n: u64,
    pub a_n: f64,
    pub sum: McEstimate,
    pub ratio: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

/// Estimates `Σ_{k≤n} E|S_k − kμ|/k` for every `n` in `ns` from `reps` paths
/// of length `max(ns)`. Confidence limits are `±z` standard errors.
pub fn lemma_profile(norming: &NormingSeq, ns: &[u64], reps: u64, z: f64, stream: &SeedStream) -> Result<Vec<LemmaPoint>> {
    if reps == 0 {
        return Err(Error::invalid("reps", "need at least one replicate"));
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::invalid("ns", "need a nonempty list of positive sizes"));
    }
    let mut sorted = ns.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let n_max = *sorted.last().unwrap();
    let spec = *norming.spec();
    let mu = spec.mu();

    let per_rep: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.split(r).rng();
            let mut out = Vec::with_capacity(sorted.len());
            let (mut s, mut acc) = (0.0, 0.0);
            let mut next = 0;
            let stable = None;
            for k in 1..=n_max {
                s += spec.draw(&mut rng, stable);
                acc += (s - k as f64 * mu).abs() / k as f64;
                if k == sorted[next] {
                    out.push(acc);
                    next += 1;
                }
            }
            out
        })
        .collect();

    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let xs: Vec<f64> = per_rep.iter().map(|v| v[i]).collect();
            let sum = McEstimate::from_samples(&xs);
            let a_n = norming.a(n);
            let (lo, hi) = sum.interval(z);
            LemmaPoint {
                n,
                a_n,
                sum,
                ratio: sum.mean / a_n,
                ratio_lower: lo.max(0.0) / a_n,
                ratio_upper: hi / a_n,
            }
        })
        .collect())
}
