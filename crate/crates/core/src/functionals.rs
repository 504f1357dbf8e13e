//! The functional statistic `(1/a_n) Σ_{k≤⌊nt⌋} (f(S_k/k) − f(μ))`, the
//! product-of-partial-sums statistic, the truncated Riemann integral of
//! `L(x)/x` and the stable law it converges to.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{cumulative_sums, floor_index, DoaSpec, SamplePath};
use crate::stable::{limit_constant, StableParams};

/// An interval `I` of the real line, possibly unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_closed: false,
        hi_closed: false,
    };

    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_closed: false,
        hi_closed: false,
    };

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below && x.is_finite()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Built-in choices of `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    /// `f(x) = μ log(x/μ)` on `(0, ∞)`, `f′(μ) = 1`.
    QiLog,
    /// `f(x) = x` on ℝ, `f′(μ) = 1`.
    Identity,
}

/// `f` on its interval `I`, together with `f′(μ)`.
#[derive(Clone)]
pub struct FunctionSpec {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    f_prime_at_mu: f64,
    domain: Interval,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("f_prime_at_mu", &self.f_prime_at_mu)
            .field("domain", &self.domain)
            .finish()
    }
}

impl FunctionSpec {
    pub fn qi_log(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("mu", format!("QiLog needs μ > 0, got {mu}")));
        }
        Ok(Self {
            name: "qi-log".into(),
            f: Arc::new(move |x: f64| mu * (x / mu).ln()),
            f_prime_at_mu: 1.0,
            domain: Interval::POSITIVE,
        })
    }

    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            f: Arc::new(|x| x),
            f_prime_at_mu: 1.0,
            domain: Interval::REAL_LINE,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime_at_mu: f64,
        domain: Interval,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            f_prime_at_mu,
            domain,
        }
    }

    pub fn from_kind(kind: FunctionKind, mu: f64) -> Result<Self> {
        match kind {
            FunctionKind::QiLog => Self::qi_log(mu),
            FunctionKind::Identity => Ok(Self::identity()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f_prime_at_mu(&self) -> f64 {
        self.f_prime_at_mu
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// Which exponent the product statistic uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentConvention {
    /// `μ / a_n`
    MuOverAn,
    /// `γ / √n` with `γ = μ/σ`; finite-variance families only.
    GammaOverSqrtN,
}

/// Everything needed to simulate the functional statistic of one family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalConfig {
    pub spec: DoaSpec,
    pub function: FunctionKind,
    pub n: usize,
    pub grid: usize,
    pub gamma: Option<f64>,
    pub exponent: ExponentConvention,
}

impl FunctionalConfig {
    pub fn new(spec: DoaSpec, function: FunctionKind, n: usize, grid: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "n must be at least 1"));
        }
        if grid == 0 {
            return Err(Error::invalid("grid", "grid must be at least 1"));
        }
        Ok(Self {
            spec,
            function,
            n,
            grid,
            gamma: None,
            exponent: ExponentConvention::MuOverAn,
        })
    }

    /// Use the `γ/√n` exponent with `γ = μ/σ`.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("{gamma} must be positive")));
        }
        self.gamma = Some(gamma);
        self.exponent = ExponentConvention::GammaOverSqrtN;
        Ok(self)
    }

    /// The product-statistic exponent for this configuration.
    pub fn exponent_value(&self, a_n: f64) -> Result<f64> {
        match self.exponent {
            ExponentConvention::MuOverAn => Ok(self.spec.mu() / a_n),
            ExponentConvention::GammaOverSqrtN => {
                let gamma = self
                    .gamma
                    .ok_or_else(|| Error::invalid("gamma", "γ/√n convention selected without γ"))?;
                Ok(gamma / (self.n as f64).sqrt())
            }
        }
    }
}

/// Path `t ↦ (1/a_n) Σ_{k=1}^{⌊nt⌋} (f(S_k/k) − f(μ))` on the grid `j/m`,
/// from increments `x`.
pub fn functional_statistic(x: &[f64], f: &FunctionSpec, mu: f64, a_n: f64, grid: usize) -> Result<SamplePath> {
    functional_statistic_from_sums(&cumulative_sums(x), f, mu, a_n, grid)
}

/// As [`functional_statistic`], from partial sums `S_1..S_n` of any sequence.
pub fn functional_statistic_from_sums(sums: &[f64], f: &FunctionSpec, mu: f64, a_n: f64, grid: usize) -> Result<SamplePath> {
    if sums.is_empty() {
        return Err(Error::invalid("x", "sequence must be nonempty"));
    }
    if !(a_n > 0.0 && a_n.is_finite()) {
        return Err(Error::invalid("a_n", format!("{a_n} must be positive")));
    }
    if grid == 0 {
        return Err(Error::invalid("grid", "grid must be at least 1"));
    }
    let f_mu = f.eval(mu);
    let mut cum = Vec::with_capacity(sums.len() + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for (i, &s) in sums.iter().enumerate() {
        let k = i + 1;
        let avg = s / k as f64;
        if !f.domain.contains(avg) {
            return Err(Error::Domain {
                k,
                value: avg,
                domain: f.domain.to_string(),
            });
        }
        acc += f.eval(avg) - f_mu;
        cum.push(acc);
    }
    let n = sums.len();
    let values = (0..=grid).map(|j| cum[floor_index(n, j, grid)] / a_n).collect();
    SamplePath::uniform(values)
}

/// `exponent · Σ_{k=1}^n log(S_k/(kμ))`, the logarithm of the product statistic.
pub fn log_product_statistic(x: &[f64], mu: f64, exponent: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid("mu", format!("{mu} must be positive")));
    }
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(Error::invalid("exponent", format!("{exponent} must be positive")));
    }
    if x.is_empty() {
        return Err(Error::invalid("x", "sequence must be nonempty"));
    }
    let mut s = 0.0;
    let mut acc = 0.0;
    for (i, &v) in x.iter().enumerate() {
        s += v;
        let k = i + 1;
        if s.is_nan() || s <= 0.0 {
            return Err(Error::NonPositive { k, value: s });
        }
        acc += (s / (k as f64 * mu)).ln();
    }
    Ok(exponent * acc)
}

/// `(∏_{k=1}^n S_k/(kμ))^{exponent}`, evaluated in log space.
pub fn product_statistic(x: &[f64], mu: f64, exponent: f64) -> Result<f64> {
    log_product_statistic(x, mu, exponent).map(f64::exp)
}

/// Right-endpoint Riemann sum of `path(x)/x` over `(eps, t]`.
///
/// The breakpoints are the grid times inside `(eps, t)` plus `eps` and `t`
/// themselves, so for grid-aligned `eps` and `t` this is exactly
/// `Σ (x_j − x_{j−1}) path(x_j)/x_j`. The omitted head `∫₀^eps` is small
/// because `|L(x)| ≤ C x^γ` near zero for every `γ < 1/α`.
pub fn integral_riemann(path: &SamplePath, t: f64, eps: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid("t", format!("{t} is outside (0, 1]")));
    }
    if !(eps > 0.0 && eps < t) {
        return Err(Error::invalid("eps", format!("need 0 < eps < t, got eps = {eps}, t = {t}")));
    }
    let times = path.times();
    let values = path.values();
    let start = times.partition_point(|&s| s <= eps);
    let mut prev = eps;
    let mut total = 0.0;
    for j in start..times.len() {
        let x = times[j];
        if x >= t {
            break;
        }
        total += (x - prev) * values[j] / x;
        prev = x;
    }
    total += (t - prev) * path.eval(t)? / t;
    Ok(total)
}

/// Law of `f′(μ) ∫₀ᵗ L(x)/x dx = f′(μ) Γ(α+1)^{1/α} S_α(t, β, 0)`.
pub fn limit_law(alpha: f64, beta: f64, t: f64, f_prime: f64) -> Result<StableParams> {
    let c = limit_constant(alpha)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid("t", format!("{t} is outside (0, 1]")));
    }
    if f_prime == 0.0 || !f_prime.is_finite() {
        return Err(Error::invalid(
            "f_prime",
            format!("f′(μ) = {f_prime} gives a degenerate limit, which has no stable representation"),
        ));
    }
    let dispersion = (f_prime.abs() * c).powf(alpha) * t;
    StableParams::new(alpha, beta * f_prime.signum(), dispersion, 0.0)
}
