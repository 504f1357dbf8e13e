//! Empirical distribution functions and Kolmogorov–Smirnov statistics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-continuous empirical CDF.
#[derive(Clone, Debug)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("samples", "need at least one sample"));
        }
        if let Some(&bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite { name: "samples", value: bad });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Empirical quantile (lower inverse of the ECDF).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series converges fast for small λ.
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=6)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-m * m * c).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut q = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            q += if k % 2 == 1 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * q).clamp(0.0, 1.0)
    }
}

fn p_value(d: f64, effective_n: f64) -> f64 {
    let sn = effective_n.sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Two-sample KS statistic `sup |F_a − F_b|` with its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = Ecdf::new(a)?;
    let b = Ecdf::new(b)?;
    let (xa, xb) = (a.sorted(), b.sorted());
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: p_value(d, ne),
    })
}

/// One-sample KS statistic of `samples` against a continuous CDF.
pub fn ks_one_sample<F>(samples: &[f64], cdf: F) -> Result<KsResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let e = Ecdf::new(samples)?;
    let xs = e.sorted();
    let n = xs.len() as f64;
    let fs: Vec<f64> = xs.par_iter().map(|&x| cdf(x)).collect::<Result<_>>()?;
    let d = fs
        .iter()
        .enumerate()
        .map(|(i, &f)| (((i + 1) as f64 / n) - f).max(f - i as f64 / n))
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic: d,
        p_value: p_value(d, n),
    })
}

/// `(1/N) Σ exp(i t x_j)`.
pub fn empirical_char_fn(samples: &[f64], t: f64) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let (mut re, mut im) = (0.0, 0.0);
    for &x in samples {
        let (s, c) = (t * x).sin_cos();
        re += c;
        im += s;
    }
    let n = samples.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}
