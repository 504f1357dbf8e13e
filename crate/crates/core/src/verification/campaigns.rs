use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{samples_csv, Artifact, CampaignOutcome, Check, Direction, VerificationReport};
use super::stats::{empirical_char_fn, ks_one_sample, ks_two_sample};
use crate::error::{Error, Result};
use crate::functionals::{
    functional_statistic_from_sums, integral_riemann, limit_law, log_product_statistic, ExponentConvention,
    FunctionSpec, FunctionalConfig,
};
use crate::norming::{lemma_profile, LemmaPoint, NormingSeq};
use crate::paths::{levy_path_with, levy_sampler, sample_doa, DoaSpec, Family, IidSource, SequenceSource};
use crate::rng::SeedStream;
use crate::stable::{cdf, char_fn, sample, StableParams};

/// KS threshold for the Riemann-integral and functional-statistic campaigns.
pub const KS_THRESHOLD: f64 = 0.04;
/// KS threshold for the product statistic in an `α < 2` domain.
pub const HEAVY_TAIL_KS_THRESHOLD: f64 = 0.07;
/// Sup-norm threshold between empirical and analytic characteristic functions.
pub const SAMPLER_THRESHOLD: f64 = 5e-3;
/// Allowed spread of the normalised Lemma sums relative to the largest `n`.
pub const LEMMA_BAND_FACTOR: f64 = 2.0;
/// Allowed growth of the normalised Lemma sum over the top decade.
pub const LEMMA_GROWTH_LIMIT: f64 = 1.25;
/// Confidence multiplier for Monte Carlo intervals (95%).
pub const CI_Z: f64 = 1.96;

/// The deliberately wrong null used by every negative control.
///
/// Gaussian limits lose the `Γ(α+1)^{1/α}` factor (so `N(0, 2t)` becomes
/// `N(0, t)`); skewed stable limits are reflected (`β → −β`); symmetric
/// non-Gaussian limits lose the constant as in the Gaussian case.
pub fn misspecified_null(law: &StableParams) -> StableParams {
    let alpha = law.alpha();
    if alpha < 2.0 && law.beta() != 0.0 {
        StableParams::new(alpha, -law.beta(), law.dispersion(), law.location()).expect("reflection stays valid")
    } else {
        let g = crate::numerics::gamma(alpha + 1.0);
        StableParams::new(alpha, law.beta(), law.dispersion() / g, law.location()).expect("positive dispersion")
    }
}

fn two_sample_check(name: &str, samples: &[f64], reference: &[f64], null: StableParams, threshold: f64) -> Result<Check> {
    let ks = ks_two_sample(samples, reference)?;
    Ok(Check::new(name, ks.statistic, threshold, Direction::AtMost)
        .with_p_value(ks.p_value)
        .with_null(null))
}

fn one_sample_check(name: &str, samples: &[f64], null: StableParams, threshold: f64) -> Result<Check> {
    let ks = ks_one_sample(samples, |x| cdf(&null, x))?;
    Ok(Check::new(name, ks.statistic, threshold, Direction::AtMost)
        .with_p_value(ks.p_value)
        .with_null(null))
}

fn law_json(law: &StableParams) -> Result<String> {
    let mut s = serde_json::to_string_pretty(law)?;
    s.push('\n');
    Ok(s)
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        Err(Error::Config("reps must be at least 1".into()))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Riemann-integral identity

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkCampaign {
    pub alpha: f64,
    pub beta: f64,
    pub reps: usize,
    pub grid: usize,
    pub eps: f64,
    pub seed: u64,
    pub threshold: f64,
}

impl RemarkCampaign {
    pub fn new(alpha: f64, beta: f64, reps: usize, grid: usize, seed: u64) -> Self {
        Self {
            alpha,
            beta,
            reps,
            grid,
            eps: 1.0 / grid.max(1) as f64,
            seed,
            threshold: KS_THRESHOLD,
        }
    }
}

/// `reps` truncated Riemann integrals `∫_eps^1 L(x)/x dx` of simulated Lévy paths.
pub fn riemann_integrals(alpha: f64, beta: f64, grid: usize, eps: f64, reps: usize, stream: &SeedStream) -> Result<Vec<f64>> {
    let increments = levy_sampler(alpha, beta, grid)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let path = levy_path_with(&increments, &mut stream.split(r).rng(), grid);
            integral_riemann(&path, 1.0, eps)
        })
        .collect()
}

/// Riemann integrals of simulated `(α, β)` Lévy paths against direct draws of
/// `Γ(α+1)^{1/α} S_α(1, β, 0)`.
pub fn verify_remark(c: &RemarkCampaign) -> Result<CampaignOutcome> {
    let law = limit_law(c.alpha, c.beta, 1.0, 1.0)?;
    verify_remark_against(c, law)
}

/// As [`verify_remark`] with an explicit null law.
pub fn verify_remark_against(c: &RemarkCampaign, null: StableParams) -> Result<CampaignOutcome> {
    check_reps(c.reps)?;
    let root = SeedStream::new(c.seed);
    let stats = riemann_integrals(c.alpha, c.beta, c.grid, c.eps, c.reps, &root.split_named("paths"))?;
    let reference = sample(&null, &root.split_named("reference"), c.reps)?;
    let control_law = misspecified_null(&null);
    let control_reference = sample(&control_law, &root.split_named("control-reference"), c.reps)?;

    let check = two_sample_check("riemann-integral", &stats, &reference, null, c.threshold)?
        .at(1.0)
        .with_samples("statistic.csv")
        .with_reference("reference.csv");
    let control = two_sample_check("control", &stats, &control_reference, control_law, c.threshold)?
        .at(1.0)
        .with_samples("statistic.csv")
        .with_reference("control_reference.csv");

    let artifacts = vec![
        Artifact {
            name: "statistic.csv".into(),
            contents: samples_csv(stats.iter().enumerate().map(|(r, &v)| (r, 1.0, v))),
        },
        Artifact {
            name: "reference.csv".into(),
            contents: samples_csv(reference.iter().enumerate().map(|(r, &v)| (r, 1.0, v))),
        },
        Artifact {
            name: "control_reference.csv".into(),
            contents: samples_csv(control_reference.iter().enumerate().map(|(r, &v)| (r, 1.0, v))),
        },
        Artifact {
            name: "limit_law.json".into(),
            contents: law_json(&null)?,
        },
    ];
    let details = json!({
        "alpha": c.alpha,
        "beta": c.beta,
        "grid": c.grid,
        "eps": c.eps,
        "limit_law": null,
        "control_law": control_law,
    });
    let names = artifacts.iter().map(|a| a.name.clone()).collect();
    Ok(CampaignOutcome {
        report: VerificationReport::assemble(
            "verify-remark",
            c.seed,
            c.grid as u64,
            c.reps as u64,
            vec![check],
            control,
            details,
            names,
        ),
        artifacts,
    })
}

// ---------------------------------------------------------------------------
// Functional statistic marginals

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcltCampaign {
    pub config: FunctionalConfig,
    pub times: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl FcltCampaign {
    pub fn new(config: FunctionalConfig, times: Vec<f64>, reps: usize, seed: u64) -> Self {
        Self {
            threshold: if config.spec.alpha() == 2.0 {
                KS_THRESHOLD
            } else {
                HEAVY_TAIL_KS_THRESHOLD
            },
            config,
            times,
            reps,
            seed,
        }
    }
}

/// Samples of the functional statistic at each of `times`; `out[i][r]` is
/// replicate `r` at `times[i]`.
pub fn functional_marginals(
    source: &dyn SequenceSource,
    f: &FunctionSpec,
    n: usize,
    grid: usize,
    times: &[f64],
    reps: usize,
    stream: &SeedStream,
) -> Result<Vec<Vec<f64>>> {
    let mu = source.mu();
    let a_n = source.norming(n)?;
    let per_rep: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let sums = source.partial_sums(&stream.split(r), n)?;
            let path = functional_statistic_from_sums(&sums, f, mu, a_n, grid)?;
            times.iter().map(|&t| path.eval(t)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len()).map(|i| per_rep.iter().map(|v| v[i]).collect()).collect())
}

pub fn verify_fclt(c: &FcltCampaign) -> Result<CampaignOutcome> {
    verify_fclt_with_source(c, &IidSource { spec: c.config.spec })
}

/// Marginal KS tests of the functional statistic built from any sequence
/// source against `f′(μ) Γ(α+1)^{1/α} S_α(t, β, 0)`.
pub fn verify_fclt_with_source(c: &FcltCampaign, source: &dyn SequenceSource) -> Result<CampaignOutcome> {
    check_reps(c.reps)?;
    if c.times.is_empty() || c.times.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Config(format!("times must be a nonempty list in (0, 1], got {:?}", c.times)));
    }
    let f = FunctionSpec::from_kind(c.config.function, source.mu())?;
    let root = SeedStream::new(c.seed);
    let marginals = functional_marginals(
        source,
        &f,
        c.config.n,
        c.config.grid,
        &c.times,
        c.reps,
        &root.split_named("paths"),
    )?;

    let mut checks = Vec::with_capacity(c.times.len());
    let mut laws = Vec::with_capacity(c.times.len());
    for (&t, xs) in c.times.iter().zip(&marginals) {
        let law = limit_law(source.alpha(), source.beta(), t, f.f_prime_at_mu())?;
        checks.push(
            one_sample_check(&format!("marginal t={t}"), xs, law, c.threshold)?
                .at(t)
                .with_samples("statistic.csv"),
        );
        laws.push(json!({ "t": t, "law": law }));
    }
    let (last_idx, &t_max) = c
        .times
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let control_law = misspecified_null(&limit_law(source.alpha(), source.beta(), t_max, f.f_prime_at_mu())?);
    let control = one_sample_check("control", &marginals[last_idx], control_law, c.threshold)?
        .at(t_max)
        .with_samples("statistic.csv");

    let rows = (0..c.reps).flat_map(|r| c.times.iter().enumerate().map(move |(i, &t)| (r, i, t)));
    let csv = samples_csv(rows.map(|(r, i, t)| (r, t, marginals[i][r])));
    let mut law_file = serde_json::to_string_pretty(&laws)?;
    law_file.push('\n');
    let artifacts = vec![
        Artifact {
            name: "statistic.csv".into(),
            contents: csv,
        },
        Artifact {
            name: "limit_law.json".into(),
            contents: law_file,
        },
    ];
    let details = json!({
        "function": f.name(),
        "f_prime_at_mu": f.f_prime_at_mu(),
        "mu": source.mu(),
        "a_n": source.norming(c.config.n)?,
        "alpha": source.alpha(),
        "beta": source.beta(),
        "times": c.times,
        "limit_laws": laws,
        "control_law": control_law,
    });
    let names = artifacts.iter().map(|a| a.name.clone()).collect();
    Ok(CampaignOutcome {
        report: VerificationReport::assemble(
            "verify-fclt",
            c.seed,
            c.config.n as u64,
            c.reps as u64,
            checks,
            control,
            details,
            names,
        ),
        artifacts,
    })
}

// ---------------------------------------------------------------------------
// Σ E|S_k − kμ|/k = O(a_n)

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCampaign {
    pub spec: DoaSpec,
    pub ns: Vec<u64>,
    pub reps: usize,
    pub seed: u64,
    pub band_factor: f64,
    pub growth_limit: f64,
}

impl LemmaCampaign {
    pub fn new(spec: DoaSpec, ns: Vec<u64>, reps: usize, seed: u64) -> Self {
        Self {
            spec,
            ns,
            reps,
            seed,
            band_factor: LEMMA_BAND_FACTOR,
            growth_limit: LEMMA_GROWTH_LIMIT,
        }
    }
}

/// Registered norming, or a nominal `√n` for the degenerate family.
fn lemma_norming(spec: &DoaSpec) -> Result<NormingSeq> {
    match spec.family() {
        Family::Constant { .. } => Ok(NormingSeq::custom(*spec, "nominal-sqrt", |n| (n as f64).sqrt())),
        _ => NormingSeq::registered(*spec),
    }
}

// Conservative spread: compares upper limits against lower limits.
fn band_statistic(points: &[LemmaPoint]) -> f64 {
    let top = points.last().expect("nonempty");
    points
        .iter()
        .map(|p| {
            let up = p.ratio_upper / top.ratio_lower;
            let down = top.ratio_upper / p.ratio_lower;
            let f = up.max(down);
            if p.ratio_upper == 0.0 && top.ratio_upper == 0.0 {
                1.0
            } else if f.is_nan() {
                f64::INFINITY
            } else {
                f
            }
        })
        .fold(1.0, f64::max)
}

fn growth_statistic(points: &[LemmaPoint]) -> f64 {
    if points.len() < 2 {
        return 1.0;
    }
    let top = &points[points.len() - 1];
    let prev = &points[points.len() - 2];
    if top.ratio_upper == 0.0 && prev.ratio_upper == 0.0 {
        return 1.0;
    }
    let g = top.ratio_upper / prev.ratio_lower;
    if g.is_nan() {
        f64::INFINITY
    } else {
        g
    }
}

fn rescale_points(points: &[LemmaPoint], norming: &NormingSeq) -> Vec<LemmaPoint> {
    points
        .iter()
        .map(|p| {
            let a_n = norming.a(p.n);
            let (lo, hi) = p.sum.interval(CI_Z);
            LemmaPoint {
                a_n,
                ratio: p.sum.mean / a_n,
                ratio_lower: lo.max(0.0) / a_n,
                ratio_upper: hi / a_n,
                ..*p
            }
        })
        .collect()
}

fn profile_csv(points: &[LemmaPoint]) -> String {
    let mut s = String::from("n,a_n,sum_mean,sum_se,ratio,ratio_lower,ratio_upper\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.n, p.a_n, p.sum.mean, p.sum.std_error, p.ratio, p.ratio_lower, p.ratio_upper
        ));
    }
    s
}

pub fn verify_lemma(c: &LemmaCampaign) -> Result<CampaignOutcome> {
    verify_lemma_with(c, &lemma_norming(&c.spec)?)
}

/// Boundedness of `Σ_{k≤n} Ê|S_k − kμ|/k / a_n` over `c.ns`, with the
/// norming deliberately understated by `n^{−1/4}` as the negative control.
pub fn verify_lemma_with(c: &LemmaCampaign, norming: &NormingSeq) -> Result<CampaignOutcome> {
    check_reps(c.reps)?;
    let root = SeedStream::new(c.seed);
    let points = lemma_profile(norming, &c.ns, c.reps as u64, CI_Z, &root.split_named("paths"))?;
    let band = Check::new("band", band_statistic(&points), c.band_factor, Direction::AtMost);
    let growth = Check::new("top-decade-growth", growth_statistic(&points), c.growth_limit, Direction::AtMost);

    let wrong = norming.with_power_adjustment(-0.25);
    let control_points = rescale_points(&points, &wrong);
    let control = Check::new("control", band_statistic(&control_points), c.band_factor, Direction::AtMost);

    let ns: Vec<u64> = points.iter().map(|p| p.n).collect();
    let mut table = Vec::new();
    norming.write_table(&mut table, &ns)?;
    let artifacts = vec![
        Artifact {
            name: "lemma_profile.csv".into(),
            contents: profile_csv(&points),
        },
        Artifact {
            name: "norming.csv".into(),
            contents: String::from_utf8(table).expect("ascii"),
        },
    ];
    let details = json!({
        "norming": norming.label(),
        "mu": c.spec.mu(),
        "alpha": c.spec.alpha(),
        "ci_z": CI_Z,
        "profile": points,
        "control_norming": wrong.label(),
        "control_profile": control_points,
    });
    let names = artifacts.iter().map(|a| a.name.clone()).collect();
    let n_max = points.last().map(|p| p.n).unwrap_or(0);
    Ok(CampaignOutcome {
        report: VerificationReport::assemble(
            "verify-lemma",
            c.seed,
            n_max,
            c.reps as u64,
            vec![band, growth],
            control,
            details,
            names,
        ),
        artifacts,
    })
}

// ---------------------------------------------------------------------------
// Product of partial sums

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCampaign {
    pub spec: DoaSpec,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Switches the exponent from `μ/a_n` to `γ/√n`.
    pub gamma: Option<f64>,
}

impl ProductCampaign {
    pub fn new(spec: DoaSpec, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            spec,
            n,
            reps,
            seed,
            threshold: if spec.alpha() == 2.0 {
                KS_THRESHOLD
            } else {
                HEAVY_TAIL_KS_THRESHOLD
            },
            gamma: None,
        }
    }

    pub fn convention(&self) -> ExponentConvention {
        match self.gamma {
            Some(_) => ExponentConvention::GammaOverSqrtN,
            None => ExponentConvention::MuOverAn,
        }
    }
}

/// Log product statistics `exponent · Σ log(S_k/(kμ))` for `reps` replicates.
pub fn log_products(spec: &DoaSpec, n: usize, exponent: f64, reps: usize, stream: &SeedStream) -> Result<Vec<f64>> {
    let mu = spec.mu();
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let x = sample_doa(spec, &stream.split(r), n)?;
            log_product_statistic(&x, mu, exponent)
        })
        .collect()
}

/// KS of the log product statistic against `Γ(α+1)^{1/α} S_α(1, β, 0)`.
pub fn verify_product(c: &ProductCampaign) -> Result<CampaignOutcome> {
    check_reps(c.reps)?;
    if !c.spec.is_positive() {
        return Err(Error::Config(format!(
            "the product statistic needs a positive distribution; `{}` is not",
            c.spec.family().name()
        )));
    }
    if c.n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let a_n = crate::norming::norming_sequence(&c.spec, c.n as u64)?.0;
    let mu = c.spec.mu();
    let exponent = match c.gamma {
        None => mu / a_n,
        Some(gamma) => {
            if c.spec.alpha() != 2.0 {
                return Err(Error::Config("the γ/√n exponent needs a finite-variance family".into()));
            }
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
            }
            gamma / (c.n as f64).sqrt()
        }
    };
    let root = SeedStream::new(c.seed);
    let logs = log_products(&c.spec, c.n, exponent, c.reps, &root.split_named("paths"))?;
    let law = limit_law(c.spec.alpha(), c.spec.beta(), 1.0, 1.0)?;
    let reference = sample(&law, &root.split_named("reference"), c.reps)?;
    let control_law = misspecified_null(&law);
    let control_reference = sample(&control_law, &root.split_named("control-reference"), c.reps)?;

    let check = two_sample_check("log-product", &logs, &reference, law, c.threshold)?
        .at(1.0)
        .with_samples("statistic.csv")
        .with_reference("reference.csv");
    let control = two_sample_check("control", &logs, &control_reference, control_law, c.threshold)?
        .at(1.0)
        .with_samples("statistic.csv")
        .with_reference("control_reference.csv");

    let artifacts = vec![
        Artifact {
            name: "statistic.csv".into(),
            contents: samples_csv(logs.iter().enumerate().map(|(r, &v)| (r, 1.0, v))),
        },
        Artifact {
            name: "reference.csv".into(),
            contents: samples_csv(reference.iter().enumerate().map(|(r, &v)| (r, 1.0, v))),
        },
        Artifact {
            name: "control_reference.csv".into(),
            contents: samples_csv(control_reference.iter().enumerate().map(|(r, &v)| (r, 1.0, v))),
        },
        Artifact {
            name: "limit_law.json".into(),
            contents: law_json(&law)?,
        },
    ];
    let details = json!({
        "mu": mu,
        "a_n": a_n,
        "exponent": exponent,
        "exponent_convention": c.convention(),
        "gamma": c.gamma,
        "limit_law": law,
        "control_law": control_law,
    });
    let names = artifacts.iter().map(|a| a.name.clone()).collect();
    Ok(CampaignOutcome {
        report: VerificationReport::assemble(
            "verify-product",
            c.seed,
            c.n as u64,
            c.reps as u64,
            vec![check],
            control,
            details,
            names,
        ),
        artifacts,
    })
}

// ---------------------------------------------------------------------------
// Sampler fidelity

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerCampaign {
    pub params: StableParams,
    pub n: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Characteristic function grid `t = −t_max, −t_max + t_step, …, t_max`.
    pub t_max: f64,
    pub t_step: f64,
}

impl SamplerCampaign {
    pub fn new(params: StableParams, n: usize, seed: u64) -> Self {
        Self {
            params,
            n,
            seed,
            threshold: SAMPLER_THRESHOLD,
            t_max: 5.0,
            t_step: 0.1,
        }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let k = (self.t_max / self.t_step).round() as i64;
        (-k..=k).map(|j| j as f64 * self.t_step).collect()
    }
}

/// Sup-distance between the empirical characteristic function of `n` draws
/// and the analytic one over a symmetric `t` grid. The control compares the
/// same draws with a law of 10% larger dispersion.
pub fn verify_sampler(c: &SamplerCampaign) -> Result<CampaignOutcome> {
    if c.n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if !(c.t_step > 0.0 && c.t_max > 0.0) {
        return Err(Error::Config("t grid must have positive extent and step".into()));
    }
    let xs = sample(&c.params, &SeedStream::new(c.seed).split_named("draws"), c.n)?;
    let ts = c.t_grid();
    let control_law = StableParams::new(
        c.params.alpha(),
        c.params.beta(),
        1.1 * c.params.dispersion(),
        c.params.location(),
    )?;
    let rows: Vec<(f64, Complex64, Complex64, Complex64)> = ts
        .par_iter()
        .map(|&t| {
            Ok((
                t,
                empirical_char_fn(&xs, t)?,
                char_fn(&c.params, t)?,
                char_fn(&control_law, t)?,
            ))
        })
        .collect::<Result<_>>()?;
    let sup = |pick: fn(&(f64, Complex64, Complex64, Complex64)) -> f64| rows.iter().map(pick).fold(0.0, f64::max);
    let dist = sup(|r| (r.1 - r.2).norm());
    let control_dist = sup(|r| (r.1 - r.3).norm());
    let check = Check::new("sup-ecf", dist, c.threshold, Direction::AtMost).with_null(c.params);
    let control = Check::new("control", control_dist, c.threshold, Direction::AtMost).with_null(control_law);

    let mut csv = String::from("t,empirical_re,empirical_im,analytic_re,analytic_im\n");
    for (t, e, a, _) in &rows {
        csv.push_str(&format!("{t},{},{},{},{}\n", e.re, e.im, a.re, a.im));
    }
    let artifacts = vec![Artifact {
        name: "ecf.csv".into(),
        contents: csv,
    }];
    let details = json!({
        "params": c.params,
        "t_max": c.t_max,
        "t_step": c.t_step,
        "control_law": control_law,
    });
    let names = artifacts.iter().map(|a| a.name.clone()).collect();
    Ok(CampaignOutcome {
        report: VerificationReport::assemble(
            "verify-sampler",
            c.seed,
            c.n as u64,
            1,
            vec![check],
            control,
            details,
            names,
        ),
        artifacts,
    })
}
