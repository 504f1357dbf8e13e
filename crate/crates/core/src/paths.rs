//! Input sequences, the rescaled partial-sum process and stable Lévy motion.
//!
//! Paths live on a uniform grid `j/m`, `j = 0..=m`, and are right-continuous
//! step functions: the value stored at `t_j` holds on `[t_j, t_{j+1})`, and
//! the last value is the value at `t = 1`.

use std::io::Write;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norming::norming_sequence;
use crate::rng::{exp1, open01, SeedStream};
use crate::stable::{StableParams, StableSampler};

/// Distribution families with a known domain of attraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Exponential {
        rate: f64,
    },
    /// `shift + scale·U^{−1/tail_index}`.
    Pareto {
        tail_index: f64,
        scale: f64,
        shift: f64,
    },
    ExactStable {
        params: StableParams,
    },
    /// `±U^{−1/tail_index}`, positive with probability `(1 + asymmetry)/2`.
    TwoSidedPareto {
        tail_index: f64,
        asymmetry: f64,
    },
    /// Point mass; only useful as a degenerate control.
    Constant {
        value: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Exponential { .. } => "exponential",
            Family::Pareto { .. } => "pareto",
            Family::ExactStable { .. } => "exact-stable",
            Family::TwoSidedPareto { .. } => "two-sided-pareto",
            Family::Constant { .. } => "constant",
        }
    }
}

/// A distribution in the domain of attraction of a stable law with index in
/// `(1, 2]`, together with its mean and the attracting `(α, β)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct DoaSpec {
    family: Family,
    known_mu: f64,
    known_alpha: f64,
    known_beta: f64,
    positivity: bool,
}

impl TryFrom<Family> for DoaSpec {
    type Error = Error;

    fn try_from(f: Family) -> Result<Self> {
        DoaSpec::new(f)
    }
}

impl From<DoaSpec> for Family {
    fn from(s: DoaSpec) -> Family {
        s.family
    }
}

fn check_tail_index(tail_index: f64) -> Result<()> {
    if tail_index > 1.0 && tail_index.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "tail_index",
            format!("{tail_index} must exceed 1 so that E|X| is finite"),
        ))
    }
}

impl DoaSpec {
    pub fn new(family: Family) -> Result<Self> {
        let spec = match family {
            Family::Exponential { rate } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::invalid("rate", format!("{rate} must be positive")));
                }
                Self {
                    family,
                    known_mu: rate.recip(),
                    known_alpha: 2.0,
                    known_beta: 0.0,
                    positivity: true,
                }
            }
            Family::Pareto {
                tail_index,
                scale,
                shift,
            } => {
                check_tail_index(tail_index)?;
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::invalid("scale", format!("{scale} must be positive")));
                }
                if !(shift.is_finite() && shift >= 0.0) {
                    return Err(Error::invalid("shift", format!("{shift} must be finite and non-negative")));
                }
                Self {
                    family,
                    known_mu: tail_index * scale / (tail_index - 1.0) + shift,
                    known_alpha: tail_index.min(2.0),
                    known_beta: if tail_index < 2.0 { 1.0 } else { 0.0 },
                    positivity: true,
                }
            }
            Family::ExactStable { params } => {
                if params.alpha() <= 1.0 {
                    return Err(Error::invalid(
                        "alpha",
                        format!("{} must lie in (1, 2] for a finite mean", params.alpha()),
                    ));
                }
                Self {
                    family,
                    known_mu: params.location(),
                    known_alpha: params.alpha(),
                    known_beta: if params.is_gaussian() { 0.0 } else { params.beta() },
                    positivity: false,
                }
            }
            Family::TwoSidedPareto {
                tail_index,
                asymmetry,
            } => {
                check_tail_index(tail_index)?;
                if !(-1.0..=1.0).contains(&asymmetry) {
                    return Err(Error::invalid("asymmetry", format!("{asymmetry} is outside [-1, 1]")));
                }
                Self {
                    family,
                    known_mu: asymmetry * tail_index / (tail_index - 1.0),
                    known_alpha: tail_index.min(2.0),
                    known_beta: if tail_index < 2.0 { asymmetry } else { 0.0 },
                    positivity: asymmetry == 1.0,
                }
            }
            Family::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::NonFinite { name: "value", value });
                }
                Self {
                    family,
                    known_mu: value,
                    known_alpha: 2.0,
                    known_beta: 0.0,
                    positivity: value > 0.0,
                }
            }
        };
        Ok(spec)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn pareto(tail_index: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Pareto {
            tail_index,
            scale,
            shift: 0.0,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn mu(&self) -> f64 {
        self.known_mu
    }

    pub fn alpha(&self) -> f64 {
        self.known_alpha
    }

    pub fn beta(&self) -> f64 {
        self.known_beta
    }

    pub fn is_positive(&self) -> bool {
        self.positivity
    }

    /// A single draw.
    #[inline]
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R, stable: Option<&StableSampler>) -> f64 {
        match self.family {
            Family::Exponential { rate } => exp1(rng) / rate,
            Family::Pareto {
                tail_index,
                scale,
                shift,
            } => shift + scale * open01(rng).powf(-tail_index.recip()),
            Family::ExactStable { params } => match stable {
                Some(s) => s.draw(rng),
                None => StableSampler::new(params).draw(rng),
            },
            Family::TwoSidedPareto {
                tail_index,
                asymmetry,
            } => {
                let positive = open01(rng) < 0.5 * (1.0 + asymmetry);
                let mag = open01(rng).powf(-tail_index.recip());
                if positive {
                    mag
                } else {
                    -mag
                }
            }
            Family::Constant { value } => value,
        }
    }

    fn sampler(&self) -> Option<StableSampler> {
        match self.family {
            Family::ExactStable { params } => Some(StableSampler::new(params)),
            _ => None,
        }
    }

    pub fn fill<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let stable = self.sampler();
        for x in out {
            *x = self.draw(rng, stable.as_ref());
        }
    }
}

/// `n` i.i.d. draws of `X₁ ~ spec`.
pub fn sample_doa(spec: &DoaSpec, stream: &SeedStream, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "sample size must be at least 1"));
    }
    let mut out = vec![0.0; n];
    spec.fill(&mut stream.rng(), &mut out);
    Ok(out)
}

/// Running sums `S_1, …, S_n`.
pub fn cumulative_sums(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// A source of partial sums `S_1, …, S_n` with declared centering and norming.
///
/// Partial sums of i.i.d. variables are one instance; any sequence obeying the
/// stable invariance principle together with `sup E|S_n − nμ|/a_n < ∞` and
/// `S_n/n → μ` can be plugged into the functional statistics.
pub trait SequenceSource: Sync {
    fn partial_sums(&self, stream: &SeedStream, n: usize) -> Result<Vec<f64>>;
    fn mu(&self) -> f64;
    fn norming(&self, n: usize) -> Result<f64>;
    fn alpha(&self) -> f64;
    fn beta(&self) -> f64;
}

/// Partial sums of i.i.d. draws from a [`DoaSpec`].
#[derive(Clone, Copy, Debug)]
pub struct IidSource {
    pub spec: DoaSpec,
}

impl SequenceSource for IidSource {
    fn partial_sums(&self, stream: &SeedStream, n: usize) -> Result<Vec<f64>> {
        Ok(cumulative_sums(&sample_doa(&self.spec, stream, n)?))
    }

    fn mu(&self) -> f64 {
        self.spec.mu()
    }

    fn norming(&self, n: usize) -> Result<f64> {
        Ok(norming_sequence(&self.spec, n as u64)?.0)
    }

    fn alpha(&self) -> f64 {
        self.spec.alpha()
    }

    fn beta(&self) -> f64 {
        self.spec.beta()
    }
}

/// `X_k = (Y_k + Y_{k−1})/2` for i.i.d. `Y ~ spec`: a dependent sequence whose
/// partial sums differ from those of `Y` by `(Y_0 − Y_n)/2`, hence share the
/// same stable limit and norming.
#[derive(Clone, Copy, Debug)]
pub struct MovingAverageSource {
    pub spec: DoaSpec,
}

impl SequenceSource for MovingAverageSource {
    fn partial_sums(&self, stream: &SeedStream, n: usize) -> Result<Vec<f64>> {
        let y = sample_doa(&self.spec, stream, n + 1)?;
        let x: Vec<f64> = y.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(cumulative_sums(&x))
    }

    fn mu(&self) -> f64 {
        self.spec.mu()
    }

    fn norming(&self, n: usize) -> Result<f64> {
        Ok(norming_sequence(&self.spec, n as u64)?.0)
    }

    fn alpha(&self) -> f64 {
        self.spec.alpha()
    }

    fn beta(&self) -> f64 {
        self.spec.beta()
    }
}

/// An element of `D[0,1]` on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::invalid(
                "times",
                format!("need at least two grid points and one value each ({} vs {})", times.len(), values.len()),
            ));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(Error::invalid("times", "grid must start at 0 and end at 1"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("times", "grid must be strictly increasing"));
        }
        Ok(Self { times, values })
    }

    /// Path on the grid `j/m` with `values[j]` at `t = j/m`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let m = values.len().saturating_sub(1);
        if m == 0 {
            return Err(Error::invalid("grid", "need at least one grid cell"));
        }
        let times = uniform_grid(m);
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.times.len() - 1
    }

    /// Value at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid("t", format!("{t} is outside [0, 1]")));
        }
        let idx = self.times.partition_point(|&s| s <= t) - 1;
        Ok(self.values[idx])
    }

    /// Sup-distance on the common refinement of the two grids.
    pub fn sup_distance(&self, other: &SamplePath) -> f64 {
        let mut knots: Vec<f64> = self.times.iter().chain(other.times.iter()).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots
            .iter()
            .map(|&t| (self.eval(t).unwrap() - other.eval(t).unwrap()).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,value`, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }
}

pub fn uniform_grid(m: usize) -> Vec<f64> {
    (0..=m).map(|j| j as f64 / m as f64).collect()
}

/// `⌊n·j/m⌋` in integer arithmetic.
#[inline]
pub fn floor_index(n: usize, j: usize, m: usize) -> usize {
    ((n as u128 * j as u128) / m as u128) as usize
}

/// `⌊n·t⌋` for a time `t ∈ [0, 1]`. Dyadic and other exactly representable
/// times avoid the `0.999…` artefact because the product is rounded once.
#[inline]
pub fn floor_at(n: usize, t: f64) -> usize {
    ((n as f64 * t).floor() as usize).min(n)
}

/// `S_n(t) = (S_{⌊nt⌋} − ⌊nt⌋μ)/a_n` on the grid `j/m`, from the increments `x`.
pub fn partial_sum_process(x: &[f64], mu: f64, a_n: f64, grid: usize) -> Result<SamplePath> {
    partial_sum_process_from_sums(&cumulative_sums(x), mu, a_n, grid)
}

/// As [`partial_sum_process`], from precomputed partial sums `S_1..S_n`.
pub fn partial_sum_process_from_sums(sums: &[f64], mu: f64, a_n: f64, grid: usize) -> Result<SamplePath> {
    if sums.is_empty() {
        return Err(Error::invalid("x", "sequence must be nonempty"));
    }
    if !(a_n > 0.0 && a_n.is_finite()) {
        return Err(Error::invalid("a_n", format!("{a_n} must be positive")));
    }
    if grid == 0 {
        return Err(Error::invalid("grid", "need at least one grid cell"));
    }
    let n = sums.len();
    let values = (0..=grid)
        .map(|j| {
            let k = floor_index(n, j, grid);
            if k == 0 {
                0.0
            } else {
                (sums[k - 1] - k as f64 * mu) / a_n
            }
        })
        .collect();
    SamplePath::uniform(values)
}

/// Standard `(α, β)`-stable Lévy motion on `[0,1]` sampled on `m` cells:
/// independent increments `S_α(1/m, β, 0)`, `L(0) = 0`.
pub fn simulate_levy_path(alpha: f64, beta: f64, stream: &SeedStream, grid: usize) -> Result<SamplePath> {
    let increments = levy_sampler(alpha, beta, grid)?;
    Ok(levy_path_with(&increments, &mut stream.rng(), grid))
}

pub(crate) fn levy_sampler(alpha: f64, beta: f64, grid: usize) -> Result<StableSampler> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::invalid("alpha", format!("{alpha} is outside (1, 2]")));
    }
    if grid == 0 {
        return Err(Error::invalid("grid", "need at least one grid cell"));
    }
    Ok(StableSampler::new(StableParams::new(alpha, beta, 1.0 / grid as f64, 0.0)?))
}

pub(crate) fn levy_path_with<R: RngCore + ?Sized>(increments: &StableSampler, rng: &mut R, grid: usize) -> SamplePath {
    let mut values = Vec::with_capacity(grid + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for _ in 0..grid {
        acc += increments.draw(rng);
        values.push(acc);
    }
    SamplePath::uniform(values).expect("grid ≥ 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_input_gives_zero_path() {
        let x = vec![2.5; 37];
        let p = partial_sum_process(&x, 2.5, 3.0, 16).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_evaluated_path() {
        let a = 3f64.sqrt();
        let p = partial_sum_process(&[2.0, 0.0, 4.0], 2.0, a, 3).unwrap();
        assert!((p.eval(2.0 / 3.0).unwrap() + 2.0 / a).abs() < 1e-15);
        assert!((p.eval(2.0 / 3.0).unwrap() + 1.154_700_538_379_251_7).abs() < 1e-12);
        assert_eq!(p.eval(1.0).unwrap(), 0.0);
        assert_eq!(p.eval(0.2).unwrap(), 0.0);
    }

    #[test]
    fn zero_before_first_index() {
        let x = [5.0, -1.0, 3.0, 7.0];
        let p = partial_sum_process(&x, 0.0, 1.0, 64).unwrap();
        for (t, v) in p.times().iter().zip(p.values()) {
            if *t < 0.25 {
                assert_eq!(*v, 0.0);
            }
        }
        assert_eq!(p.eval(0.25).unwrap(), 5.0);
    }

    #[test]
    fn floor_is_exact_at_grid_points() {
        for n in [3usize, 7, 10, 1000, 10_000] {
            for m in [3usize, 4, 10, 4096] {
                for j in 0..=m {
                    let k = floor_index(n, j, m);
                    assert!(k * m <= n * j && (k + 1) * m > n * j);
                }
            }
        }
        assert_eq!(floor_at(10, 0.3), 3);
        assert_eq!(floor_at(10_000, 0.25), 2500);
    }

    #[test]
    fn path_validation() {
        assert!(SamplePath::new(vec![0.0, 0.5], vec![1.0, 2.0]).is_err());
        assert!(SamplePath::new(vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 4]).is_err());
        assert!(SamplePath::uniform(vec![1.0]).is_err());
        let p = SamplePath::uniform(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.eval(0.49).unwrap(), 0.0);
        assert_eq!(p.eval(0.5).unwrap(), 1.0);
        assert_eq!(p.eval(1.0).unwrap(), 2.0);
        assert!(p.eval(1.1).is_err());
        assert!(partial_sum_process(&[], 0.0, 1.0, 4).is_err());
        assert!(partial_sum_process(&[1.0], 0.0, 0.0, 4).is_err());
        assert!(partial_sum_process(&[1.0], 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let p = SamplePath::uniform(vec![0.0, -1.5, 2.0]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value\n0,0\n0.5,-1.5\n1,2\n");
    }

    #[test]
    fn sup_distance_on_refinement() {
        let coarse = SamplePath::uniform(vec![0.0, 1.0, 2.0]).unwrap();
        let fine = SamplePath::uniform(vec![0.0, 0.5, 1.0, 1.5, 2.0]).unwrap();
        assert_eq!(coarse.sup_distance(&fine), 0.5);
        assert_eq!(coarse.sup_distance(&coarse), 0.0);
    }

    #[test]
    fn levy_path_starts_at_zero() {
        let p = simulate_levy_path(1.5, 1.0, &SeedStream::new(3), 256).unwrap();
        assert_eq!(p.values()[0], 0.0);
        assert_eq!(p.cells(), 256);
        assert!(simulate_levy_path(1.0, 0.0, &SeedStream::new(3), 8).is_err());
        assert!(simulate_levy_path(2.0, 0.0, &SeedStream::new(3), 0).is_err());
    }

    #[test]
    fn doa_means() {
        let e = DoaSpec::exponential(1.0).unwrap();
        let xs = sample_doa(&e, &SeedStream::new(21), 1_000_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 3e-3, "{mean}");

        let p = DoaSpec::pareto(1.5, 1.0).unwrap();
        assert_eq!(p.mu(), 3.0);
        assert!(p.is_positive());
        assert_eq!((p.alpha(), p.beta()), (1.5, 1.0));
        let xs = sample_doa(&p, &SeedStream::new(22), 1_000_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 3.0).abs() < 0.1, "{mean}");
        assert!(xs.iter().all(|&x| x >= 1.0));

        let g = DoaSpec::new(Family::ExactStable {
            params: StableParams::gaussian(2.0, 1.0).unwrap(),
        })
        .unwrap();
        let xs = sample_doa(&g, &SeedStream::new(23), 1_000_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((mean - 2.0).abs() < 5e-3 && (var - 1.0).abs() < 1e-2, "{mean} {var}");
    }

    #[test]
    fn doa_validation() {
        assert!(DoaSpec::exponential(0.0).is_err());
        assert!(DoaSpec::pareto(1.0, 1.0).is_err());
        assert!(DoaSpec::pareto(1.5, -1.0).is_err());
        assert!(DoaSpec::new(Family::TwoSidedPareto { tail_index: 1.5, asymmetry: 2.0 }).is_err());
        assert!(DoaSpec::new(Family::ExactStable { params: StableParams::standard(1.0, 0.0).unwrap() }).is_err());
        assert!(sample_doa(&DoaSpec::exponential(1.0).unwrap(), &SeedStream::new(1), 0).is_err());
        let two = DoaSpec::new(Family::TwoSidedPareto { tail_index: 1.5, asymmetry: -0.5 }).unwrap();
        assert!(!two.is_positive());
        assert_eq!(two.beta(), -0.5);
        assert!((two.mu() + 1.5).abs() < 1e-15);
    }

    #[test]
    fn doa_serde_round_trip() {
        let s = DoaSpec::pareto(1.5, 2.0).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"family":"pareto","tail_index":1.5,"scale":2.0,"shift":0.0}"#);
        assert_eq!(serde_json::from_str::<DoaSpec>(&json).unwrap(), s);
        assert!(serde_json::from_str::<DoaSpec>(r#"{"family":"exponential","rate":-1.0}"#).is_err());
    }

    #[test]
    fn moving_average_source_sums() {
        let spec = DoaSpec::exponential(1.0).unwrap();
        let src = MovingAverageSource { spec };
        let stream = SeedStream::new(4);
        let s = src.partial_sums(&stream, 10).unwrap();
        let y = sample_doa(&spec, &stream, 11).unwrap();
        let direct: f64 = y[1..].iter().sum::<f64>() + 0.5 * (y[0] - y[10]);
        assert!((s[9] - direct).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn translation_covariant(x in prop::collection::vec(-10.0f64..10.0, 1..50), mu in -3.0f64..3.0, c in -5.0f64..5.0, a in 0.1f64..10.0) {
            let p = partial_sum_process(&x, mu, a, 16).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let q = partial_sum_process(&shifted, mu + c, a, 16).unwrap();
            prop_assert!(p.sup_distance(&q) < 1e-9);
        }

        #[test]
        fn scale_covariant(x in prop::collection::vec(-10.0f64..10.0, 1..50), mu in -3.0f64..3.0, c in 0.1f64..10.0, a in 0.1f64..10.0) {
            let p = partial_sum_process(&x, mu, a, 16).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
            let q = partial_sum_process(&scaled, mu * c, a * c, 16).unwrap();
            prop_assert!(p.sup_distance(&q) < 1e-9);
        }
    }
}
