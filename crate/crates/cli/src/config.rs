use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fclt_core::functionals::FunctionKind;
use fclt_core::paths::{DoaSpec, Family};
use fclt_core::StableParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Campaign {
    Sample,
    Paths,
    VerifyRemark,
    VerifyFclt,
    VerifyLemma,
    VerifyProduct,
    VerifySampler,
}

impl Campaign {
    pub fn name(self) -> &'static str {
        match self {
            Campaign::Sample => "sample",
            Campaign::Paths => "paths",
            Campaign::VerifyRemark => "verify-remark",
            Campaign::VerifyFclt => "verify-fclt",
            Campaign::VerifyLemma => "verify-lemma",
            Campaign::VerifyProduct => "verify-product",
            Campaign::VerifySampler => "verify-sampler",
        }
    }

    pub fn is_verification(self) -> bool {
        !matches!(self, Campaign::Sample | Campaign::Paths)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    QiLog,
    Identity,
}

impl From<FunctionArg> for FunctionKind {
    fn from(f: FunctionArg) -> Self {
        match f {
            FunctionArg::QiLog => FunctionKind::QiLog,
            FunctionArg::Identity => FunctionKind::Identity,
        }
    }
}

/// Every setting, unvalidated and possibly missing. Flags and config files
/// both produce one of these; [`RawConfig::overlay`] merges them.
#[derive(Clone, Debug, Default, Args)]
pub struct RawConfig {
    /// Config file: JSON, flat `key=value` lines, or a previous report.json
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Distribution family: exponential, pareto, exact-stable, two-sided-pareto, constant
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub tail_index: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub asymmetry: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub value: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub dispersion: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub location: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated times in (0, 1]
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Comma-separated sample sizes for verify-lemma
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<u64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub function: Option<FunctionArg>,
    /// Use the γ/√n product exponent instead of μ/a_n
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RawConfig {
    /// `self` with every field set in `top` replaced.
    pub fn overlay(mut self, top: &RawConfig) -> RawConfig {
        overlay_fields!(self, top; config, family, rate, tail_index, scale, shift, asymmetry, value,
            alpha, beta, dispersion, location, n, reps, grid, eps, times, ns, seed, function, gamma, out_dir);
        self
    }

    /// Reads a config file. JSON objects may be flat or nested the way
    /// reports embed them; a whole report is accepted through its `config`.
    pub fn from_file(path: &Path) -> Result<RawConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<RawConfig, CliError> {
        let map = if text.trim_start().starts_with('{') {
            let v: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
            let Value::Object(mut obj) = v else { unreachable!() };
            if obj.contains_key("test_name") {
                match obj.remove("config") {
                    Some(Value::Object(c)) => flatten(c),
                    _ => return Err(CliError::Config("report has no embedded config".into())),
                }
            } else {
                flatten(obj)
            }
        } else {
            parse_key_values(text)?
        };
        from_map(map)
    }
}

// Lifts `distribution`, `stable` and exact-stable `params` objects to the top level.
fn flatten(obj: Map<String, Value>) -> Map<String, Value> {
    let mut out = Map::new();
    for (k, v) in obj {
        match (k.as_str(), v) {
            ("distribution" | "stable" | "params", Value::Object(inner)) => {
                for (ik, iv) in flatten(inner) {
                    out.entry(ik).or_insert(iv);
                }
            }
            (_, v) => {
                out.insert(k, v);
            }
        }
    }
    out
}

fn parse_key_values(text: &str) -> Result<Map<String, Value>, CliError> {
    let mut map = Map::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
        let key = k.trim().replace('-', "_");
        let v = v.trim();
        let value = if v.contains(',') && !v.starts_with('[') {
            Value::Array(v.split(',').map(|p| scalar(p.trim())).collect())
        } else {
            scalar(v)
        };
        map.insert(key, value);
    }
    Ok(map)
}

fn scalar(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()))
}

fn field<T: DeserializeOwned>(key: &str, v: Value) -> Result<Option<T>, CliError> {
    if v.is_null() {
        return Ok(None);
    }
    serde_json::from_value(v)
        .map(Some)
        .map_err(|e| CliError::Config(format!("`{key}`: {e}")))
}

// A single number where a list is expected is a one-element list.
fn list<T: DeserializeOwned>(key: &str, v: Value) -> Result<Option<Vec<T>>, CliError> {
    match v {
        Value::Array(_) | Value::Null => field(key, v),
        other => field(key, Value::Array(vec![other])),
    }
}

fn from_map(map: Map<String, Value>) -> Result<RawConfig, CliError> {
    let mut raw = RawConfig::default();
    for (key, v) in map {
        match key.as_str() {
            "campaign" | "threads" => {}
            "family" => raw.family = field(&key, v)?,
            "rate" => raw.rate = field(&key, v)?,
            "tail_index" => raw.tail_index = field(&key, v)?,
            "scale" => raw.scale = field(&key, v)?,
            "shift" => raw.shift = field(&key, v)?,
            "asymmetry" => raw.asymmetry = field(&key, v)?,
            "value" => raw.value = field(&key, v)?,
            "alpha" => raw.alpha = field(&key, v)?,
            "beta" => raw.beta = field(&key, v)?,
            "dispersion" => raw.dispersion = field(&key, v)?,
            "location" => raw.location = field(&key, v)?,
            "n" => raw.n = field(&key, v)?,
            "reps" => raw.reps = field(&key, v)?,
            "grid" => raw.grid = field(&key, v)?,
            "eps" => raw.eps = field(&key, v)?,
            "times" => raw.times = list(&key, v)?,
            "ns" => raw.ns = list(&key, v)?,
            "seed" => raw.seed = field(&key, v)?,
            "function" => {
                raw.function = field::<FunctionKind>(&key, v)?.map(|f| match f {
                    FunctionKind::QiLog => FunctionArg::QiLog,
                    FunctionKind::Identity => FunctionArg::Identity,
                })
            }
            "gamma" => raw.gamma = field(&key, v)?,
            "out_dir" => raw.out_dir = field(&key, v)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
    }
    Ok(raw)
}

pub const DEFAULT_N: usize = 10_000;
pub const DEFAULT_REPS: usize = 1000;
pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_TIMES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_NS: [u64; 3] = [100, 1000, 10_000];

/// A fully specified run. This is what reports embed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub campaign: Campaign,
    pub distribution: DoaSpec,
    pub stable: StableParams,
    pub n: usize,
    pub reps: usize,
    pub grid: usize,
    pub eps: f64,
    pub times: Vec<f64>,
    pub ns: Vec<u64>,
    pub seed: u64,
    pub function: FunctionKind,
    pub gamma: Option<f64>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{field}`: {msg}"))
}

impl CampaignConfig {
    /// Applies defaults and validates every field.
    pub fn resolve(campaign: Campaign, raw: &RawConfig) -> Result<CampaignConfig, CliError> {
        let alpha = raw.alpha.unwrap_or(2.0);
        let stable = StableParams::new(
            alpha,
            raw.beta.unwrap_or(0.0),
            raw.dispersion.unwrap_or(1.0),
            raw.location.unwrap_or(0.0),
        )
        .map_err(|e| invalid("stable", e))?;

        let tail = raw.tail_index.unwrap_or(1.5);
        let family = match raw.family.as_deref().unwrap_or("exponential") {
            "exponential" => Family::Exponential {
                rate: raw.rate.unwrap_or(1.0),
            },
            "pareto" => Family::Pareto {
                tail_index: tail,
                scale: raw.scale.unwrap_or(1.0),
                shift: raw.shift.unwrap_or(0.0),
            },
            "exact-stable" => Family::ExactStable { params: stable },
            "two-sided-pareto" => Family::TwoSidedPareto {
                tail_index: tail,
                asymmetry: raw.asymmetry.unwrap_or(0.0),
            },
            "constant" => Family::Constant {
                value: raw.value.unwrap_or(1.0),
            },
            other => {
                return Err(invalid(
                    "family",
                    format!("unknown family `{other}` (exponential, pareto, exact-stable, two-sided-pareto, constant)"),
                ))
            }
        };
        let distribution = DoaSpec::new(family).map_err(|e| invalid("family", e))?;

        let positive = |name: &str, v: usize| if v == 0 { Err(invalid(name, "must be at least 1")) } else { Ok(v) };
        let n = positive("n", raw.n.unwrap_or(DEFAULT_N))?;
        let reps = positive("reps", raw.reps.unwrap_or(DEFAULT_REPS))?;
        let grid = positive("grid", raw.grid.unwrap_or(DEFAULT_GRID))?;
        let eps = raw.eps.unwrap_or(1.0 / grid as f64);
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid("eps", format!("{eps} must lie in (0, 1)")));
        }
        let times = raw.times.clone().unwrap_or_else(|| DEFAULT_TIMES.to_vec());
        if times.is_empty() || times.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(invalid("times", format!("{times:?} must be a nonempty list in (0, 1]")));
        }
        let ns = raw.ns.clone().unwrap_or_else(|| DEFAULT_NS.to_vec());
        if ns.is_empty() || ns.contains(&0) {
            return Err(invalid("ns", format!("{ns:?} must be a nonempty list of positive sizes")));
        }
        let seed = match (raw.seed, campaign.is_verification()) {
            (Some(s), _) => s,
            (None, false) => 0,
            (None, true) => return Err(invalid("seed", format!("required for {}", campaign.name()))),
        };
        if let Some(g) = raw.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(invalid("gamma", format!("{g} must be positive")));
            }
        }
        if campaign == Campaign::VerifyRemark && alpha <= 1.0 {
            return Err(invalid("alpha", format!("{alpha} must lie in (1, 2]")));
        }
        Ok(CampaignConfig {
            campaign,
            distribution,
            stable,
            n,
            reps,
            grid,
            eps,
            times,
            ns,
            seed,
            function: raw.function.map(Into::into).unwrap_or(FunctionKind::QiLog),
            gamma: raw.gamma,
            out_dir: raw.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    /// Resolves flags over an optional config file named by `--config`.
    pub fn from_flags(campaign: Campaign, flags: &RawConfig) -> Result<CampaignConfig, CliError> {
        let merged = match &flags.config {
            Some(path) => RawConfig::from_file(path)?.overlay(flags),
            None => flags.clone(),
        };
        Self::resolve(campaign, &merged)
    }
}
