use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stable::StableParams;

/// Whether a check passes when its statistic is at most or at least the
/// threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AtMost,
    AtLeast,
}

impl Direction {
    pub fn accepts(&self, statistic: f64, threshold: f64) -> bool {
        match self {
            Direction::AtMost => statistic <= threshold,
            Direction::AtLeast => statistic >= threshold,
        }
    }
}

/// One tested statistic inside a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub t: Option<f64>,
    pub statistic: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub p_value: Option<f64>,
    pub passed: bool,
    /// Hypothesised law of the tested sample, if the check is distributional.
    pub null: Option<StableParams>,
    /// Artifact holding the tested sample (`rep,t,value`).
    pub samples: Option<String>,
    /// Artifact holding reference draws for two-sample checks.
    pub reference: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, direction: Direction) -> Self {
        Self {
            name: name.into(),
            t: None,
            statistic,
            threshold,
            direction,
            p_value: None,
            passed: direction.accepts(statistic, threshold),
            null: None,
            samples: None,
            reference: None,
        }
    }

    pub fn at(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    pub fn with_null(mut self, null: StableParams) -> Self {
        self.null = Some(null);
        self
    }

    pub fn with_samples(mut self, file: impl Into<String>) -> Self {
        self.samples = Some(file.into());
        self
    }

    pub fn with_reference(mut self, file: impl Into<String>) -> Self {
        self.reference = Some(file.into());
        self
    }
}

/// Outcome of a verification campaign.
///
/// `statistic`/`threshold` summarise the primary checks (the worst one);
/// `passed` additionally requires the deliberately mis-specified `control`
/// check to be rejected, so a campaign without power cannot pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub test_name: String,
    pub seed: u64,
    pub n: u64,
    pub reps: u64,
    pub statistic: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub control: Check,
    pub control_rejected: bool,
    /// Campaign parameters and derived quantities (limit laws, CIs).
    pub details: serde_json::Value,
    /// File names, relative to the report's directory.
    pub artifacts: Vec<String>,
    /// Full run configuration, filled in by the caller that owns it.
    pub config: serde_json::Value,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        test_name: &str,
        seed: u64,
        n: u64,
        reps: u64,
        checks: Vec<Check>,
        control: Check,
        details: serde_json::Value,
        artifacts: Vec<String>,
    ) -> Self {
        let direction = checks.first().map(|c| c.direction).unwrap_or(Direction::AtMost);
        // Worst check relative to its own threshold.
        let worst = checks
            .iter()
            .max_by(|a, b| margin(a).total_cmp(&margin(b)))
            .expect("campaign has at least one check");
        let control_rejected = !control.passed;
        Self {
            test_name: test_name.to_string(),
            seed,
            n,
            reps,
            statistic: worst.statistic,
            threshold: worst.threshold,
            direction,
            passed: checks.iter().all(|c| c.passed) && control_rejected,
            checks,
            control,
            control_rejected,
            details,
            artifacts,
            config: serde_json::Value::Null,
        }
    }

    /// Stable, pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn margin(c: &Check) -> f64 {
    match c.direction {
        Direction::AtMost => c.statistic - c.threshold,
        Direction::AtLeast => c.threshold - c.statistic,
    }
}

/// A file produced by a campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Report plus the raw files it references.
#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub report: VerificationReport,
    pub artifacts: Vec<Artifact>,
}

impl CampaignOutcome {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// Writes every artifact and `report.json` into `dir`; returns the report path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            fs::write(dir.join(&a.name), &a.contents)?;
        }
        let path = dir.join("report.json");
        fs::write(&path, self.report.to_json()?)?;
        Ok(path)
    }
}

/// CSV `rep,t,value` for a statistic sampled at one time per replicate.
pub(crate) fn samples_csv(rows: impl IntoIterator<Item = (usize, f64, f64)>) -> String {
    let mut s = String::from("rep,t,value\n");
    for (rep, t, v) in rows {
        s.push_str(&format!("{rep},{t},{v}\n"));
    }
    s
}

/// Parses a `rep,t,value` CSV back into rows.
pub fn parse_samples_csv(text: &str) -> Result<Vec<(usize, f64, f64)>> {
    let bad = |line: &str| crate::error::Error::Io(format!("malformed sample row `{line}`"));
    let mut lines = text.lines();
    match lines.next() {
        Some("rep,t,value") => {}
        other => return Err(crate::error::Error::Io(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let mut parts = line.split(',');
            let rep = parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| bad(line))?;
            let t = parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| bad(line))?;
            let v = parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| bad(line))?;
            Ok((rep, t, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_semantics() {
        assert!(Direction::AtMost.accepts(0.03, 0.04));
        assert!(!Direction::AtMost.accepts(0.05, 0.04));
        assert!(Direction::AtLeast.accepts(0.05, 0.04));
    }

    #[test]
    fn passed_requires_rejected_control() {
        let ok = Check::new("a", 0.01, 0.04, Direction::AtMost);
        let weak_control = Check::new("ctl", 0.02, 0.04, Direction::AtMost);
        let r = VerificationReport::assemble("x", 1, 1, 1, vec![ok.clone()], weak_control, serde_json::Value::Null, vec![]);
        assert!(!r.passed && !r.control_rejected);
        let strong = Check::new("ctl", 0.2, 0.04, Direction::AtMost);
        let r = VerificationReport::assemble("x", 1, 1, 1, vec![ok], strong, serde_json::Value::Null, vec![]);
        assert!(r.passed && r.control_rejected);
    }

    #[test]
    fn worst_check_is_summarised() {
        let checks = vec![
            Check::new("a", 0.01, 0.04, Direction::AtMost),
            Check::new("b", 0.05, 0.04, Direction::AtMost),
        ];
        let ctl = Check::new("ctl", 0.2, 0.04, Direction::AtMost);
        let r = VerificationReport::assemble("x", 1, 1, 1, checks, ctl, serde_json::Value::Null, vec![]);
        assert_eq!(r.statistic, 0.05);
        assert!(!r.passed);
    }

    #[test]
    fn samples_csv_round_trip() {
        let rows = vec![(0, 0.25, -1.5), (1, 1.0, 2.0e-7)];
        let text = samples_csv(rows.clone());
        assert!(text.starts_with("rep,t,value\n0,0.25,-1.5\n"));
        assert_eq!(parse_samples_csv(&text).unwrap(), rows);
        assert!(parse_samples_csv("x,y\n").is_err());
        assert!(parse_samples_csv("rep,t,value\n1,a,2\n").is_err());
    }
}
