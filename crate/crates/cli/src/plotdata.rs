use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fclt_core::stable::cdf;
use fclt_core::verification::{parse_samples_csv, Ecdf, VerificationReport};

use crate::CliError;

/// Points per overlay, on empirical quantiles from 0.5% to 99.5%.
const OVERLAY_POINTS: usize = 199;

fn load(dir: &Path, name: &str) -> Result<Vec<(usize, f64, f64)>, CliError> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("missing artifact {}: {e}", path.display())))?;
    Ok(parse_samples_csv(&text)?)
}

fn at_time(rows: &[(usize, f64, f64)], t: Option<f64>) -> Vec<f64> {
    rows.iter()
        .filter(|(_, rt, _)| t.is_none_or(|t| *rt == t))
        .map(|&(_, _, v)| v)
        .collect()
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

/// Writes one `x,empirical,theoretical` ECDF overlay per tested marginal of
/// `report`, reading its sample artifacts from `artifact_dir`. The
/// theoretical column is the reference ECDF for two-sample checks and the
/// null CDF otherwise.
pub fn emit_plotdata(report: &VerificationReport, artifact_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if report.artifacts.is_empty() {
        return Err(CliError::Config(format!("report `{}` lists no artifacts", report.test_name)));
    }
    let tested: Vec<_> = report.checks.iter().filter(|c| c.samples.is_some()).collect();
    if tested.is_empty() {
        return Err(CliError::Config(format!(
            "report `{}` has no sample artifacts to overlay",
            report.test_name
        )));
    }
    let mut cache: BTreeMap<String, Vec<(usize, f64, f64)>> = BTreeMap::new();
    let mut overlays = Vec::with_capacity(tested.len());
    for check in tested {
        let samples_file = check.samples.as_deref().expect("filtered");
        if !cache.contains_key(samples_file) {
            cache.insert(samples_file.to_string(), load(artifact_dir, samples_file)?);
        }
        let xs = at_time(&cache[samples_file], check.t);
        let empirical = Ecdf::new(&xs)?;
        let reference = match &check.reference {
            Some(r) => Some(Ecdf::new(&at_time(&load(artifact_dir, r)?, None))?),
            None => None,
        };
        let mut csv = String::from("x,empirical,theoretical\n");
        for i in 0..OVERLAY_POINTS {
            let p = 0.005 + 0.99 * i as f64 / (OVERLAY_POINTS - 1) as f64;
            let x = empirical.quantile(p);
            let theoretical = match (&reference, &check.null) {
                (Some(r), _) => r.eval(x),
                (None, Some(null)) => cdf(null, x)?,
                (None, None) => {
                    return Err(CliError::Config(format!("check `{}` has neither reference nor null", check.name)))
                }
            };
            csv.push_str(&format!("{x},{},{theoretical}\n", empirical.eval(x)));
        }
        overlays.push((format!("overlay_{}.csv", file_stem(&check.name)), csv));
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(overlays.len());
    for (name, csv) in overlays {
        let path = out_dir.join(name);
        fs::write(&path, csv)?;
        written.push(path);
    }
    Ok(written)
}
