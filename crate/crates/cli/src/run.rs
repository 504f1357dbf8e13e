use std::fs;
use std::path::PathBuf;

use fclt_core::functionals::{functional_statistic, FunctionSpec, FunctionalConfig};
use fclt_core::norming::norming_sequence;
use fclt_core::paths::{partial_sum_process, sample_doa, SamplePath};
use fclt_core::stable::sample;
use fclt_core::verification::{
    verify_fclt, verify_lemma, verify_product, verify_remark, verify_sampler, CampaignOutcome, FcltCampaign,
    LemmaCampaign, ProductCampaign, RemarkCampaign, SamplerCampaign,
};
use fclt_core::SeedStream;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Campaign, CampaignConfig};
use crate::CliError;

#[derive(Debug)]
pub struct RunOutcome {
    pub passed: bool,
    /// Files written, in write order.
    pub written: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

/// Runs one campaign and writes its outputs into `config.out_dir`.
///
/// Nothing is written unless the campaign itself completed, so a bad
/// configuration leaves the output directory untouched.
pub fn run(config: &CampaignConfig) -> Result<RunOutcome, CliError> {
    let mut outcome = match config.campaign {
        Campaign::Sample => return run_sample(config),
        Campaign::Paths => return run_paths(config),
        Campaign::VerifyRemark => {
            let mut c = RemarkCampaign::new(config.stable.alpha(), config.stable.beta(), config.reps, config.grid, config.seed);
            c.eps = config.eps;
            verify_remark(&c)?
        }
        Campaign::VerifyFclt => {
            let fc = FunctionalConfig::new(config.distribution, config.function, config.n, config.grid)?;
            verify_fclt(&FcltCampaign::new(fc, config.times.clone(), config.reps, config.seed))?
        }
        Campaign::VerifyLemma => verify_lemma(&LemmaCampaign::new(
            config.distribution,
            config.ns.clone(),
            config.reps,
            config.seed,
        ))?,
        Campaign::VerifyProduct => {
            let mut c = ProductCampaign::new(config.distribution, config.n, config.reps, config.seed);
            c.gamma = config.gamma;
            verify_product(&c)?
        }
        Campaign::VerifySampler => verify_sampler(&SamplerCampaign::new(config.stable, config.n, config.seed))?,
    };
    outcome.report.config = serde_json::to_value(config).map_err(fclt_core::Error::from)?;
    finish(config, outcome)
}

fn finish(config: &CampaignConfig, outcome: CampaignOutcome) -> Result<RunOutcome, CliError> {
    let report_path = outcome.write_to(&config.out_dir)?;
    let r = &outcome.report;
    let mut written: Vec<PathBuf> = outcome.artifacts.iter().map(|a| config.out_dir.join(&a.name)).collect();
    written.push(report_path);
    Ok(RunOutcome {
        passed: r.passed,
        written,
        summary: format!(
            "{}: {} (statistic {:.6} vs threshold {}, control {})",
            r.test_name,
            if r.passed { "PASS" } else { "FAIL" },
            r.statistic,
            r.threshold,
            if r.control_rejected { "rejected" } else { "NOT rejected" }
        ),
    })
}

fn write_outputs(config: &CampaignConfig, files: Vec<(&str, String)>, summary: String) -> Result<RunOutcome, CliError> {
    fs::create_dir_all(&config.out_dir)?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = config.out_dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(RunOutcome {
        passed: true,
        written,
        summary,
    })
}

fn run_json(config: &CampaignConfig, artifacts: &[&str]) -> Result<String, CliError> {
    let v = json!({ "campaign": config.campaign, "artifacts": artifacts, "config": config });
    let mut s = serde_json::to_string_pretty(&v).map_err(fclt_core::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn run_sample(config: &CampaignConfig) -> Result<RunOutcome, CliError> {
    let xs = sample(&config.stable, &SeedStream::new(config.seed).split_named("draws"), config.n)?;
    let mut csv = String::from("index,value\n");
    for (i, x) in xs.iter().enumerate() {
        csv.push_str(&format!("{i},{x}\n"));
    }
    let meta = run_json(config, &["samples.csv"])?;
    write_outputs(
        config,
        vec![("samples.csv", csv), ("run.json", meta)],
        format!("sample: wrote {} draws", xs.len()),
    )
}

fn path_rows(csv: &mut String, rep: usize, path: &SamplePath) {
    for (t, v) in path.times().iter().zip(path.values()) {
        csv.push_str(&format!("{rep},{t},{v}\n"));
    }
}

/// Rescaled partial-sum paths and, when the function's domain allows it,
/// the functional statistic on the same draws.
fn run_paths(config: &CampaignConfig) -> Result<RunOutcome, CliError> {
    let spec = config.distribution;
    let (a_n, _) = norming_sequence(&spec, config.n as u64)?;
    let mu = spec.mu();
    let f = FunctionSpec::from_kind(config.function, mu)?;
    let with_functional = spec.is_positive() || f.domain().lo == f64::NEG_INFINITY;
    let stream = SeedStream::new(config.seed).split_named("paths");
    let paths: Vec<(SamplePath, Option<SamplePath>)> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let x = sample_doa(&spec, &stream.split(r as u64), config.n)?;
            let psp = partial_sum_process(&x, mu, a_n, config.grid)?;
            let fs = if with_functional {
                Some(functional_statistic(&x, &f, mu, a_n, config.grid)?)
            } else {
                None
            };
            Ok((psp, fs))
        })
        .collect::<fclt_core::Result<_>>()?;

    let mut psp_csv = String::from("rep,t,value\n");
    let mut fs_csv = String::from("rep,t,value\n");
    for (r, (psp, fs)) in paths.iter().enumerate() {
        path_rows(&mut psp_csv, r, psp);
        if let Some(fs) = fs {
            path_rows(&mut fs_csv, r, fs);
        }
    }
    let mut files = vec![("partial_sums.csv", psp_csv)];
    if with_functional {
        files.push(("functional.csv", fs_csv));
    }
    let names: Vec<&str> = files.iter().map(|f| f.0).collect();
    let meta = run_json(config, &names)?;
    files.push(("run.json", meta));
    write_outputs(config, files, format!("paths: wrote {} paths (a_n = {a_n})", config.reps))
}
