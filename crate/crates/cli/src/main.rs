use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fclt_cli::{emit_plotdata, exit_code, run, Campaign, CampaignConfig, CliError, RawConfig};
use fclt_core::verification::VerificationReport;

#[derive(Parser)]
#[command(name = "fclt", version, about = "Seeded verification campaigns for partial-sum limit theorems")]
struct Cli {
    /// Worker threads; results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw from a stable law
    Sample(RawConfig),
    /// Simulate rescaled partial-sum and functional-statistic paths
    Paths(RawConfig),
    /// Riemann integral of a Lévy path against its closed-form law
    VerifyRemark(RawConfig),
    /// Marginals of the functional statistic
    VerifyFclt(RawConfig),
    /// Normalised sums of mean absolute deviations stay bounded
    VerifyLemma(RawConfig),
    /// Log product of partial sums
    VerifyProduct(RawConfig),
    /// Empirical against analytic characteristic function
    VerifySampler(RawConfig),
    /// ECDF overlays from a finished report
    Plotdata {
        /// Path to report.json
        report: PathBuf,
        /// Defaults to the report's directory
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn plotdata(report: PathBuf, out_dir: Option<PathBuf>) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(&report)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", report.display())))?;
    let parsed: VerificationReport =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", report.display())))?;
    let dir = report.parent().map(PathBuf::from).unwrap_or_default();
    let written = emit_plotdata(&parsed, &dir, out_dir.as_deref().unwrap_or(&dir))?;
    for p in &written {
        println!("{}", p.display());
    }
    Ok(written.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let (campaign, flags) = match cli.command {
        Command::Plotdata { report, out_dir } => {
            return match plotdata(report, out_dir) {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            };
        }
        Command::Sample(f) => (Campaign::Sample, f),
        Command::Paths(f) => (Campaign::Paths, f),
        Command::VerifyRemark(f) => (Campaign::VerifyRemark, f),
        Command::VerifyFclt(f) => (Campaign::VerifyFclt, f),
        Command::VerifyLemma(f) => (Campaign::VerifyLemma, f),
        Command::VerifyProduct(f) => (Campaign::VerifyProduct, f),
        Command::VerifySampler(f) => (Campaign::VerifySampler, f),
    };
    let result = CampaignConfig::from_flags(campaign, &flags).and_then(|c| run(&c));
    match &result {
        Ok(o) => println!("{}", o.summary),
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}
