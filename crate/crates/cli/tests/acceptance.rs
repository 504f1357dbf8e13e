//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p fclt-cli --test acceptance`. Each criterion
//! records its own wall time against its budget; the process exits nonzero
//! if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use fclt_cli::{emit_plotdata, run, Campaign, CampaignConfig, RawConfig};
use fclt_core::functionals::{
    functional_statistic, integral_riemann, limit_law, log_product_statistic, product_statistic, FunctionSpec,
};
use fclt_core::norming::{karamata_partial_sum, mean_abs_deviation, norming_sequence, NormingSeq};
use fclt_core::numerics::gamma;
use fclt_core::paths::{partial_sum_process, sample_doa, DoaSpec, Family, SamplePath};
use fclt_core::stable::{cdf, char_fn, limit_constant, sample, scale_shift};
use fclt_core::verification::{
    empirical_char_fn, ks_one_sample, ks_two_sample, verify_lemma, verify_product, Ecdf, LemmaCampaign,
    ProductCampaign, VerificationReport,
};
use fclt_core::{SeedStream, StableParams};
use statrs::distribution::{ContinuousCDF, Normal};

const SEED: u64 = 42;

/// Collects failed expectations instead of panicking.
#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    notes: Vec<String>,
    checked: usize,
}

impl Tally {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        self.checked += 1;
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

struct Outcome {
    id: u8,
    title: &'static str,
    passed: bool,
    elapsed: Duration,
    budget: Duration,
    detail: String,
}

fn criterion(id: u8, title: &'static str, budget_secs: u64, body: impl FnOnce(&mut Tally)) -> Outcome {
    let start = Instant::now();
    let mut tally = Tally::default();
    let caught = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| body(&mut tally)));
    if let Err(p) = caught {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        tally.failures.push(format!("panicked: {msg}"));
    }
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    if elapsed > budget {
        tally
            .failures
            .push(format!("runtime {:.1}s over budget {budget_secs}s", elapsed.as_secs_f64()));
    }
    let mut detail = tally.notes.join("; ");
    if !tally.failures.is_empty() {
        detail = format!("{} | FAILURES: {}", detail, tally.failures.join("; "));
    }
    Outcome {
        id,
        title,
        passed: tally.failures.is_empty(),
        elapsed,
        budget,
        detail,
    }
}

fn config(campaign: Campaign, raw: RawConfig, out: &Path) -> CampaignConfig {
    let raw = RawConfig {
        seed: Some(SEED),
        out_dir: Some(out.to_path_buf()),
        ..raw
    };
    CampaignConfig::resolve(campaign, &raw).expect("valid acceptance config")
}

fn load_report(dir: &Path) -> VerificationReport {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

struct Runs {
    root: tempfile::TempDir,
    configs: Vec<(String, CampaignConfig)>,
}

impl Runs {
    fn dir(&self, label: &str) -> PathBuf {
        self.root.path().join(label)
    }

    fn run(&mut self, label: &str, campaign: Campaign, raw: RawConfig) -> VerificationReport {
        let cfg = config(campaign, raw, &self.dir(label));
        run(&cfg).expect("campaign runs");
        self.configs.push((label.to_string(), cfg));
        load_report(&self.dir(label))
    }
}

fn summarise_checks(t: &mut Tally, label: &str, r: &VerificationReport) {
    let stats: Vec<String> = r.checks.iter().map(|c| format!("{:.4}", c.statistic)).collect();
    t.note(format!(
        "{label}: [{}] <= {} control {:.4}",
        stats.join(", "),
        r.threshold,
        r.control.statistic
    ));
}

fn sampler_fidelity(runs: &mut Runs, t: &mut Tally) {
    for (alpha, beta) in [(2.0, 0.0), (1.5, 0.0), (1.5, 1.0), (1.2, 0.5)] {
        let start = Instant::now();
        let label = format!("sampler-{alpha}-{beta}");
        let r = runs.run(
            &label,
            Campaign::VerifySampler,
            RawConfig {
                alpha: Some(alpha),
                beta: Some(beta),
                n: Some(1_000_000),
                ..Default::default()
            },
        );
        let secs = start.elapsed().as_secs_f64();
        t.note(format!("({alpha},{beta}) sup {:.2e} in {secs:.1}s", r.checks[0].statistic));
        t.expect(r.checks[0].statistic < 5e-3, format!("({alpha},{beta}) sup {}", r.checks[0].statistic));
        t.expect(secs < 30.0, format!("({alpha},{beta}) took {secs:.1}s"));
    }
}

fn cdf_accuracy(t: &mut Tally) {
    let gauss = StableParams::standard(2.0, 0.0).unwrap();
    let cauchy = StableParams::standard(1.0, 0.0).unwrap();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let (mut worst_g, mut worst_c) = (0.0f64, 0.0f64);
    for i in -1000..=1000 {
        let x = i as f64 * 0.01;
        worst_g = worst_g.max((cdf(&gauss, x).unwrap() - normal.cdf(x)).abs());
        worst_c = worst_c.max((cdf(&cauchy, x).unwrap() - (0.5 + x.atan() / std::f64::consts::PI)).abs());
    }
    t.note(format!("gaussian {worst_g:.2e}, cauchy {worst_c:.2e}"));
    t.expect(worst_g < 1e-6, format!("gaussian error {worst_g}"));
    t.expect(worst_c < 1e-6, format!("cauchy error {worst_c}"));
}

fn remark_identity(runs: &mut Runs, t: &mut Tally) {
    for (alpha, beta) in [(2.0, 0.0), (1.5, 1.0)] {
        let label = format!("remark-{alpha}-{beta}");
        let r = runs.run(
            &label,
            Campaign::VerifyRemark,
            RawConfig {
                alpha: Some(alpha),
                beta: Some(beta),
                reps: Some(5000),
                grid: Some(4096),
                eps: Some(1.0 / 4096.0),
                ..Default::default()
            },
        );
        summarise_checks(t, &label, &r);
        t.expect(r.checks[0].statistic < 0.04, format!("{label} KS {}", r.checks[0].statistic));
    }
}

fn fclt_marginals(runs: &mut Runs, t: &mut Tally) {
    let r = runs.run(
        "fclt",
        Campaign::VerifyFclt,
        RawConfig {
            family: Some("exponential".into()),
            rate: Some(1.0),
            n: Some(10_000),
            reps: Some(5000),
            times: Some(vec![0.25, 0.5, 0.75, 1.0]),
            ..Default::default()
        },
    );
    summarise_checks(t, "fclt", &r);
    for c in &r.checks {
        let null = c.null.expect("distributional check");
        let time = c.t.unwrap();
        t.expect(
            (null.dispersion() - 2.0 * time).abs() < 1e-12 && null.is_gaussian(),
            format!("t {time}: null {null:?} is not N(0, 2t)"),
        );
        t.expect(c.statistic < 0.04, format!("t {time}: KS {}", c.statistic));
    }
}

fn heavy_tail_product(runs: &mut Runs, t: &mut Tally) {
    let r = runs.run(
        "product-pareto",
        Campaign::VerifyProduct,
        RawConfig {
            family: Some("pareto".into()),
            tail_index: Some(1.5),
            scale: Some(1.0),
            n: Some(10_000),
            reps: Some(5000),
            ..Default::default()
        },
    );
    summarise_checks(t, "pareto", &r);
    let null = r.checks[0].null.unwrap();
    t.expect(
        null.alpha() == 1.5 && null.beta() == 1.0 && (null.dispersion() - gamma(2.5)).abs() < 1e-12,
        format!("null {null:?}"),
    );
    t.expect(r.checks[0].statistic < 0.07, format!("KS {}", r.checks[0].statistic));
}

fn lemma_boundedness(runs: &mut Runs, t: &mut Tally) {
    for family in ["exponential", "pareto"] {
        let label = format!("lemma-{family}");
        let r = runs.run(
            &label,
            Campaign::VerifyLemma,
            RawConfig {
                family: Some(family.into()),
                tail_index: Some(1.5),
                ns: Some(vec![100, 1000, 10_000]),
                reps: Some(2000),
                ..Default::default()
            },
        );
        let profile = r.details["profile"].as_array().unwrap();
        let top = profile.last().unwrap()["ratio"].as_f64().unwrap();
        let mut cells = Vec::new();
        for p in profile {
            let (ratio, lo, hi) = (
                p["ratio"].as_f64().unwrap(),
                p["ratio_lower"].as_f64().unwrap(),
                p["ratio_upper"].as_f64().unwrap(),
            );
            cells.push(format!("{}: {ratio:.3} [{lo:.3}, {hi:.3}]", p["n"]));
            t.expect(hi.is_finite() && lo <= ratio && ratio <= hi, format!("{label}: missing CI"));
            t.expect(
                ratio <= 2.0 * top && ratio >= top / 2.0,
                format!("{label} n={}: ratio {ratio} vs top {top}", p["n"]),
            );
        }
        t.note(format!("{family} {}", cells.join(", ")));
        t.expect(r.checks.iter().all(|c| c.passed), format!("{label} checks failed"));
    }
}

/// Tanh-sinh on (0, 1); `f` receives `ln x`.
fn tanh_sinh_log(f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / 128.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    for k in -576i64..=576 {
        let s = k as f64 * h;
        let v = half_pi * s.sinh();
        let ln_x = -(-2.0 * v).exp().ln_1p();
        let w = half_pi * s.cosh() / (2.0 * v.cosh().powi(2));
        let y = f(ln_x);
        if y.is_finite() && w > 0.0 {
            sum += w * y;
        }
    }
    sum * h
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn exact_identities(t: &mut Tally) {
    t.expect(close(gamma(3.0).sqrt(), 2f64.sqrt(), 1e-15), "Γ(3)^½ = √2");
    t.expect(close(limit_constant(2.0).unwrap(), 2f64.sqrt(), 1e-15), "limit constant at 2");
    for alpha in [1.1, 1.5, 2.0] {
        let q = tanh_sinh_log(|ln_x| (-ln_x).powf(alpha));
        t.expect(close(q, gamma(alpha + 1.0), 1e-8), format!("∫(−log x)^{alpha} = {q}"));
    }

    // Log-space bridge between the product and the functional statistic.
    let spec = DoaSpec::exponential(1.0).unwrap();
    let x = sample_doa(&spec, &SeedStream::new(SEED), 10_000).unwrap();
    let a_n = 100.0;
    let qi = FunctionSpec::qi_log(1.0).unwrap();
    let path = functional_statistic(&x, &qi, 1.0, a_n, 1).unwrap();
    let at_one = path.eval(1.0).unwrap();
    let log_prod = log_product_statistic(&x, 1.0, 1.0 / a_n).unwrap();
    t.expect(close(log_prod, at_one, 1e-12), format!("bridge {log_prod} vs {at_one}"));
    t.expect(
        close(product_statistic(&x, 1.0, 1.0 / a_n).unwrap().ln(), at_one, 1e-12),
        "product statistic in log space",
    );

    // Characteristic function and scaling.
    let params = [
        StableParams::standard(2.0, 0.0).unwrap(),
        StableParams::new(1.5, 1.0, 2.0, 0.3).unwrap(),
        StableParams::new(1.0, -0.5, 1.0, 1.0).unwrap(),
    ];
    for p in &params {
        let phi0 = char_fn(p, 0.0).unwrap();
        t.expect(phi0.re == 1.0 && phi0.im == 0.0, format!("φ(0) for {p:?}"));
    }
    let std2 = params[0];
    t.expect(scale_shift(&std2, 1.0, 0.0).unwrap() == std2, "scale_shift identity");
    let scaled = scale_shift(&std2, 3.0, 1.0).unwrap();
    t.expect(close(scaled.dispersion(), 9.0, 1e-12) && scaled.location() == 1.0, "Gaussian scaling");

    // Samplers.
    let g5 = StableParams::gaussian(5.0, 1.0).unwrap();
    let draws = sample(&g5, &SeedStream::new(SEED), 1_000_000).unwrap();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    t.expect(close(mean, 5.0, 5e-3), format!("Gaussian mean {mean}"));
    let exp_draws = sample_doa(&spec, &SeedStream::new(SEED + 1), 1_000_000).unwrap();
    let exp_mean = exp_draws.iter().sum::<f64>() / exp_draws.len() as f64;
    t.expect(close(exp_mean, 1.0, 3e-3), format!("Exponential mean {exp_mean}"));
    let g2 = DoaSpec::new(Family::ExactStable {
        params: StableParams::new(2.0, 0.0, 1.0, 2.0).unwrap(),
    })
    .unwrap();
    let gd = sample_doa(&g2, &SeedStream::new(SEED + 2), 1_000_000).unwrap();
    let gm = gd.iter().sum::<f64>() / gd.len() as f64;
    let gv = gd.iter().map(|v| (v - gm).powi(2)).sum::<f64>() / (gd.len() - 1) as f64;
    t.expect(close(gv, 1.0, 5e-3), format!("exact-stable Gaussian variance {gv}"));

    // CDF and limit constants.
    t.expect(close(cdf(&std2, 0.0).unwrap(), 0.5, 1e-12), "Gaussian median");
    t.expect(
        close(cdf(&StableParams::standard(1.0, 0.0).unwrap(), 1.0).unwrap(), 0.75, 1e-9),
        "Cauchy at 1",
    );
    t.expect(close(limit_constant(1.0 + 1e-12).unwrap(), 1.0, 1e-10), "limit constant near 1");

    // Paths and norming.
    let mu_path = partial_sum_process(&[2.0; 50], 2.0, 1.0, 16).unwrap();
    t.expect(mu_path.values().iter().all(|&v| v == 0.0), "centred constants");
    let early = partial_sum_process(&[5.0, -1.0, 3.0, 7.0], 0.0, 1.0, 16).unwrap();
    t.expect(
        early.eval(0.0).unwrap() == 0.0 && early.eval(0.24).unwrap() == 0.0,
        "empty sum before 1/n",
    );
    let stable_spec = DoaSpec::new(Family::ExactStable {
        params: StableParams::standard(1.5, 1.0).unwrap(),
    })
    .unwrap();
    t.expect(close(norming_sequence(&stable_spec, 8).unwrap().0, 4.0, 1e-12), "exact-stable a_8 = 4");
    let linear = NormingSeq::custom(spec, "linear", |k| k as f64);
    t.expect(karamata_partial_sum(&linear, 1000) == 1000.0, "Σ a_k/k with a_k = k");
    let constant = DoaSpec::new(Family::Constant { value: 2.0 }).unwrap();
    t.expect(
        mean_abs_deviation(&constant, 100, 10, &SeedStream::new(1)).unwrap().mean == 0.0,
        "degenerate mean absolute deviation",
    );

    // Functionals.
    let fpath = functional_statistic(&[2.0; 20], &FunctionSpec::qi_log(2.0).unwrap(), 2.0, 1.0, 8).unwrap();
    t.expect(fpath.values().iter().all(|&v| v == 0.0), "functional statistic of constants");
    t.expect(product_statistic(&[2.0; 20], 2.0, 0.5).unwrap() == 1.0, "product of constants");
    let zero = SamplePath::uniform(vec![0.0; 4097]).unwrap();
    t.expect(integral_riemann(&zero, 1.0, 1.0 / 4096.0).unwrap() == 0.0, "Riemann of zero path");
    let identity = SamplePath::uniform((0..=4096).map(|j| j as f64 / 4096.0).collect()).unwrap();
    let one = integral_riemann(&identity, 1.0, 1.0 / 4096.0).unwrap();
    t.expect(close(one, 1.0, 1e-2), format!("Riemann of x/x = {one}"));
    t.expect(limit_law(1.5, 1.0, 1.0, 0.0).is_err(), "f′ = 0 rejected");

    // Statistics.
    let e = Ecdf::new(&[3.0]).unwrap();
    t.expect(e.eval(2.999) == 0.0 && e.eval(3.0) == 1.0, "single-sample ECDF");
    t.expect(Ecdf::new(&[1.0, 2.0]).unwrap().eval(1.5) == 0.5, "ECDF at 1.5");
    let a = [1.0, 2.0, 3.0];
    t.expect(ks_two_sample(&a, &a).unwrap().statistic == 0.0, "KS of equal samples");
    t.expect(ks_two_sample(&a, &[10.0, 11.0]).unwrap().statistic == 1.0, "KS of disjoint samples");
    let median = ks_one_sample(&[0.0; 20], |x| cdf(&std2, x)).unwrap().statistic;
    t.expect(close(median, 0.5, 1e-12), "KS of samples at the median");
    t.expect(empirical_char_fn(&a, 0.0).unwrap() == num_one(), "ECF at 0");
    t.expect(empirical_char_fn(&[0.0], 2.7).unwrap() == num_one(), "ECF of {0}");

    // Campaign preconditions.
    let lemma = verify_lemma(&LemmaCampaign::new(constant, vec![10, 100], 10, 1)).unwrap();
    let zero_ratio = lemma.report.details["profile"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["ratio"].as_f64() == Some(0.0));
    t.expect(zero_ratio, "lemma ratio of X ≡ μ");
    let two_sided = DoaSpec::new(Family::TwoSidedPareto {
        tail_index: 1.5,
        asymmetry: 0.0,
    })
    .unwrap();
    t.expect(
        matches!(
            verify_product(&ProductCampaign::new(two_sided, 100, 10, 1)),
            Err(fclt_core::Error::Config(_))
        ),
        "product of a non-positive family",
    );

    // CLI contracts.
    let tmp = tempfile::tempdir().unwrap();
    let bad = RawConfig {
        alpha: Some(1.5),
        beta: Some(1.0),
        n: Some(0),
        out_dir: Some(tmp.path().join("bad")),
        ..Default::default()
    };
    let err = CampaignConfig::resolve(Campaign::Sample, &bad).map(|c| run(&c));
    t.expect(
        matches!(&err, Err(e) if e.exit_code() != 0) && !tmp.path().join("bad").exists(),
        "sample with n = 0",
    );
    let fclt_dir = tmp.path().join("fclt");
    let small = config(
        Campaign::VerifyFclt,
        RawConfig {
            n: Some(200),
            reps: Some(200),
            times: Some(vec![0.25, 0.5, 0.75, 1.0]),
            ..Default::default()
        },
        &fclt_dir,
    );
    run(&small).unwrap();
    let written = emit_plotdata(&load_report(&fclt_dir), &fclt_dir, &fclt_dir.join("plots")).unwrap();
    t.expect(written.len() == 4, format!("{} overlay files for 4 times", written.len()));
    for f in &written {
        let xs: Vec<f64> = fs::read_to_string(f)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        t.expect(xs.windows(2).all(|w| w[0] <= w[1]), "overlay x monotone");
    }
    let mut empty = load_report(&fclt_dir);
    empty.artifacts.clear();
    t.expect(emit_plotdata(&empty, &fclt_dir, tmp.path()).is_err(), "empty-artifact report");
    t.note(format!("{} identities checked", t.checked));
}

fn num_one() -> fclt_core::ComplexValue {
    fclt_core::ComplexValue::new(1.0, 0.0)
}

fn negative_controls(runs: &Runs, t: &mut Tally) {
    let mut rejected = 0;
    for (label, _) in &runs.configs {
        let r = load_report(&runs.dir(label));
        t.expect(r.control_rejected, format!("{label}: control not rejected"));
        t.expect(r.passed == (r.checks.iter().all(|c| c.passed) && r.control_rejected), format!("{label}: verdict"));
        if r.control_rejected {
            rejected += 1;
        }
    }
    // The explicit example: α = 2 Riemann integrals against N(0, 1).
    let r = load_report(&runs.dir("remark-2-0"));
    let wrong = r.control.null.unwrap();
    t.expect(
        wrong.is_gaussian() && close(wrong.dispersion(), 1.0, 1e-12) && !r.control.passed,
        "α = 2 against N(0, 1) must fail",
    );
    t.note(format!(
        "{rejected}/{} controls rejected; N(0,1) KS {:.4}",
        runs.configs.len(),
        r.control.statistic
    ));
}

fn determinism(runs: &Runs, t: &mut Tally) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let mut compared = 0;
    for (label, cfg) in &runs.configs {
        let again = CampaignConfig {
            out_dir: runs.dir(&format!("{label}-rerun")),
            ..cfg.clone()
        };
        pool.install(|| run(&again)).unwrap();
        for entry in fs::read_dir(&cfg.out_dir).unwrap() {
            let name = entry.unwrap().file_name();
            let a = fs::read(cfg.out_dir.join(&name)).unwrap();
            let b = fs::read(again.out_dir.join(&name)).unwrap();
            t.expect(a == b, format!("{label}/{} differs on rerun", name.to_string_lossy()));
            compared += 1;
        }
    }
    t.note(format!("{} runs, {compared} files byte-identical on 2 threads", runs.configs.len()));
}

fn main() {
    let mut runs = Runs {
        root: tempfile::tempdir().unwrap(),
        configs: Vec::new(),
    };
    let mut outcomes = vec![
        criterion(1, "sampler fidelity", 4 * 30, |t| sampler_fidelity(&mut runs, t)),
        criterion(2, "CDF inversion accuracy", 60, cdf_accuracy),
        criterion(3, "Riemann-integral identity", 300, |t| remark_identity(&mut runs, t)),
        criterion(4, "functional-statistic marginals", 300, |t| fclt_marginals(&mut runs, t)),
        criterion(5, "heavy-tail product limit", 300, |t| heavy_tail_product(&mut runs, t)),
        criterion(6, "bounded normalised deviation sums", 600, |t| lemma_boundedness(&mut runs, t)),
        criterion(7, "exact identities", 300, exact_identities),
    ];
    outcomes.push(criterion(8, "negative controls", 60, |t| negative_controls(&runs, t)));
    outcomes.push(criterion(9, "determinism", 1200, |t| determinism(&runs, t)));

    println!();
    for o in &outcomes {
        println!(
            "{} [{}] {} ({:.1}s of {}s) {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.elapsed.as_secs_f64(),
            o.budget.as_secs(),
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
