use std::fmt::Write as _;
use std::path::Path;

use bohr_chowla::averaging::checkpoint_series;
use bohr_chowla::beatty::{partition_irrational_pair, partition_rational_pair, PartitionKind, DEFAULT_WINDOW};
use bohr_chowla::bohr::{empirical_density, remove_rational_dependencies, theoretical_density, trig_approximation};
use bohr_chowla::correlator::{
    correlate, kbsz_check, kpoint_scaffold, rational_limit_predict, verify_kpoint, verify_pretentious_product,
    CorrelationReport, Expectation, IndependencePolicy, Verdict,
};
use bohr_chowla::multfunc::{liouville_sieve, DEFAULT_SEGMENT};
use bohr_chowla::realfield::{AffineForm, ExactReal};
use clap::ValueEnum;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{emit_csv, emit_plot_script};

pub type AnyResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    RationalCase,
    IrrationalCase,
    PretentiousProduct,
    Kbsz,
}

/// Key/value lines printed after a run.
#[derive(Default)]
pub struct Summary {
    rows: Vec<(String, String)>,
}

impl Summary {
    pub fn add(&mut self, k: impl Into<String>, v: impl ToString) {
        self.rows.push((k.into(), v.to_string()));
    }

    pub fn render(&self) -> String {
        let w = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in &self.rows {
            let _ = writeln!(s, "{:<w$}  {}", k, v, w = w);
        }
        s
    }
}

pub struct Outcome {
    pub verdict: Verdict,
    pub summary: Summary,
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

fn describe_factors(cfg: &ExperimentConfig) -> String {
    cfg.factors
        .iter()
        .map(|f| format!("{}(floor({} n + {}))", f.f.name(), f.seq.alpha(), f.seq.beta()))
        .collect::<Vec<_>>()
        .join(" * ")
}

/// Adds the standard report lines and writes `[output]` artifacts.
fn report_lines(cfg: &ExperimentConfig, rep: &CorrelationReport, title: &str, s: &mut Summary) -> AnyResult<()> {
    s.add("X_max", cfg.raw.run.x_max);
    s.add("empirical (H_X)", complex(rep.final_normalized));
    s.add("empirical (ln X)", complex(rep.final_value));
    if let Some(n) = rep.series.last_natural() {
        s.add("natural average", complex(n));
    }
    if let Some(p) = rep.predicted_value {
        s.add("predicted", complex(p));
    }
    if let Some(src) = &rep.provenance {
        s.add("prediction basis", src);
    }
    let trend: Vec<String> = rep.decade_moduli().iter().map(|(x, v)| format!("{}:{:.4}", x, v)).collect();
    s.add("decade moduli", trend.join(" "));
    s.add("max modulus", format!("{:.6}", rep.max_modulus()));
    s.add("note", &rep.note);
    write_artifacts(cfg, rep, title, s)
}

fn write_artifacts(cfg: &ExperimentConfig, rep: &CorrelationReport, title: &str, s: &mut Summary) -> AnyResult<()> {
    let csv = cfg.output_path(&cfg.raw.output.csv);
    let plot = cfg.output_path(&cfg.raw.output.plot);
    if plot.is_some() && csv.is_none() {
        return Err(ConfigError::new("output.plot", "a plot script needs output.csv").into());
    }
    if let Some(c) = &csv {
        emit_csv(rep, c)?;
        s.add("csv", c.display());
    }
    if let (Some(c), Some(p)) = (&csv, &plot) {
        emit_plot_script(rep, c, p, title)?;
        s.add("plot script", p.display());
    }
    Ok(())
}

pub fn sieve(limit: u64, out: &Path) -> AnyResult<Outcome> {
    let table = liouville_sieve(limit, DEFAULT_SEGMENT)?;
    table.write_cache(out)?;
    let mut s = Summary::default();
    s.add("limit", limit);
    s.add("summatory L(limit)", table.summatory(limit));
    s.add("cache", out.display());
    s.add("bytes", std::fs::metadata(out)?.len());
    Ok(Outcome { verdict: Verdict::Consistent, summary: s })
}

pub fn run_correlate(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    cfg.require_factors(None)?;
    let mut rep = correlate(&cfg.spec()?)?;
    rep.judge(&cfg.expectation()?);
    let mut s = Summary::default();
    s.add("command", "correlate");
    s.add("factors", describe_factors(cfg));
    if !cfg.twist.is_zero() {
        s.add("twist", &cfg.twist);
    }
    if let Some(b) = &cfg.restriction {
        s.add("restriction", b.label());
    }
    report_lines(cfg, &rep, "logarithmic correlation", &mut s)?;
    s.add("verdict", rep.verdict.as_str());
    Ok(Outcome { verdict: rep.verdict, summary: s })
}

pub fn run_bohr(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    let b = cfg.restriction.as_ref().ok_or_else(|| ConfigError::new("restriction", "the bohr command needs a [restriction]"))?;
    let opts = &cfg.raw.bohr;
    let mut s = Summary::default();
    let mut ok = true;
    s.add("command", "bohr");
    s.add("set", b.label());

    let theo = theoretical_density(b).ok().map(|d| d.value);
    match theo {
        Some(d) => s.add("theoretical density", format!("{:.9}", d)),
        None => s.add("theoretical density", "unavailable"),
    }
    let emp = empirical_density(b, opts.limit)?;
    s.add(format!("empirical density (n <= {})", opts.limit), format!("{:.9}", emp.value));

    let dec = remove_rational_dependencies(b)?;
    let mut mismatches = 0u64;
    for n in 1..=opts.limit as i64 {
        if dec.contains(n)? != b.contains(n)? {
            mismatches += 1;
        }
    }
    ok &= mismatches == 0;
    s.add("decomposition mismatches", mismatches);

    for &eps in &opts.epsilons {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(ConfigError::new("bohr.epsilons", format!("{} is outside (0, 1/2)", eps)).into());
        }
        let mut t = trig_approximation(b, eps)?;
        let l1 = t.validate(b, opts.limit)?;
        let l1_ok = l1 <= 1.5 * eps;
        let mut line = format!("L1 {:.5} (limit {:.5}) {}", l1, 1.5 * eps, if l1_ok { "ok" } else { "FAIL" });
        if let (Some(d), false) = (theo, t.periodic.is_empty()) {
            let mass = t.periodic.iter().sum::<f64>() / t.q as f64;
            let gap = (mass - d).abs();
            let mass_ok = gap <= t.periodic_mass_error + 1e-12;
            ok &= mass_ok;
            let _ = write!(line, "; periodic mass {:.6}, gap {:.2e} vs bound {:.2e}", mass, gap, t.periodic_mass_error);
        }
        ok &= l1_ok;
        s.add(format!("eps = {}", eps), line);
    }

    let series = checkpoint_series(|n| b.contains(n as i64).map(|v| v as u8 as f64).unwrap_or(f64::NAN), cfg.raw.run.x_max, cfg.raw.run.checkpoint_ratio)?;
    let rep = CorrelationReport::from_series(series);
    let gap = (rep.final_normalized - rep.series.last_natural().unwrap_or_default()).norm();
    let avg_ok = gap <= opts.averaging_tolerance;
    ok &= avg_ok;
    s.add("X_max", cfg.raw.run.x_max);
    s.add("|log - natural|", format!("{:.6} (tolerance {})", gap, opts.averaging_tolerance));
    write_artifacts(cfg, &rep, "Bohr set indicator averages", &mut s)?;
    let verdict = if ok { Verdict::Consistent } else { Verdict::Inconsistent };
    s.add("verdict", verdict.as_str());
    Ok(Outcome { verdict, summary: s })
}

pub fn run_partition(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    cfg.require_factors(Some(2))?;
    let (s1, s2) = (&cfg.factors[0].seq, &cfg.factors[1].seq);
    let window = cfg.raw.partition.window.unwrap_or(DEFAULT_WINDOW);
    let ratio = s1.alpha().try_div(s2.alpha())?.to_rational();
    let part = match ratio {
        None => partition_irrational_pair(s1, s2, cfg.raw.partition.epsilon.unwrap_or(0.1))?,
        Some(r) => {
            let (p, q) = match (r.numer().to_u64(), r.denom().to_u64()) {
                (Some(p), Some(q)) => (p, q),
                _ => return Err(ConfigError::new("factor", format!("slope ratio {} is not a positive ratio of u64s", r)).into()),
            };
            let theta = s1.alpha().mul_rational(&num_rational::BigRational::new(1.into(), p.into()));
            partition_rational_pair(p, q, &theta, s1.beta(), s2.beta())?
        }
    };
    let rep = part.verify(window)?;
    let mut s = Summary::default();
    s.add("command", "partition");
    match &part.kind {
        PartitionKind::IrrationalRatio { grid, .. } => s.add("kind", format!("irrational ratio, grid {}", grid)),
        PartitionKind::RationalRatio { p, q, theta, .. } => s.add("kind", format!("rational ratio p/q = {}/{}, theta = {}", p, q, theta)),
    }
    s.add("pieces", part.pieces.len());
    s.add("window", format!("[-{}, {}]", window, window));
    s.add("checked", rep.checked);
    s.add("coverage failures", rep.coverage_failures);
    s.add("identity failures", rep.identity_failures);
    s.add("grid mismatches", rep.grid_mismatches);
    s.add("unexplained mismatches", rep.unexplained_mismatches);
    s.add("error-set density", format!("{:.6}", rep.error_set_density()));
    let verdict = if rep.ok() { Verdict::Consistent } else { Verdict::Inconsistent };
    s.add("verdict", verdict.as_str());
    Ok(Outcome { verdict, summary: s })
}

pub fn run_verify(recipe: Recipe, cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    match recipe {
        Recipe::RationalCase => rational_case(cfg),
        Recipe::IrrationalCase => irrational_case(cfg),
        Recipe::PretentiousProduct => pretentious_product(cfg),
        Recipe::Kbsz => kbsz(cfg),
    }
}

fn rational_case(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    cfg.require_factors(Some(2))?;
    let (a, b) = (&cfg.factors[0], &cfg.factors[1]);
    if a.f.name() != b.f.name() {
        return Err(ConfigError::new("factor[1].function", "both factors must use the same function").into());
    }
    let pr = rational_limit_predict(&a.f, &a.seq, &b.seq)?;
    let mut rep = correlate(&cfg.spec()?)?;
    let tolerance = cfg.raw.expect.tolerance.unwrap_or(0.05);
    rep.judge(&Expectation::Value { value: Complex64::new(pr.value, 0.0), tolerance, note: pr.note.clone() });
    let mut s = Summary::default();
    s.add("command", "verify rational-case");
    s.add("factors", describe_factors(cfg));
    s.add("p/q", format!("{}/{}", pr.p, pr.q));
    s.add("theta", &pr.theta);
    s.add("density(B0)", &pr.b0_density);
    report_lines(cfg, &rep, "rational-ratio correlation", &mut s)?;
    s.add("verdict", rep.verdict.as_str());
    Ok(Outcome { verdict: rep.verdict, summary: s })
}

fn irrational_case(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    cfg.require_factors(Some(2))?;
    let (a, b) = (&cfg.factors[0].seq, &cfg.factors[1].seq);
    if a.alpha().try_div(b.alpha())?.is_rational() {
        return Err(ConfigError::new("factor[1].alpha", "slope ratio is rational; use rational-case").into());
    }
    let mut rep = correlate(&cfg.spec()?)?;
    let e = &cfg.raw.expect;
    rep.judge(&Expectation::Small { threshold: e.threshold.unwrap_or(0.1), slack: e.slack.unwrap_or(0.02) });
    let mut s = Summary::default();
    s.add("command", "verify irrational-case");
    s.add("factors", describe_factors(cfg));
    report_lines(cfg, &rep, "irrational-ratio correlation", &mut s)?;
    s.add("verdict", rep.verdict.as_str());
    Ok(Outcome { verdict: rep.verdict, summary: s })
}

fn pretentious_product(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    cfg.require_factors(None)?;
    let policy = match cfg.raw.verify.policy.as_deref() {
        None | Some("require") => IndependencePolicy::Require,
        Some("report-only") => IndependencePolicy::ReportOnly,
        Some(p) => return Err(ConfigError::new("verify.policy", format!("`{}` is neither require nor report-only", p)).into()),
    };
    let fs: Vec<_> = cfg.factors.iter().map(|f| f.f.clone()).collect();
    let alpha: Vec<_> = cfg.factors.iter().map(|f| f.seq.alpha().clone()).collect();
    let beta: Vec<_> = cfg.factors.iter().map(|f| f.seq.beta().clone()).collect();
    let tolerance = cfg.raw.expect.tolerance.unwrap_or(0.02);
    let rep = verify_pretentious_product(&fs, &alpha, &beta, cfg.raw.run.x_max, tolerance, policy)?;
    let mut s = Summary::default();
    s.add("command", "verify pretentious-product");
    s.add("factors", describe_factors(cfg));
    s.add("marginal means", rep.marginals.iter().map(|&m| complex(m)).collect::<Vec<_>>().join(", "));
    s.add("marginal log means", rep.log_marginals.iter().map(|&m| complex(m)).collect::<Vec<_>>().join(", "));
    s.add("product of marginals", complex(rep.product));
    s.add("relations", format!("{:?}", rep.relations));
    s.add("|joint - product|", format!("{:.6}", rep.gap()));
    report_lines(cfg, &rep.joint, "joint average vs product of marginals", &mut s)?;
    s.add("verdict", rep.joint.verdict.as_str());
    Ok(Outcome { verdict: rep.joint.verdict, summary: s })
}

fn kbsz(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    cfg.require_factors(Some(1))?;
    let fc = &cfg.factors[0];
    let pairs: Vec<(u64, u64)> =
        cfg.raw.verify.pairs.as_ref().map(|v| v.iter().map(|[p, q]| (*p, *q)).collect()).unwrap_or_else(|| vec![(2, 3), (2, 5), (3, 5)]);
    let twist = AffineForm::new(&cfg.twist, &ExactReal::zero(&cfg.field))?;
    let twisted = !cfg.twist.is_zero();
    let a = |n: u64| -> Complex64 {
        let v = fc.seq.eval(n as i64).map(|m| fc.f.eval(m)).unwrap_or(f64::NAN);
        if twisted {
            let t = twist.floor_and_frac(n as i64).map(|(_, fr)| fr.to_f64()).unwrap_or(f64::NAN);
            Complex64::from_polar(v, std::f64::consts::TAU * t)
        } else {
            Complex64::new(v, 0.0)
        }
    };
    let entries = kbsz_check(a, &pairs, cfg.raw.run.x_max)?;
    let mut s = Summary::default();
    s.add("command", "verify kbsz");
    s.add("sequence", describe_factors(cfg));
    s.add("X_max", cfg.raw.run.x_max);
    let mut worst = 0.0f64;
    for e in &entries {
        if !e.report.final_normalized.is_finite() {
            return Err("sequence evaluation failed".into());
        }
        worst = worst.max(e.modulus());
        s.add(format!("(p, q) = ({}, {})", e.p, e.q), format!("{} |.| = {:.6}", complex(e.report.final_normalized), e.modulus()));
    }
    let verdict = match cfg.raw.expect.threshold {
        Some(t) if worst <= t => Verdict::Consistent,
        _ => Verdict::Inconclusive,
    };
    s.add("note", "finite-X diagnostic; the orthogonality criterion concerns limits");
    if let Some(e) = entries.first() {
        write_artifacts(cfg, &e.report, &format!("correlation at primes {}, {}", e.p, e.q), &mut s)?;
    }
    s.add("verdict", verdict.as_str());
    Ok(Outcome { verdict, summary: s })
}

pub fn run_kpoint(cfg: &ExperimentConfig) -> AnyResult<Outcome> {
    cfg.require_factors(None)?;
    for (i, f) in cfg.factors.iter().enumerate() {
        if !f.seq.beta().is_zero() {
            return Err(ConfigError::new(format!("factor[{}].beta", i), "k-point runs use zero shifts").into());
        }
    }
    let k = &cfg.raw.kpoint;
    let alpha: Vec<_> = cfg.factors.iter().map(|f| f.seq.alpha().clone()).collect();
    let fs: Vec<_> = cfg.factors.iter().map(|f| f.f.clone()).collect();
    let w = cfg.kpoint_w()?;
    let sc = kpoint_scaffold(&alpha, w.as_deref(), k.r.unwrap_or(2))?;
    let rep = verify_kpoint(&sc, &fs, cfg.raw.run.x_max, k.eta.unwrap_or(0.01))?;
    let mut s = Summary::default();
    s.add("command", "kpoint");
    s.add("factors", describe_factors(cfg));
    s.add("relation lattice", format!("{:?}", sc.v_basis));
    s.add("q, r", format!("{}, {}", sc.q, sc.r));
    if let Some(w) = &sc.w {
        s.add("w", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
        s.add("relabeling", format!("{:?}", sc.permutation));
    }
    if let Some((lo, hi)) = &sc.witness_c {
        s.add("witness interval", format!("({}, {})", lo, hi));
    }
    s.add("B density", format!("{:.6e}", sc.density()));
    let id = &rep.identities;
    s.add(
        "floor identities",
        format!(
            "{} members up to {}; failures: first {}, rest {}{}",
            id.members,
            id.window,
            id.first_failures,
            id.rest_failures,
            id.coprime_failures.map(|c| format!(", coprime {}", c)).unwrap_or_default()
        ),
    );
    s.add("reduced relative", format!("{:.6}", rep.reduced_relative));
    report_lines(cfg, &rep.correlation, "k-point correlation", &mut s)?;
    let verdict = if id.all_hold() { rep.correlation.verdict } else { Verdict::Inconsistent };
    s.add("verdict", verdict.as_str());
    Ok(Outcome { verdict, summary: s })
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Consistent => 0,
        Verdict::Inconsistent => 2,
        Verdict::Inconclusive => 3,
    }
}
