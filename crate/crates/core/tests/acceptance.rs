//! Acceptance suite. Every check prints one `PASS` or `FAIL` line and each
//! criterion asserts only after all of its lines have been printed.
//!
//! Run with `cargo test -p normcorr-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use normcorr::distributions::{cumulant_row, sample_from, study_alternatives};
use normcorr::moments::{self, central_moments};
use normcorr::montecarlo::{power_study, with_workers};
use normcorr::statistics::{compute, jackknife_z2, jackknife_z3, z2_prime, z3_prime_radicand};
use normcorr::theory::{rho2, rho3};
use normcorr::{AlternativeSpec, Error, PowerStudyConfig, RngStream, Sample, StatisticKind};

const SEED: u64 = 20_240_601;

struct Verdict {
    criterion: &'static str,
    failures: Vec<String>,
}

impl Verdict {
    fn new(criterion: &'static str) -> Self {
        Verdict { criterion, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        println!("{} [{}] {}", if ok { "PASS" } else { "FAIL" }, self.criterion, line);
        if !ok {
            self.failures.push(line);
        }
    }

    fn finish(self) {
        assert!(
            self.failures.is_empty(),
            "{} failed {} check(s):\n{}",
            self.criterion,
            self.failures.len(),
            self.failures.join("\n")
        );
    }
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

#[test]
fn criterion_1_cumulant_table() {
    const NA: Option<f64> = None;
    let s = Some;
    // gamma, kappa, lim rho2, lim rho3 as printed, "-" as None
    let printed: [(&str, [Option<f64>; 4]); 25] = [
        ("Normal", [s(0.0), s(0.0), s(0.0), s(0.0)]),
        ("chi2(1)", [s(2.82), s(12.0), s(0.75), s(0.46)]),
        ("Exponential", [s(2.0), s(6.0), s(0.71), s(0.41)]),
        ("chi2(4)", [s(1.41), s(3.0), s(0.63), s(0.33)]),
        ("Weib(1/2,1)", [s(6.62), s(84.72), s(0.71), s(0.36)]),
        ("Weib(2,1)", [s(0.63), s(0.25), s(0.42), s(0.07)]),
        ("LN(sigma=1/4)", [s(0.78), s(1.10), s(0.32), s(0.21)]),
        ("LN(sigma=1/2)", [s(1.75), s(5.90), s(0.53), s(0.33)]),
        ("Beta(1/2,1/2)", [s(0.0), s(-1.5), s(0.0), s(-0.95)]),
        ("Uniform", [s(0.0), s(-1.2), s(0.0), s(-0.84)]),
        ("Beta(2,2)", [s(0.0), s(-0.86), s(0.0), s(-0.59)]),
        ("Beta(3,3)", [s(0.0), s(-2.0 / 3.0), s(0.0), s(-0.43)]),
        ("Beta(1,2)", [s(0.57), s(-0.6), s(0.48), s(-0.34)]),
        ("Beta(2,3)", [s(0.29), s(-0.64), s(0.25), s(-0.39)]),
        ("Cauchy", [NA, NA, NA, NA]),
        ("t(2)", [NA, NA, NA, NA]),
        ("t(3)", [NA, NA, NA, NA]),
        ("t(4)", [s(0.0), NA, NA, NA]),
        ("t(5)", [s(0.0), s(6.0), s(0.0), NA]),
        ("t(6)", [s(0.0), s(3.0), s(0.0), NA]),
        ("Laplace", [s(0.0), s(3.0), s(0.0), s(0.38)]),
        ("Logistic", [s(0.0), s(1.2), s(0.0), s(0.25)]),
        ("1/2 N(0,1) + 1/2 N(1,1)", [s(0.0), s(-0.08), s(0.0), s(-0.03)]),
        ("1/2 N(0,1) + 1/2 N(4,1)", [s(0.0), s(-1.28), s(0.0), s(-0.78)]),
        ("9/10 N(0,1) + 1/10 N(4,1)", [s(1.2), s(1.78), s(0.62), s(0.44)]),
    ];
    let columns = ["gamma", "kappa", "lim rho2", "lim rho3"];

    let start = Instant::now();
    let alternatives = study_alternatives();
    let mut v = Verdict::new("1 cumulant table");
    v.check(alternatives.len() == printed.len(), format!("{} rows", alternatives.len()));
    for (alt, (label, expected)) in alternatives.iter().zip(&printed) {
        assert_eq!(alt.label, *label);
        let row = cumulant_row(&alt.spec).unwrap();
        let got = [row.gamma, row.kappa, row.rho2_limit, row.rho3_limit];
        for ((column, g), e) in columns.iter().zip(got).zip(expected) {
            let ok = match (g, e) {
                (Some(g), Some(e)) => (g - e).abs() <= 0.005,
                (None, None) => true,
                _ => false,
            };
            v.check(ok, format!("{label} {column}: computed {} printed {} (tol 0.005)", show(g), show(*e)));
        }
    }
    let elapsed = start.elapsed();
    v.check(elapsed < Duration::from_secs(1), format!("runtime {elapsed:?} < 1s"));
    v.finish();
}

/// Pearson correlation from accumulated sums.
#[derive(Clone, Copy, Default)]
struct Moments2 {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Moments2 {
    fn push(mut self, x: f64, y: f64) -> Self {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
        self
    }

    fn merge(self, o: Self) -> Self {
        Moments2 {
            n: self.n + o.n,
            sx: self.sx + o.sx,
            sy: self.sy + o.sy,
            sxx: self.sxx + o.sxx,
            syy: self.syy + o.syy,
            sxy: self.sxy + o.sxy,
        }
    }

    fn corr(&self) -> f64 {
        let cxy = self.sxy - self.sx * self.sy / self.n;
        let cxx = self.sxx - self.sx * self.sx / self.n;
        let cyy = self.syy - self.sy * self.sy / self.n;
        cxy / (cxx * cyy).sqrt()
    }
}

#[test]
fn criterion_2_mean_moment_correlations() {
    let start = Instant::now();
    let n = 20;
    let reps = 200_000u64;
    let pop = AlternativeSpec::Exponential.population_cumulants().unwrap();
    let r2 = rho2(&pop, n).unwrap();
    let r3 = rho3(&pop, n).unwrap();

    let (var_sums, mu3_sums) = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = sample_from(&AlternativeSpec::Exponential, n, RngStream::new(SEED, r)).unwrap();
            let m = central_moments(&x);
            (m.mean, m.s2_unbiased().unwrap(), m.mu3_unbiased().unwrap())
        })
        .fold(
            || (Moments2::default(), Moments2::default()),
            |(a, b), (mean, s2, mu3)| (a.push(mean, s2), b.push(mean, mu3)),
        )
        .reduce(|| (Moments2::default(), Moments2::default()), |a, b| (a.0.merge(b.0), a.1.merge(b.1)));

    let mut v = Verdict::new("2 mean-moment correlations");
    v.check((r2 - 0.7025).abs() < 5e-5, format!("rho2(exp, 20) = {r2:.5}, printed 0.7025"));
    v.check((r3 - 0.4029).abs() < 5e-5, format!("rho3(exp, 20) = {r3:.5}, printed 0.4029"));
    let c2 = var_sums.corr();
    let c3 = mu3_sums.corr();
    v.check((c2 - r2).abs() <= 0.01, format!("corr(mean, S^2) = {c2:.4} vs {r2:.4} (tol 0.01)"));
    v.check((c3 - r3).abs() <= 0.01, format!("corr(mean, mu3) = {c3:.4} vs {r3:.4} (tol 0.01)"));
    let elapsed = start.elapsed();
    v.check(elapsed < Duration::from_secs(60), format!("runtime {elapsed:?} < 60s"));
    v.finish();
}

fn study(alternatives: &[&str], tests: &[&str], n: usize, replications: usize) -> PowerStudyConfig {
    PowerStudyConfig {
        alternatives: alternatives.iter().map(|a| a.parse().unwrap()).collect(),
        tests: tests.iter().map(|t| t.parse().unwrap()).collect(),
        n_values: vec![n],
        alpha: 0.05,
        replications,
        null_replications: 100_000,
        seed: SEED,
    }
}

#[test]
fn criterion_3_power_reproduction() {
    let start = Instant::now();
    // (alternative, test, label, printed power)
    let n20 = [
        ("exp", "z2p", "Z2'", 0.89),
        ("exp", "z2p:two-sided", "|Z2'|", 0.82),
        ("chisq(4)", "z2p", "Z2'", 0.68),
        ("laplace", "z3p", "Z3'", 0.35),
        ("uniform", "z3p", "Z3'", 0.46),
        ("cauchy", "z3p", "Z3'", 0.89),
        ("lognormal(0.5)", "lm:upper:chi2", "LM (chi2)", 0.33),
    ];
    let n50 = [
        ("uniform", "z3p", "Z3'", 0.96),
        ("t(3)", "z3p", "Z3'", 0.74),
        ("beta(1,2)", "z2p", "Z2'", 0.75),
    ];

    let mut v = Verdict::new("3 power");
    for (n, cells) in [(20, &n20[..]), (50, &n50[..])] {
        let mut alts: Vec<&str> = cells.iter().map(|c| c.0).collect();
        alts.dedup();
        let mut tests: Vec<&str> = cells.iter().map(|c| c.1).collect();
        tests.sort();
        tests.dedup();
        let report = power_study(&study(&alts, &tests, n, 20_000)).unwrap();
        for &(alt, _, label, printed) in cells {
            let name = alt.parse::<AlternativeSpec>().unwrap().to_string();
            let cell = report.cell(&name, label, n).unwrap();
            v.check(
                (cell.rejection_rate - printed).abs() <= 0.02,
                format!(
                    "{name} {label} n={n} tail={}: {:.4} +- {:.4} (printed {printed:.2}, tol 0.02)",
                    cell.tail, cell.rejection_rate, cell.mc_std_error
                ),
            );
        }
    }
    let elapsed = start.elapsed();
    v.check(elapsed < Duration::from_secs(600), format!("runtime {elapsed:?} < 600s"));
    v.finish();
}

#[test]
fn criterion_4_size() {
    let mut tests = Vec::new();
    for kind in StatisticKind::ALL {
        for tail in ["upper", "lower", "two-sided"] {
            if kind == StatisticKind::Lm && tail != "upper" {
                continue;
            }
            tests.push(format!("{}:{tail}", kind.name()));
        }
    }
    let tests: Vec<&str> = tests.iter().map(String::as_str).collect();
    let mut v = Verdict::new("4 size");
    for n in [20, 50] {
        let report = power_study(&study(&["normal"], &tests, n, 20_000)).unwrap();
        for cell in &report.cells {
            v.check(
                (cell.rejection_rate - 0.05).abs() <= 0.01,
                format!("{} ({}) n={n}: {:.4}", cell.label, cell.tail, cell.rejection_rate),
            );
        }
        let asymptotic = power_study(&study(&["normal"], &["lm:upper:chi2"], n, 20_000)).unwrap();
        println!(
            "INFO [4 size] LM with the chi-square(2) cutoff, n={n}: {:.4} (not a calibrated test)",
            asymptotic.cells[0].rejection_rate
        );
    }
    v.finish();
}

/// Random samples of size 3..=200 from several shapes, a fifth of them
/// supported on exactly two values.
fn corpus(count: u64) -> Vec<Vec<f64>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(SEED ^ 0x5eed, i).rng();
            let n = rng.random_range(3..=200usize);
            let loc: f64 = rng.random_range(-5.0..5.0);
            let scale: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
            let pick = |rng: &mut rand_chacha::ChaCha8Rng, spec: &str| {
                let spec: AlternativeSpec = spec.parse().unwrap();
                let sampler = spec.sampler().unwrap();
                (0..n).map(|_| loc + scale * sampler.draw(rng)).collect::<Vec<f64>>()
            };
            let mut x = match i % 5 {
                0 => {
                    let (a, b) = (loc, loc + scale);
                    let p: f64 = rng.random_range(0.0..1.0);
                    (0..n).map(|_| if rng.random_bool(p) { a } else { b }).collect()
                }
                1 => pick(&mut rng, "normal"),
                2 => pick(&mut rng, "exp"),
                3 => pick(&mut rng, "t(3)"),
                _ => pick(&mut rng, "beta(0.5,0.5)"),
            };
            if i % 5 == 0 && x.iter().all(|&v| v == x[0]) {
                x[0] = loc + scale;
                x[1] = loc;
            }
            x
        })
        .collect()
}

#[test]
fn criterion_5ab_empirical_bounds() {
    let samples = corpus(100_000);
    let mut v = Verdict::new("5a/5b sample bounds");
    let mut two_point = 0;
    let (mut bad_i, mut bad_ii, mut bad_z2, mut bad_rad) = (0, 0, 0, 0);
    for x in &samples {
        let sample = Sample::new(x.clone()).unwrap();
        let cum = moments::cumulants(&sample).unwrap();
        let mut distinct = x.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        two_point += usize::from(distinct.len() == 2);
        bad_i += usize::from(cum.slack_i() < -1e-9);
        bad_ii += usize::from(cum.slack_ii() < -1e-9);
        bad_z2 += usize::from(z2_prime(&cum).unwrap().value.abs() >= 1.0);
        bad_rad += usize::from(z3_prime_radicand(&cum) <= 0.0);
    }
    v.check(two_point >= 10_000, format!("{two_point} two-point samples in the corpus of {}", samples.len()));
    v.check(bad_i == 0, format!("kappa+2-gamma^2 >= -1e-9: {bad_i} violations"));
    v.check(bad_ii == 0, format!("lambda+9(kappa+gamma^2)+6-kappa^2 >= -1e-9: {bad_ii} violations"));
    v.check(bad_z2 == 0, format!("|Z2'| < 1: {bad_z2} violations"));
    v.check(bad_rad == 0, format!("Z3' radicand > 0: {bad_rad} violations"));
    v.finish();
}

#[test]
fn criterion_5c_affine_invariance() {
    let samples = corpus(20_000);
    let mut v = Verdict::new("5c affine invariance");
    // absolute error, and error scaled by max(1, |T|)
    let mut worst = vec![(0.0f64, 0.0f64); StatisticKind::ALL.len()];
    let mut mismatched_errors = 0;
    for (i, x) in samples.iter().enumerate() {
        let mut rng = RngStream::new(SEED ^ 0xaff1, i as u64).rng();
        let a: f64 = rng.random_range(-10.0..10.0);
        let b: f64 = rng.random_range(0.1..10.0) * if i % 2 == 0 { 1.0 } else { -1.0 };
        let y: Vec<f64> = x.iter().map(|&t| a + b * t).collect();
        let (sx, sy) = (Sample::new(x.clone()).unwrap(), Sample::new(y).unwrap());
        for (k, kind) in StatisticKind::ALL.into_iter().enumerate() {
            if x.len() < kind.min_n() {
                continue;
            }
            let flip = if b < 0.0 && kind.is_skewness_type() { -1.0 } else { 1.0 };
            match (compute(kind, &sx), compute(kind, &sy)) {
                (Ok(p), Ok(q)) => {
                    let err = (flip * p.value - q.value).abs();
                    let (abs, scaled) = worst[k];
                    worst[k] = (abs.max(err), scaled.max(err / p.value.abs().max(1.0)));
                }
                (Err(Error::PerfectCorrelation { r: p }), Err(Error::PerfectCorrelation { r: q })) => {
                    mismatched_errors += usize::from(flip * p != q)
                }
                (Err(Error::DegenerateSample(_)), Err(Error::DegenerateSample(_))) => {}
                _ => mismatched_errors += 1,
            }
        }
    }
    for (kind, (abs, scaled)) in StatisticKind::ALL.iter().zip(&worst) {
        v.check(
            *scaled <= 1e-10,
            format!("{kind}: max |T(a+bX) - sign T(X)| / max(1, |T|) = {scaled:.3e}, absolute {abs:.3e} (tol 1e-10)"),
        );
    }
    v.check(mismatched_errors == 0, format!("{mismatched_errors} samples change outcome class"));
    v.finish();
}

/// Naive leave-one-out transcription, independent of the library's O(n) path.
mod naive {
    fn delete_one(x: &[f64], i: usize) -> Vec<f64> {
        x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect()
    }

    fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    fn fisher_corr(x: &[f64], y: &[f64]) -> f64 {
        let (mx, my) = (mean(x), mean(y));
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        let r = sxy / (sxx * syy).sqrt();
        0.5 * ((1.0 + r) / (1.0 - r)).ln()
    }

    pub fn z2(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let y: Vec<f64> = (0..x.len())
            .map(|i| {
                let rest = delete_one(x, i);
                let m = mean(&rest);
                (rest.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 2.0)).cbrt()
            })
            .collect();
        fisher_corr(x, &y)
    }

    pub fn z3(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let y: Vec<f64> = (0..x.len())
            .map(|i| {
                let rest = delete_one(x, i);
                let m = mean(&rest);
                rest.iter().map(|v| (v - m).powi(3)).sum::<f64>() / (n - 1.0)
            })
            .collect();
        fisher_corr(x, &y)
    }
}

#[test]
fn criterion_5d_jackknife_oracle() {
    let mut v = Verdict::new("5d jackknife oracle");
    let (mut worst2, mut worst3, mut compared) = (0.0f64, 0.0f64, 0);
    for i in 0..1000u64 {
        let mut rng = RngStream::new(SEED ^ 0x0dd, i).rng();
        let n = rng.random_range(4..=200usize);
        let spec = ["normal", "exp", "uniform", "laplace"][i as usize % 4];
        let x = sample_from(&spec.parse().unwrap(), n, RngStream::new(SEED ^ 0x0de, i)).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs());
        if let (Ok(a), Ok(b)) = (jackknife_z2(&x), jackknife_z3(&x)) {
            worst2 = worst2.max(rel(a.value, naive::z2(x.values())));
            worst3 = worst3.max(rel(b.value, naive::z3(x.values())));
            compared += 1;
        }
    }
    v.check(compared == 1000, format!("{compared} of 1000 samples compared"));
    v.check(worst2 <= 1e-12, format!("Z2 max |fast - naive| / (1 + |fast|) = {worst2:.3e} (tol 1e-12)"));
    v.check(worst3 <= 1e-12, format!("Z3 max |fast - naive| / (1 + |fast|) = {worst3:.3e} (tol 1e-12)"));
    v.finish();
}

#[test]
fn criterion_6_worker_count_determinism() {
    let config = PowerStudyConfig::from_toml_str(
        r#"
        alternatives = ["exp", "uniform", "t(3)", "mix(0.9,0,4)"]
        tests = ["z2p", "z2p:two-sided", "z3p", "z2", "z3", "sqrtb1", "b2", "lm", "lm:upper:chi2"]
        n_values = [20, 50]
        alpha = 0.05
        replications = 5000
        null_replications = 10000
        seed = 7
        "#,
    )
    .unwrap();
    let one = with_workers(1, || power_study(&config)).unwrap().unwrap();
    let four = with_workers(4, || power_study(&config)).unwrap().unwrap();
    let mut v = Verdict::new("6 determinism");
    v.check(one.to_json() == four.to_json(), "JSON report, 1 vs 4 workers".into());
    v.check(one.to_csv() == four.to_csv(), "CSV report, 1 vs 4 workers".into());
    v.finish();
}
