use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::AlternativeSpec;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, label_hash, RngStream};
use crate::statistics::{evaluate_into, Calibration, Outcome, StatisticKind, Tail};

use super::{check_alpha, chi_square2_critical, rejects, simulate_null, NullSample, TestSpec};

const ALTERNATIVE_LABEL: u64 = 0x616c_7400;

/// Which tail `auto` picks, in words, echoed into every report.
pub const TAIL_RULE: &str = "auto: lm upper; z2p and sqrtb1 lower if the population skewness is \
negative, otherwise upper; z3p and b2 lower if the population excess kurtosis is negative, \
otherwise upper (diverging kurtosis counts as positive); the jackknife z2 and z3 use the \
opposite tail, since they correlate x_i with a replicate that excludes x_i";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerStudyConfig {
    pub alternatives: Vec<AlternativeSpec>,
    pub tests: Vec<TestSpec>,
    pub n_values: Vec<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub replications: usize,
    pub null_replications: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_alpha() -> f64 {
    0.05
}

impl PowerStudyConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PowerStudyConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.alternatives.is_empty() {
            return Err(Error::InvalidConfig("no alternatives".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::InvalidConfig("no tests".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("no sample sizes".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be positive".into()));
        }
        if self.null_replications < super::MIN_NULL_REPLICATIONS {
            return Err(Error::InvalidConfig(format!(
                "null_replications must be at least {}, got {}",
                super::MIN_NULL_REPLICATIONS,
                self.null_replications
            )));
        }
        check_alpha(self.alpha)?;
        for alt in &self.alternatives {
            alt.validate()?;
        }
        for test in &self.tests {
            test.validate()?;
        }
        let min = self.tests.iter().map(|t| t.kind.min_n()).max().unwrap_or(2);
        if let Some(&n) = self.n_values.iter().find(|&&n| n < min) {
            return Err(Error::InvalidN { n, min });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub alternative: String,
    pub test: String,
    pub label: String,
    pub kind: StatisticKind,
    pub tail: Tail,
    pub calibration: Calibration,
    pub n: usize,
    pub critical_value: f64,
    pub replications: usize,
    /// Replications where the statistic was defined and finite.
    pub valid: usize,
    pub rejections: usize,
    /// Replications excluded because the statistic was undefined or a
    /// jackknife correlation was exactly +-1.
    pub degenerate_count: usize,
    pub rejection_rate: f64,
    pub mc_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub config: PowerStudyConfig,
    pub tail_rule: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub meta: ReportMeta,
    pub cells: Vec<PowerCell>,
}

impl PowerReport {
    pub fn cell(&self, alternative: &str, label: &str, n: usize) -> Option<&PowerCell> {
        self.cells.iter().find(|c| c.alternative == alternative && c.label == label && c.n == n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "alternative",
            "test",
            "label",
            "kind",
            "tail",
            "calibration",
            "n",
            "critical_value",
            "replications",
            "valid",
            "rejections",
            "degenerate_count",
            "rejection_rate",
            "mc_std_error",
        ])
        .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                c.alternative.clone(),
                c.test.clone(),
                c.label.clone(),
                c.kind.name().to_string(),
                c.tail.name().to_string(),
                c.calibration.name().to_string(),
                c.n.to_string(),
                c.critical_value.to_string(),
                c.replications.to_string(),
                c.valid.to_string(),
                c.rejections.to_string(),
                c.degenerate_count.to_string(),
                c.rejection_rate.to_string(),
                c.mc_std_error.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Null distributions for every Monte Carlo-calibrated statistic at one `n`.
struct NullSet {
    kinds: Vec<StatisticKind>,
    samples: Vec<NullSample>,
}

impl NullSet {
    fn build(tests: &[TestSpec], n: usize, replications: usize, seed: u64) -> Result<Self> {
        let mut kinds: Vec<StatisticKind> = tests
            .iter()
            .filter(|t| t.calibration == Calibration::MonteCarlo)
            .map(|t| t.kind)
            .collect();
        kinds.sort();
        kinds.dedup();
        let samples =
            if kinds.is_empty() { Vec::new() } else { simulate_null(&kinds, n, replications, seed)? };
        Ok(NullSet { kinds, samples })
    }

    fn threshold(&self, test: &TestSpec, tail: Tail, alpha: f64) -> Result<f64> {
        match test.calibration {
            Calibration::ChiSquare2 => chi_square2_critical(alpha),
            Calibration::MonteCarlo => {
                let i = self.kinds.iter().position(|&k| k == test.kind).expect("kind calibrated");
                self.samples[i].threshold(alpha, tail)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    valid: usize,
    rejections: usize,
}

fn alternative_seed(seed: u64, alt: &AlternativeSpec, n: usize) -> u64 {
    derive_seed(seed, &[ALTERNATIVE_LABEL, label_hash(&alt.to_string()), n as u64])
}

/// Simulate `replications` samples from `alt` and evaluate `kinds` on each,
/// folding the outcomes with `step` into a per-worker accumulator.
#[allow(clippy::too_many_arguments)]
fn simulate<A, F, M>(
    alt: &AlternativeSpec,
    n: usize,
    kinds: &[StatisticKind],
    replications: usize,
    seed: u64,
    init: fn() -> A,
    step: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    F: Fn(&mut A, &[Outcome]) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let sampler = alt.sampler()?;
    let stream_seed = alternative_seed(seed, alt, n);
    Ok((0..replications)
        .into_par_iter()
        .fold(
            || (init(), vec![0.0; n], Vec::with_capacity(kinds.len())),
            |(mut acc, mut buf, mut out), r| {
                let mut rng = RngStream::new(stream_seed, r as u64).rng();
                sampler.fill(&mut rng, &mut buf);
                evaluate_into(kinds, &buf, &mut out);
                step(&mut acc, &out);
                (acc, buf, out)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(init, merge))
}

/// Rejection counts for every cell of the study, on the current rayon pool.
///
/// Use [`super::with_workers`] to pin the number of threads; the report is
/// identical for any worker count.
pub fn power_study(config: &PowerStudyConfig) -> Result<PowerReport> {
    config.validate()?;
    let mut kinds: Vec<StatisticKind> = config.tests.iter().map(|t| t.kind).collect();
    kinds.sort();
    kinds.dedup();

    let mut cells = Vec::new();
    for &n in &config.n_values {
        let nulls = NullSet::build(&config.tests, n, config.null_replications, config.seed)?;
        for alt in &config.alternatives {
            let pop = alt.population_cumulants()?;
            let mut rules = Vec::with_capacity(config.tests.len());
            for test in &config.tests {
                let tail = test.resolve_tail(&pop);
                let threshold = nulls.threshold(test, tail, config.alpha)?;
                let slot = kinds.binary_search(&test.kind).expect("kind listed");
                rules.push((slot, tail, threshold));
            }

            let width = rules.len();
            let tallies = simulate(
                alt,
                n,
                &kinds,
                config.replications,
                config.seed,
                Vec::new,
                |acc: &mut Vec<Tally>, out| {
                    acc.resize(width, Tally::default());
                    for (t, &(slot, tail, threshold)) in acc.iter_mut().zip(&rules) {
                        if let Outcome::Value(v) = out[slot] {
                            t.valid += 1;
                            t.rejections += usize::from(rejects(v, threshold, tail));
                        }
                    }
                },
                |mut a, b| {
                    a.resize(width, Tally::default());
                    for (x, y) in a.iter_mut().zip(b) {
                        x.valid += y.valid;
                        x.rejections += y.rejections;
                    }
                    a
                },
            )?;

            for (i, (test, &(_, tail, threshold))) in config.tests.iter().zip(&rules).enumerate() {
                let t = tallies.get(i).copied().unwrap_or_default();
                let p = if t.valid > 0 { t.rejections as f64 / t.valid as f64 } else { f64::NAN };
                cells.push(PowerCell {
                    alternative: alt.to_string(),
                    test: test.to_string(),
                    label: test.label(tail),
                    kind: test.kind,
                    tail,
                    calibration: test.calibration,
                    n,
                    critical_value: threshold,
                    replications: config.replications,
                    valid: t.valid,
                    rejections: t.rejections,
                    degenerate_count: config.replications - t.valid,
                    rejection_rate: p,
                    mc_std_error: (p * (1.0 - p) / t.valid as f64).sqrt(),
                });
            }
        }
    }
    Ok(PowerReport {
        meta: ReportMeta {
            config: config.clone(),
            tail_rule: TAIL_RULE.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        cells,
    })
}

/// How often two tests reach the same decision on shared samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// Replications where both statistics were defined.
    pub compared: usize,
    pub agreements: usize,
    pub fraction: f64,
}

/// Decision agreement of tests `a` and `b` at level `alpha` on samples of
/// size `n` drawn from `alt`.
pub fn decision_agreement(
    alt: &AlternativeSpec,
    n: usize,
    a: TestSpec,
    b: TestSpec,
    config: &AgreementConfig,
) -> Result<Agreement> {
    check_alpha(config.alpha)?;
    alt.validate()?;
    let tests = [a, b];
    let nulls = NullSet::build(&tests, n, config.null_replications, config.seed)?;
    let pop = alt.population_cumulants()?;
    let rule = |t: &TestSpec| -> Result<(Tail, f64)> {
        let tail = t.resolve_tail(&pop);
        Ok((tail, nulls.threshold(t, tail, config.alpha)?))
    };
    let (tail_a, thr_a) = rule(&a)?;
    let (tail_b, thr_b) = rule(&b)?;
    let kinds = [a.kind, b.kind];
    let (compared, agreements) = simulate(
        alt,
        n,
        &kinds,
        config.replications,
        config.seed,
        || (0usize, 0usize),
        |acc: &mut (usize, usize), out| {
            if let (Outcome::Value(x), Outcome::Value(y)) = (out[0], out[1]) {
                acc.0 += 1;
                acc.1 += usize::from(rejects(x, thr_a, tail_a) == rejects(y, thr_b, tail_b));
            }
        },
        |x, y| (x.0 + y.0, x.1 + y.1),
    )?;
    Ok(Agreement { compared, agreements, fraction: agreements as f64 / compared as f64 })
}

/// Simulation sizes for [`decision_agreement`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementConfig {
    pub alpha: f64,
    pub replications: usize,
    pub null_replications: usize,
    pub seed: u64,
}

/// Rejection rates keyed by `(alternative, label, n)`, handy for lookups.
pub fn rates(report: &PowerReport) -> BTreeMap<(String, String, usize), f64> {
    report
        .cells
        .iter()
        .map(|c| ((c.alternative.clone(), c.label.clone(), c.n), c.rejection_rate))
        .collect()
}
