//! Null calibration and power studies.
//!
//! Every simulated sample is addressed by a derived seed and its replication
//! index (see [`crate::rng`]), and all aggregation is either indexed or an
//! integer count, so results do not depend on how rayon splits the work.

mod power;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distributions::AlternativeSpec;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngStream};
use crate::statistics::{evaluate_into, Calibration, StatisticKind, Tail, TestStatistic};
use crate::theory::PopulationCumulants;

pub use power::{
    decision_agreement, power_study, rates, Agreement, AgreementConfig, PowerCell, PowerReport,
    PowerStudyConfig, ReportMeta, TAIL_RULE,
};

/// Smallest accepted number of null replications.
pub const MIN_NULL_REPLICATIONS: usize = 1000;

/// Seed label for null (standard normal) samples.
const NULL_LABEL: u64 = 0x6e75_6c6c;

/// Run `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Tail selection for a test inside a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailChoice {
    Fixed(Tail),
    /// Pick the tail from the alternative's population cumulants.
    Auto,
}

/// A statistic together with its rejection region and calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TestSpec {
    pub kind: StatisticKind,
    pub tail: TailChoice,
    pub calibration: Calibration,
}

impl TestSpec {
    pub fn new(kind: StatisticKind, tail: Tail) -> Self {
        TestSpec { kind, tail: TailChoice::Fixed(tail), calibration: Calibration::MonteCarlo }
    }

    pub fn auto(kind: StatisticKind) -> Self {
        TestSpec { kind, tail: TailChoice::Auto, calibration: Calibration::MonteCarlo }
    }

    pub fn chi_square(self) -> Self {
        TestSpec { calibration: Calibration::ChiSquare2, ..self }
    }

    /// Concrete tail against an alternative.
    ///
    /// `LM` always uses the upper tail. Skewness-type statistics follow the
    /// sign of the population skewness and kurtosis-type statistics the sign
    /// of the excess kurtosis: negative means the lower tail, zero or positive
    /// the upper tail. A kurtosis that diverges counts as positive, and a
    /// skewness that diverges (only symmetric laws here) as zero.
    ///
    /// The jackknife statistics correlate `x_i` with a replicate computed
    /// without `x_i`, so they move against the cumulant and the tails swap.
    pub fn resolve_tail(&self, pop: &PopulationCumulants) -> Tail {
        match self.tail {
            TailChoice::Fixed(t) => t,
            TailChoice::Auto => {
                let cumulant = match self.kind {
                    StatisticKind::Lm => return Tail::Upper,
                    k if k.is_skewness_type() => pop.skewness(),
                    _ => pop.excess_kurtosis(),
                };
                let negative = matches!(cumulant, Some(c) if c < 0.0);
                if negative != self.kind.is_jackknife() {
                    Tail::Lower
                } else {
                    Tail::Upper
                }
            }
        }
    }

    /// Conventional label, e.g. `|Z2'|` for a two-sided `Z2'`.
    pub fn label(&self, tail: Tail) -> String {
        let symbol = self.kind.symbol();
        let base = match tail {
            Tail::TwoSided if self.kind != StatisticKind::Lm => format!("|{symbol}|"),
            _ => symbol.to_string(),
        };
        match self.calibration {
            Calibration::MonteCarlo => base,
            Calibration::ChiSquare2 => format!("{base} (chi2)"),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.calibration == Calibration::ChiSquare2
            && (self.kind != StatisticKind::Lm || self.tail == TailChoice::Fixed(Tail::Lower)
                || self.tail == TailChoice::Fixed(Tail::TwoSided))
        {
            return Err(Error::InvalidTest(format!(
                "chi-square calibration applies to the upper tail of lm only, not `{self}`"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for TestSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tail = match self.tail {
            TailChoice::Fixed(t) => t.name(),
            TailChoice::Auto => "auto",
        };
        write!(f, "{}:{}", self.kind, tail)?;
        if self.calibration != Calibration::MonteCarlo {
            write!(f, ":{}", self.calibration)?;
        }
        Ok(())
    }
}

/// Parses `kind[:tail[:calibration]]`, e.g. `z2p`, `z3p:lower`, `lm:upper:chi2`.
/// The tail defaults to `auto`.
impl FromStr for TestSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind: StatisticKind = parts.next().unwrap_or_default().parse()?;
        let tail = match parts.next().map(|t| t.trim().to_ascii_lowercase()) {
            None => TailChoice::Auto,
            Some(t) if t == "auto" => TailChoice::Auto,
            Some(t) => TailChoice::Fixed(t.parse()?),
        };
        let calibration = match parts.next() {
            None => Calibration::MonteCarlo,
            Some(c) => c.parse()?,
        };
        if parts.next().is_some() {
            return Err(Error::InvalidTest(format!("too many fields in `{s}`")));
        }
        let spec = TestSpec { kind, tail, calibration };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for TestSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TestSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// `ceil(t)` that treats values within rounding noise of an integer as that integer.
fn stable_ceil(t: f64) -> usize {
    let r = t.round();
    if (t - r).abs() < 1e-9 * t.max(1.0) {
        r as usize
    } else {
        t.ceil() as usize
    }
}

fn stable_floor(t: f64) -> usize {
    let r = t.round();
    if (t - r).abs() < 1e-9 * t.max(1.0) {
        r as usize
    } else {
        t.floor() as usize
    }
}

/// Simulated null distribution of one statistic, sorted ascending.
///
/// Perfect jackknife correlations enter as `+-inf`; degenerate samples are
/// dropped and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSample {
    sorted: Vec<f64>,
    sorted_abs: Vec<f64>,
    degenerate: usize,
}

impl NullSample {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.retain(|v| !v.is_nan());
        values.sort_by(f64::total_cmp);
        let mut sorted_abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        sorted_abs.sort_by(f64::total_cmp);
        NullSample { sorted: values, sorted_abs, degenerate: 0 }
    }

    fn with_degenerate(values: Vec<f64>, degenerate: usize) -> Self {
        NullSample { degenerate, ..NullSample::new(values) }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate
    }

    /// Empirical critical value.
    ///
    /// With `m` ordered values `v_(1) <= ... <= v_(m)`: the upper tail uses
    /// `v_(ceil((1-alpha) m))`, the lower tail `v_(floor(alpha m) + 1)`, and the
    /// two-sided test the `ceil((1-alpha) m)`-th smallest `|v|`.
    pub fn threshold(&self, alpha: f64, tail: Tail) -> Result<f64> {
        check_alpha(alpha)?;
        let m = self.len();
        if (m as f64) * alpha.min(1.0 - alpha) < 10.0 {
            return Err(Error::Underpowered { replications: m, alpha });
        }
        let upper_rank = stable_ceil((1.0 - alpha) * m as f64).clamp(1, m);
        let value = match tail {
            Tail::Upper => self.sorted[upper_rank - 1],
            Tail::Lower => self.sorted[(stable_floor(alpha * m as f64) + 1).clamp(1, m) - 1],
            Tail::TwoSided => self.sorted_abs[upper_rank - 1],
        };
        Ok(value)
    }

    /// Monte Carlo p-value `(1 + #{null at least as extreme}) / (m + 1)`.
    pub fn p_value(&self, observed: f64, tail: Tail) -> f64 {
        let m = self.len();
        let extreme = match tail {
            Tail::Upper => m - self.sorted.partition_point(|&v| v < observed),
            Tail::Lower => self.sorted.partition_point(|&v| v <= observed),
            Tail::TwoSided => {
                let a = observed.abs();
                m - self.sorted_abs.partition_point(|&v| v < a)
            }
        };
        (1 + extreme) as f64 / (m + 1) as f64
    }
}

/// Whether `value` falls in the rejection region beyond `threshold`.
pub fn rejects(value: f64, threshold: f64, tail: Tail) -> bool {
    match tail {
        Tail::Upper => value > threshold,
        Tail::Lower => value < threshold,
        Tail::TwoSided => value.abs() > threshold,
    }
}

pub fn p_value(observed: &TestStatistic, tail: Tail, null: &NullSample) -> f64 {
    null.p_value(observed.value, tail)
}

/// Upper `alpha` quantile of chi-square with two degrees of freedom.
pub fn chi_square2_critical(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-2.0 * alpha.ln())
}

/// Seed of the null-sample set used for size `n`.
pub fn null_seed(seed: u64, n: usize) -> u64 {
    derive_seed(seed, &[NULL_LABEL, n as u64])
}

/// Simulate `replications` standard normal samples of size `n` and evaluate
/// every statistic in `kinds` on each. All statistics share the same samples.
pub fn simulate_null(
    kinds: &[StatisticKind],
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<NullSample>> {
    if replications < MIN_NULL_REPLICATIONS {
        return Err(Error::InvalidConfig(format!(
            "null replications must be at least {MIN_NULL_REPLICATIONS}, got {replications}"
        )));
    }
    if let Some(k) = kinds.iter().find(|k| n < k.min_n()) {
        return Err(Error::InvalidN { n, min: k.min_n() });
    }
    let sampler = AlternativeSpec::Normal.sampler()?;
    let stream_seed = null_seed(seed, n);
    let width = kinds.len();
    let mut flat = vec![0.0; replications * width];
    flat.par_chunks_mut(width.max(1)).enumerate().for_each_init(
        || (vec![0.0; n], Vec::with_capacity(width)),
        |(buf, out), (r, slot)| {
            let mut rng = RngStream::new(stream_seed, r as u64).rng();
            sampler.fill(&mut rng, buf);
            evaluate_into(kinds, buf, out);
            for (dst, o) in slot.iter_mut().zip(out.iter()) {
                *dst = o.ordered_value().unwrap_or(f64::NAN);
            }
        },
    );
    Ok((0..width)
        .map(|k| {
            let column: Vec<f64> = flat.iter().skip(k).step_by(width).copied().collect();
            let degenerate = column.iter().filter(|v| v.is_nan()).count();
            NullSample::with_degenerate(column, degenerate)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub kind: StatisticKind,
    pub n: usize,
    pub alpha: f64,
    pub tail: Tail,
    /// For `TwoSided`, a threshold on `|statistic|`.
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationMeta {
    pub null_replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueTable {
    pub entries: Vec<CriticalValue>,
    pub meta: CalibrationMeta,
}

impl CriticalValueTable {
    pub fn get(&self, kind: StatisticKind, n: usize, alpha: f64, tail: Tail) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.kind == kind && e.n == n && e.alpha == alpha && e.tail == tail)
            .map(|e| e.threshold)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("critical value table serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "n", "alpha", "tail", "threshold", "null_replications", "seed"])
            .expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.kind.name().to_string(),
                e.n.to_string(),
                e.alpha.to_string(),
                e.tail.name().to_string(),
                e.threshold.to_string(),
                self.meta.null_replications.to_string(),
                self.meta.seed.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Empirical critical values of one statistic at size `n`.
pub fn calibrate(
    kind: StatisticKind,
    n: usize,
    alphas: &[f64],
    tails: &[Tail],
    null_replications: usize,
    seed: u64,
) -> Result<CriticalValueTable> {
    calibrate_many(&[kind], n, alphas, tails, null_replications, seed)
}

/// Like [`calibrate`] for several statistics sharing one null-sample set.
pub fn calibrate_many(
    kinds: &[StatisticKind],
    n: usize,
    alphas: &[f64],
    tails: &[Tail],
    null_replications: usize,
    seed: u64,
) -> Result<CriticalValueTable> {
    for &a in alphas {
        check_alpha(a)?;
    }
    let nulls = simulate_null(kinds, n, null_replications, seed)?;
    let mut entries = Vec::with_capacity(kinds.len() * alphas.len() * tails.len());
    for (&kind, null) in kinds.iter().zip(&nulls) {
        for &tail in tails {
            for &alpha in alphas {
                let threshold = null.threshold(alpha, tail)?;
                entries.push(CriticalValue { kind, n, alpha, tail, threshold });
            }
        }
    }
    Ok(CriticalValueTable { entries, meta: CalibrationMeta { null_replications, seed } })
}
