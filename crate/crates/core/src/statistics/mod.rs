//! Test statistics for normality.
//!
//! `Z2'` and `Z3'` plug the sample cumulants into the exact correlation
//! formulas of [`crate::theory`]. `Z2` and `Z3` are the jackknife statistics
//! they replace, and `sqrt(b1)`, `b2` and the Jarque-Bera `LM` are the usual
//! moment-based comparisons.

mod jackknife;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{self, CumulantEstimates, Sample};

pub use jackknife::{jackknife_z2, jackknife_z3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatisticKind {
    #[serde(rename = "z2p")]
    Z2Prime,
    #[serde(rename = "z3p")]
    Z3Prime,
    #[serde(rename = "z2")]
    Z2,
    #[serde(rename = "z3")]
    Z3,
    #[serde(rename = "sqrtb1")]
    SqrtB1,
    #[serde(rename = "b2")]
    B2,
    #[serde(rename = "lm")]
    Lm,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 7] = [
        StatisticKind::Z2Prime,
        StatisticKind::Z3Prime,
        StatisticKind::Z2,
        StatisticKind::Z3,
        StatisticKind::SqrtB1,
        StatisticKind::B2,
        StatisticKind::Lm,
    ];

    /// Short machine name, as accepted by `FromStr`.
    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::Z2Prime => "z2p",
            StatisticKind::Z3Prime => "z3p",
            StatisticKind::Z2 => "z2",
            StatisticKind::Z3 => "z3",
            StatisticKind::SqrtB1 => "sqrtb1",
            StatisticKind::B2 => "b2",
            StatisticKind::Lm => "lm",
        }
    }

    /// Conventional symbol.
    pub fn symbol(self) -> &'static str {
        match self {
            StatisticKind::Z2Prime => "Z2'",
            StatisticKind::Z3Prime => "Z3'",
            StatisticKind::Z2 => "Z2",
            StatisticKind::Z3 => "Z3",
            StatisticKind::SqrtB1 => "sqrt(b1)",
            StatisticKind::B2 => "b2",
            StatisticKind::Lm => "LM",
        }
    }

    /// Smallest sample size for which the statistic is defined.
    pub fn min_n(self) -> usize {
        match self {
            StatisticKind::Z2Prime | StatisticKind::SqrtB1 | StatisticKind::B2 | StatisticKind::Lm => 2,
            StatisticKind::Z3Prime | StatisticKind::Z2 => 3,
            StatisticKind::Z3 => 4,
        }
    }

    /// Whether the statistic measures asymmetry (as opposed to tail weight).
    pub fn is_skewness_type(self) -> bool {
        matches!(self, StatisticKind::Z2Prime | StatisticKind::Z2 | StatisticKind::SqrtB1)
    }

    pub fn is_jackknife(self) -> bool {
        matches!(self, StatisticKind::Z2 | StatisticKind::Z3)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim().to_ascii_lowercase().as_str() {
            "z2p" | "z2'" | "z2prime" => StatisticKind::Z2Prime,
            "z3p" | "z3'" | "z3prime" => StatisticKind::Z3Prime,
            "z2" => StatisticKind::Z2,
            "z3" => StatisticKind::Z3,
            "sqrtb1" | "sqrt(b1)" | "b1" | "skewness" => StatisticKind::SqrtB1,
            "b2" | "kurtosis" => StatisticKind::B2,
            "lm" | "jb" | "jarque-bera" => StatisticKind::Lm,
            other => return Err(Error::InvalidTest(format!("unknown statistic `{other}`"))),
        };
        Ok(kind)
    }
}

/// Which tail of the null distribution counts as evidence against normality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    Upper,
    Lower,
    /// Large `|statistic|`.
    TwoSided,
}

impl Tail {
    pub fn name(self) -> &'static str {
        match self {
            Tail::Upper => "upper",
            Tail::Lower => "lower",
            Tail::TwoSided => "two-sided",
        }
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upper" | "right" | "greater" => Ok(Tail::Upper),
            "lower" | "left" | "less" => Ok(Tail::Lower),
            "two-sided" | "two_sided" | "twosided" | "two" | "abs" | "both" => Ok(Tail::TwoSided),
            other => Err(Error::InvalidTest(format!("unknown tail `{other}`"))),
        }
    }
}

/// How critical values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum Calibration {
    /// Empirical quantiles of simulated normal samples.
    #[default]
    #[serde(rename = "mc")]
    MonteCarlo,
    /// Upper quantile of the chi-square distribution with two degrees of
    /// freedom, `-2 ln(alpha)`. Only meaningful for `LM`.
    #[serde(rename = "chi2")]
    ChiSquare2,
}

impl Calibration {
    pub fn name(self) -> &'static str {
        match self {
            Calibration::MonteCarlo => "mc",
            Calibration::ChiSquare2 => "chi2",
        }
    }
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mc" | "montecarlo" | "monte-carlo" => Ok(Calibration::MonteCarlo),
            "chi2" | "asymptotic" => Ok(Calibration::ChiSquare2),
            other => Err(Error::InvalidTest(format!("unknown calibration `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub kind: StatisticKind,
    pub value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats {
    pub sqrt_b1: f64,
    pub b2: f64,
    pub lm: f64,
}

fn require_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::InvalidN { n, min })
    } else {
        Ok(())
    }
}

/// `gamma_hat / sqrt(kappa_hat + 3 - (n-3)/(n-1))`; always strictly inside (-1, 1).
pub fn z2_prime(cum: &CumulantEstimates) -> Result<TestStatistic> {
    require_n(cum.n, 2)?;
    let n = cum.n as f64;
    let value = cum.gamma_hat / (cum.kappa_hat + 3.0 - (n - 3.0) / (n - 1.0)).sqrt();
    Ok(TestStatistic { kind: StatisticKind::Z2Prime, value, n: cum.n })
}

/// Radicand of `Z3'`. Bounded below by `kappa_hat^2 + 24/((n-1)(n-2))`.
pub fn z3_prime_radicand(cum: &CumulantEstimates) -> f64 {
    let n = cum.n as f64;
    let g2 = cum.gamma_hat * cum.gamma_hat;
    cum.lambda_hat + 9.0 * n / (n - 1.0) * (cum.kappa_hat + g2) + 6.0 * n * n / ((n - 1.0) * (n - 2.0))
}

pub fn z3_prime(cum: &CumulantEstimates) -> Result<TestStatistic> {
    require_n(cum.n, 3)?;
    let value = cum.kappa_hat / z3_prime_radicand(cum).sqrt();
    Ok(TestStatistic { kind: StatisticKind::Z3Prime, value, n: cum.n })
}

pub fn fisher_z(r: f64) -> Result<f64> {
    if r.abs() < 1.0 {
        Ok(r.atanh())
    } else {
        Err(Error::OutOfDomain(r))
    }
}

pub fn comparison_stats(cum: &CumulantEstimates) -> ComparisonStats {
    let n = cum.n as f64;
    let (g, k) = (cum.gamma_hat, cum.kappa_hat);
    ComparisonStats { sqrt_b1: g, b2: k, lm: n * (g * g / 6.0 + k * k / 24.0) }
}

fn from_cumulants(kind: StatisticKind, cum: &CumulantEstimates) -> Result<TestStatistic> {
    let n = cum.n;
    let value = match kind {
        StatisticKind::Z2Prime => return z2_prime(cum),
        StatisticKind::Z3Prime => return z3_prime(cum),
        StatisticKind::SqrtB1 => comparison_stats(cum).sqrt_b1,
        StatisticKind::B2 => comparison_stats(cum).b2,
        StatisticKind::Lm => comparison_stats(cum).lm,
        StatisticKind::Z2 | StatisticKind::Z3 => unreachable!("jackknife statistics need the sample"),
    };
    require_n(n, kind.min_n())?;
    Ok(TestStatistic { kind, value, n })
}

/// Compute one statistic from a sample.
pub fn compute(kind: StatisticKind, sample: &Sample) -> Result<TestStatistic> {
    match kind {
        StatisticKind::Z2 => jackknife_z2(sample),
        StatisticKind::Z3 => jackknife_z3(sample),
        _ => from_cumulants(kind, &moments::cumulants(sample)?),
    }
}

/// Result of evaluating a statistic inside a simulation loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Value(f64),
    /// Jackknife correlation of exactly +1 or -1, carried as its sign.
    Perfect(f64),
    /// Zero variance somewhere; the statistic is undefined.
    Degenerate,
}

impl Outcome {
    /// Value with perfect correlations mapped to +-infinity.
    pub fn ordered_value(self) -> Option<f64> {
        match self {
            Outcome::Value(v) => Some(v),
            Outcome::Perfect(sign) => Some(sign * f64::INFINITY),
            Outcome::Degenerate => None,
        }
    }
}

impl From<Result<TestStatistic>> for Outcome {
    fn from(r: Result<TestStatistic>) -> Self {
        match r {
            Ok(s) => Outcome::Value(s.value),
            Err(Error::PerfectCorrelation { r }) => Outcome::Perfect(r.signum()),
            Err(_) => Outcome::Degenerate,
        }
    }
}

/// Evaluate several statistics on one finite slice, sharing the moment pass.
///
/// `out` is cleared and receives one outcome per entry of `kinds`. Sample
/// sizes below a statistic's minimum yield [`Outcome::Degenerate`].
pub fn evaluate_into(kinds: &[StatisticKind], x: &[f64], out: &mut Vec<Outcome>) {
    out.clear();
    let m = moments::moments_of(x);
    let cum = moments::standardized_cumulants(&m);
    for &kind in kinds {
        let outcome = match (&cum, kind) {
            (Err(_), _) => Outcome::Degenerate,
            (Ok(_), StatisticKind::Z2) => jackknife::z2_from_moments(x, &m).into(),
            (Ok(_), StatisticKind::Z3) => jackknife::z3_from_moments(x, &m).into(),
            (Ok(c), k) => from_cumulants(k, c).into(),
        };
        out.push(outcome);
    }
}
