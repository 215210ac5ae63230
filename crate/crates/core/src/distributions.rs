//! Alternative distributions: textual specs, population cumulants and
//! seedable samplers.
//!
//! Specs are written as `name` or `name(arg,...)`, case-insensitive:
//!
//! | spec               | distribution                                 |
//! |--------------------|----------------------------------------------|
//! | `normal`           | N(0, 1)                                      |
//! | `chisq(k)`         | chi-square with `k` degrees of freedom       |
//! | `exp`              | standard exponential                         |
//! | `weibull(k,s)`     | Weibull with shape `k`, scale `s`            |
//! | `lognormal(s)`     | `exp(s Z)`                                   |
//! | `beta(a,b)`        | beta                                         |
//! | `uniform`          | U(0, 1)                                      |
//! | `t(v)`             | Student's t with `v` degrees of freedom      |
//! | `cauchy`           | standard Cauchy                              |
//! | `laplace`          | standard Laplace                             |
//! | `logistic`         | standard logistic                            |
//! | `mix(w,m1,m2)`     | `w N(m1, 1) + (1 - w) N(m2, 1)`              |
//!
//! Arguments may be decimals or fractions (`1/2`). `Display` prints the
//! canonical form, which parses back to an identical spec.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Beta, ChiSquared, StandardNormal, StudentT};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::moments::Sample;
use crate::rng::RngStream;
use crate::theory::{MomentOrder, PopulationCumulants};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlternativeSpec {
    Normal,
    ChiSquare { df: f64 },
    Exponential,
    Weibull { shape: f64, scale: f64 },
    LogNormal { sigma: f64 },
    Beta { a: f64, b: f64 },
    Uniform,
    StudentT { df: f64 },
    Cauchy,
    Laplace,
    Logistic,
    /// `w N(mu1, 1) + (1 - w) N(mu2, 1)`
    NormalMixture { w: f64, mu1: f64, mu2: f64 },
}

impl AlternativeSpec {
    pub fn validate(&self) -> Result<()> {
        use AlternativeSpec::*;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            Normal | Exponential | Uniform | Cauchy | Laplace | Logistic => Ok(()),
            ChiSquare { df } | StudentT { df } => positive("degrees of freedom", df),
            Weibull { shape, scale } => positive("shape", shape).and(positive("scale", scale)),
            LogNormal { sigma } => positive("sigma", sigma),
            Beta { a, b } => positive("a", a).and(positive("b", b)),
            NormalMixture { w, mu1, mu2 } => {
                if !(w > 0.0 && w < 1.0) {
                    Err(Error::InvalidSpec(format!("mixture weight must be in (0, 1), got {w}")))
                } else if !(mu1.is_finite() && mu2.is_finite()) {
                    Err(Error::InvalidSpec("mixture means must be finite".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn population_cumulants(&self) -> Result<PopulationCumulants> {
        use AlternativeSpec::*;
        self.validate()?;
        let pc = match *self {
            Normal => PopulationCumulants::NORMAL,
            ChiSquare { df } => PopulationCumulants::new((8.0 / df).sqrt(), 12.0 / df, 480.0 / (df * df)),
            Exponential => PopulationCumulants::new(2.0, 6.0, 120.0),
            Weibull { shape, scale } => {
                from_raw_moments(|r| scale.powi(r as i32) * gamma(1.0 + r as f64 / shape))
            }
            LogNormal { sigma } => from_raw_moments(|r| (0.5 * (r * r) as f64 * sigma * sigma).exp()),
            Beta { a, b } => {
                from_raw_moments(|r| (0..r).map(|i| (a + i as f64) / (a + b + i as f64)).product())
            }
            Uniform => PopulationCumulants::new(0.0, -1.2, 48.0 / 7.0),
            StudentT { df } => student_t_cumulants(df),
            Cauchy => PopulationCumulants::with_order(f64::NAN, f64::NAN, f64::NAN, MomentOrder::Finite(0)),
            Laplace => PopulationCumulants::new(0.0, 3.0, 30.0),
            Logistic => PopulationCumulants::new(0.0, 1.2, 48.0 / 7.0),
            NormalMixture { w, mu1, mu2 } => {
                from_raw_moments(|r| w * normal_raw_moment(mu1, r) + (1.0 - w) * normal_raw_moment(mu2, r))
            }
        };
        Ok(pc)
    }

    pub fn sampler(&self) -> Result<Sampler> {
        use AlternativeSpec::*;
        self.validate()?;
        let invalid = |e: &dyn fmt::Display| Error::InvalidSpec(format!("{self}: {e}"));
        let kind = match *self {
            Normal => SamplerKind::Normal,
            ChiSquare { df } => SamplerKind::ChiSquare(ChiSquared::new(df).map_err(|e| invalid(&e))?),
            Exponential => SamplerKind::Exponential,
            Weibull { shape, scale } => SamplerKind::Weibull { inv_shape: 1.0 / shape, scale },
            LogNormal { sigma } => SamplerKind::LogNormal { sigma },
            Beta { a, b } => SamplerKind::Beta(rand_distr::Beta::new(a, b).map_err(|e| invalid(&e))?),
            Uniform => SamplerKind::Uniform,
            StudentT { df } => SamplerKind::StudentT(rand_distr::StudentT::new(df).map_err(|e| invalid(&e))?),
            Cauchy => SamplerKind::Cauchy,
            Laplace => SamplerKind::Laplace,
            Logistic => SamplerKind::Logistic,
            NormalMixture { w, mu1, mu2 } => SamplerKind::Mixture { w, mu1, mu2 },
        };
        Ok(Sampler { kind })
    }

    /// Whether the law is symmetric about its center.
    pub fn is_symmetric(&self) -> bool {
        use AlternativeSpec::*;
        match *self {
            Normal | Uniform | StudentT { .. } | Cauchy | Laplace | Logistic => true,
            Beta { a, b } => a == b,
            NormalMixture { w, mu1, mu2 } => w == 0.5 || mu1 == mu2,
            ChiSquare { .. } | Exponential | Weibull { .. } | LogNormal { .. } => false,
        }
    }
}

/// Standardized cumulants from raw moments `E X^r`, r = 1..=6.
fn from_raw_moments(raw: impl Fn(u32) -> f64) -> PopulationCumulants {
    let raw: [f64; 7] = std::array::from_fn(|r| if r == 0 { 1.0 } else { raw(r as u32) });
    let mean = raw[1];
    let central = |k: usize| -> f64 {
        (0..=k).map(|j| binomial(k, j) * raw[j] * (-mean).powi((k - j) as i32)).sum()
    };
    let var = central(2);
    let gamma = central(3) / var.powf(1.5);
    let kappa = central(4) / (var * var) - 3.0;
    let lambda = central(6) / var.powi(3) - 15.0 * kappa - 10.0 * gamma * gamma - 15.0;
    PopulationCumulants::new(gamma, kappa, lambda)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E X^r` for `X ~ N(mu, 1)`.
fn normal_raw_moment(mu: f64, r: u32) -> f64 {
    // sum over even j of C(r, j) mu^(r-j) (j-1)!!
    (0..=r as usize)
        .step_by(2)
        .map(|j| {
            let double_factorial: f64 = (1..j).step_by(2).map(|i| i as f64).product();
            binomial(r as usize, j) * mu.powi((r as usize - j) as i32) * double_factorial
        })
        .sum()
}

fn student_t_cumulants(df: f64) -> PopulationCumulants {
    // E|T|^k < inf iff k < df
    let order = (df.ceil() - 1.0).max(0.0) as u32;
    let gamma = if order >= 3 { 0.0 } else { f64::NAN };
    let kappa = if order >= 4 { 6.0 / (df - 4.0) } else { f64::NAN };
    let lambda = if order >= 6 {
        15.0 * (df - 2.0).powi(2) / ((df - 4.0) * (df - 6.0)) - 15.0 * kappa - 15.0
    } else {
        f64::NAN
    };
    PopulationCumulants::with_order(gamma, kappa, lambda, MomentOrder::Finite(order))
}

/// Format a parameter; Rust's shortest round-trip float formatting.
fn num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for AlternativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AlternativeSpec::*;
        match *self {
            Normal => f.write_str("normal"),
            ChiSquare { df } => write!(f, "chisq({})", num(df)),
            Exponential => f.write_str("exp"),
            Weibull { shape, scale } => write!(f, "weibull({},{})", num(shape), num(scale)),
            LogNormal { sigma } => write!(f, "lognormal({})", num(sigma)),
            Beta { a, b } => write!(f, "beta({},{})", num(a), num(b)),
            Uniform => f.write_str("uniform"),
            StudentT { df } => write!(f, "t({})", num(df)),
            Cauchy => f.write_str("cauchy"),
            Laplace => f.write_str("laplace"),
            Logistic => f.write_str("logistic"),
            NormalMixture { w, mu1, mu2 } => write!(f, "mix({},{},{})", num(w), num(mu1), num(mu2)),
        }
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidSpec(format!("bad number `{s}`"));
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            p / q
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

impl FromStr for AlternativeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use AlternativeSpec::*;
        let text = s.trim().to_ascii_lowercase();
        let (name, args) = match text.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidSpec(format!("missing `)` in `{s}`")))?;
                let args = inner.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
                (name.trim().to_string(), args)
            }
            None => (text.clone(), Vec::new()),
        };
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("`{name}` takes {k} argument(s), got {}", args.len())))
            }
        };
        let spec = match name.as_str() {
            "normal" | "norm" | "n" | "gaussian" => arity(0).map(|_| Normal)?,
            "chisq" | "chi2" | "chisquare" => arity(1).map(|_| ChiSquare { df: args[0] })?,
            "exp" | "exponential" => arity(0).map(|_| Exponential)?,
            "weibull" | "weib" => arity(2).map(|_| Weibull { shape: args[0], scale: args[1] })?,
            "lognormal" | "ln" | "lnorm" => arity(1).map(|_| LogNormal { sigma: args[0] })?,
            "beta" => arity(2).map(|_| Beta { a: args[0], b: args[1] })?,
            "uniform" | "unif" => arity(0).map(|_| Uniform)?,
            "t" | "student" | "studentt" => arity(1).map(|_| StudentT { df: args[0] })?,
            "cauchy" => arity(0).map(|_| Cauchy)?,
            "laplace" => arity(0).map(|_| Laplace)?,
            "logistic" => arity(0).map(|_| Logistic)?,
            "mix" | "mixture" => arity(3).map(|_| NormalMixture { w: args[0], mu1: args[1], mu2: args[2] })?,
            other => return Err(Error::InvalidSpec(format!("unknown distribution `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for AlternativeSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AlternativeSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy)]
enum SamplerKind {
    Normal,
    ChiSquare(ChiSquared<f64>),
    Exponential,
    Weibull { inv_shape: f64, scale: f64 },
    LogNormal { sigma: f64 },
    Beta(Beta<f64>),
    Uniform,
    StudentT(StudentT<f64>),
    Cauchy,
    Laplace,
    Logistic,
    Mixture { w: f64, mu1: f64, mu2: f64 },
}

/// A validated, ready-to-draw distribution.
///
/// Exponential, Weibull, Cauchy, Laplace, logistic and uniform variates use
/// inversion; normal variates use the ziggurat method; chi-square, beta and
/// t go through gamma variates; mixtures pick a component by a Bernoulli
/// draw.
#[derive(Debug, Clone, Copy)]
pub struct Sampler {
    kind: SamplerKind,
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            SamplerKind::Normal => rng.sample(StandardNormal),
            SamplerKind::ChiSquare(d) => d.sample(rng),
            SamplerKind::Exponential => -(1.0 - rng.random::<f64>()).ln(),
            SamplerKind::Weibull { inv_shape, scale } => {
                scale * (-(1.0 - rng.random::<f64>()).ln()).powf(inv_shape)
            }
            SamplerKind::LogNormal { sigma } => (sigma * rng.sample::<f64, _>(StandardNormal)).exp(),
            SamplerKind::Beta(d) => d.sample(rng),
            SamplerKind::Uniform => rng.random::<f64>(),
            SamplerKind::StudentT(d) => d.sample(rng),
            SamplerKind::Cauchy => {
                let u: f64 = rng.sample(Open01);
                (PI * (u - 0.5)).tan()
            }
            SamplerKind::Laplace => {
                let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            SamplerKind::Logistic => {
                let u: f64 = rng.sample(Open01);
                (u / (1.0 - u)).ln()
            }
            SamplerKind::Mixture { w, mu1, mu2 } => {
                let mu = if rng.random::<f64>() < w { mu1 } else { mu2 };
                mu + rng.sample::<f64, _>(StandardNormal)
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.draw(rng);
        }
    }
}

/// `n` independent draws, determined entirely by `(spec, n, stream)`.
pub fn sample_from(spec: &AlternativeSpec, n: usize, stream: RngStream) -> Result<Sample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let sampler = spec.sampler()?;
    let mut rng = stream.rng();
    let mut values = vec![0.0; n];
    sampler.fill(&mut rng, &mut values);
    Sample::new(values)
}

/// One row of the alternatives table: a display label and its spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyAlternative {
    pub label: &'static str,
    pub spec: AlternativeSpec,
}

/// The normal null followed by the 24 alternatives of the reference power study.
pub fn study_alternatives() -> Vec<StudyAlternative> {
    use AlternativeSpec::*;
    let rows: [(&str, AlternativeSpec); 25] = [
        ("Normal", Normal),
        ("chi2(1)", ChiSquare { df: 1.0 }),
        ("Exponential", Exponential),
        ("chi2(4)", ChiSquare { df: 4.0 }),
        ("Weib(1/2,1)", Weibull { shape: 0.5, scale: 1.0 }),
        ("Weib(2,1)", Weibull { shape: 2.0, scale: 1.0 }),
        ("LN(sigma=1/4)", LogNormal { sigma: 0.25 }),
        ("LN(sigma=1/2)", LogNormal { sigma: 0.5 }),
        ("Beta(1/2,1/2)", Beta { a: 0.5, b: 0.5 }),
        ("Uniform", Uniform),
        ("Beta(2,2)", Beta { a: 2.0, b: 2.0 }),
        ("Beta(3,3)", Beta { a: 3.0, b: 3.0 }),
        ("Beta(1,2)", Beta { a: 1.0, b: 2.0 }),
        ("Beta(2,3)", Beta { a: 2.0, b: 3.0 }),
        ("Cauchy", Cauchy),
        ("t(2)", StudentT { df: 2.0 }),
        ("t(3)", StudentT { df: 3.0 }),
        ("t(4)", StudentT { df: 4.0 }),
        ("t(5)", StudentT { df: 5.0 }),
        ("t(6)", StudentT { df: 6.0 }),
        ("Laplace", Laplace),
        ("Logistic", Logistic),
        ("1/2 N(0,1) + 1/2 N(1,1)", NormalMixture { w: 0.5, mu1: 0.0, mu2: 1.0 }),
        ("1/2 N(0,1) + 1/2 N(4,1)", NormalMixture { w: 0.5, mu1: 0.0, mu2: 4.0 }),
        ("9/10 N(0,1) + 1/10 N(4,1)", NormalMixture { w: 0.9, mu1: 0.0, mu2: 4.0 }),
    ];
    rows.into_iter().map(|(label, spec)| StudyAlternative { label, spec }).collect()
}

/// Moment summary of one alternative: skewness, kurtosis and the limiting
/// correlations, each `None` where the required moments diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantRow {
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub rho2_limit: Option<f64>,
    pub rho3_limit: Option<f64>,
}

pub fn cumulant_row(spec: &AlternativeSpec) -> Result<CumulantRow> {
    let pc = spec.population_cumulants()?;
    Ok(CumulantRow {
        gamma: pc.skewness(),
        kappa: pc.excess_kurtosis(),
        rho2_limit: crate::theory::rho2_limit(&pc).ok(),
        rho3_limit: crate::theory::rho3_limit(&pc).ok(),
    })
}
