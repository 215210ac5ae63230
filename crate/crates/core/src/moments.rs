//! Central moments and standardized sample cumulants.
//!
//! Moments are computed in two passes: the mean first, then the powers of the
//! deviations from it. Sixth powers amplify the cancellation that one-pass
//! update formulas suffer from, and every consumer of this module works on a
//! complete batch anyway.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered collection of finite observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index });
        }
        Ok(Sample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Mean and divisor-`n` central moments `m_k = n^-1 sum (x_i - mean)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m6: f64,
}

impl MomentSummary {
    /// Unbiased variance `S^2 = m2 * n / (n - 1)`; `None` when `n < 2`.
    pub fn s2_unbiased(&self) -> Option<f64> {
        let n = self.n as f64;
        (self.n >= 2).then(|| self.m2 * n / (n - 1.0))
    }

    /// Unbiased third central moment `n / ((n-1)(n-2)) * sum (x_i - mean)^3`;
    /// `None` when `n < 3`.
    pub fn mu3_unbiased(&self) -> Option<f64> {
        let n = self.n as f64;
        (self.n >= 3).then(|| self.m3 * n * n / ((n - 1.0) * (n - 2.0)))
    }

    /// Sum of squared deviations, `n * m2`.
    pub fn sum_sq(&self) -> f64 {
        self.m2 * self.n as f64
    }
}

/// Sample skewness, excess kurtosis and sixth standardized cumulant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimates {
    pub gamma_hat: f64,
    pub kappa_hat: f64,
    pub lambda_hat: f64,
    pub n: usize,
}

impl CumulantEstimates {
    /// `kappa_hat + 2 - gamma_hat^2`, nonnegative for every sample.
    pub fn slack_i(&self) -> f64 {
        self.kappa_hat + 2.0 - self.gamma_hat * self.gamma_hat
    }

    /// `lambda_hat + 9(kappa_hat + gamma_hat^2) + 6 - kappa_hat^2`, nonnegative for every sample.
    pub fn slack_ii(&self) -> f64 {
        let g2 = self.gamma_hat * self.gamma_hat;
        self.lambda_hat + 9.0 * (self.kappa_hat + g2) + 6.0 - self.kappa_hat * self.kappa_hat
    }
}

pub fn central_moments(sample: &Sample) -> MomentSummary {
    moments_of(sample.values())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Two-pass moments of a slice; the caller guarantees it is nonempty and finite.
///
/// The second pass accumulates compensated power sums of `d = x - c` around
/// the rounded mean `c`, and the residual offset `mean(d)` is removed
/// analytically, so the moments do not inherit the rounding of `c`.
pub(crate) fn moments_of(x: &[f64]) -> MomentSummary {
    debug_assert!(!x.is_empty());
    let n = x.len();
    let nf = n as f64;

    let (mut lo, mut hi) = (x[0], x[0]);
    let mut total = CompensatedSum::default();
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
        total.add(v);
    }
    if lo == hi {
        return MomentSummary { n, mean: lo, m2: 0.0, m3: 0.0, m4: 0.0, m6: 0.0 };
    }
    let center = total.value() / nf;

    let mut sums = [CompensatedSum::default(); 6];
    for &v in x {
        let d = v - center;
        let d2 = d * d;
        let d3 = d2 * d;
        sums[0].add(d);
        sums[1].add(d2);
        sums[2].add(d3);
        sums[3].add(d2 * d2);
        sums[4].add(d3 * d2);
        sums[5].add(d3 * d3);
    }
    let [c, s2, s3, s4, s5, s6] = sums.map(|s| s.value() / nf);
    let c2 = c * c;
    let c3 = c2 * c;
    let m2 = s2 - c2;
    let m3 = s3 - 3.0 * c * s2 + 2.0 * c3;
    let m4 = s4 - 4.0 * c * s3 + 6.0 * c2 * s2 - 3.0 * c2 * c2;
    let m6 = s6 - 6.0 * c * s5 + 15.0 * c2 * s4 - 20.0 * c3 * s3 + 15.0 * c2 * c2 * s2
        - 5.0 * c3 * c3;
    MomentSummary { n, mean: center + c, m2, m3, m4, m6 }
}

pub fn standardized_cumulants(m: &MomentSummary) -> Result<CumulantEstimates> {
    if m.m2.is_nan() || m.m2 <= 0.0 {
        return Err(Error::DegenerateSample("all observations are equal"));
    }
    let m2 = m.m2;
    let m2_cubed = m2 * m2 * m2;
    let gamma_hat = m.m3 / m2_cubed.sqrt();
    let kappa_hat = m.m4 / (m2 * m2) - 3.0;
    let lambda_hat =
        m.m6 / m2_cubed - 15.0 * kappa_hat - 10.0 * gamma_hat * gamma_hat - 15.0;
    Ok(CumulantEstimates { gamma_hat, kappa_hat, lambda_hat, n: m.n })
}

/// Shorthand for `standardized_cumulants(&central_moments(sample))`.
pub fn cumulants(sample: &Sample) -> Result<CumulantEstimates> {
    standardized_cumulants(&central_moments(sample))
}
