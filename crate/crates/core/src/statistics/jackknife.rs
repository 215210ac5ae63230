//! Jackknife statistics `Z2` and `Z3`.
//!
//! Each observation `x_i` is paired with a leave-one-out replicate `Y_i`
//! (cube root of the delete-`i` variance for `Z2`, delete-`i` third central
//! moment for `Z3`), and the Fisher transform of the Pearson correlation
//! `r(x_i, Y_i)` is returned.
//!
//! Replicates are obtained in O(n) from the full-sample power sums. With
//! `d_j = x_j - mean` and `delta = -d_i / (n - 1)` the delete-`i` mean is
//! `mean + delta`, so
//!
//! ```text
//! sum_{j != i} (x_j - mean_{-i})^k = sum_j (d_j - delta)^k - (d_i - delta)^k
//! ```
//!
//! which expands in the sums of `d_j^0 .. d_j^k`.

use crate::error::{Error, Result};
use crate::moments::{self, MomentSummary, Sample};

use super::{fisher_z, require_n, StatisticKind, TestStatistic};

/// `1 - |r|` at or below this counts as a perfect correlation.
const PERFECT_CORRELATION_GAP: f64 = 8.0 * f64::EPSILON;

pub fn jackknife_z2(sample: &Sample) -> Result<TestStatistic> {
    let x = sample.values();
    require_n(x.len(), 3)?;
    z2_from_moments(x, &moments::central_moments(sample))
}

pub fn jackknife_z3(sample: &Sample) -> Result<TestStatistic> {
    let x = sample.values();
    require_n(x.len(), 4)?;
    z3_from_moments(x, &moments::central_moments(sample))
}

struct PowerSums {
    dev: Vec<f64>,
    s1: f64,
    s2: f64,
    s3: f64,
}

fn power_sums(x: &[f64], m: &MomentSummary) -> Result<PowerSums> {
    if m.m2.is_nan() || m.m2 <= 0.0 {
        return Err(Error::DegenerateSample("all observations are equal"));
    }
    let dev: Vec<f64> = x.iter().map(|&v| v - m.mean).collect();
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for &d in &dev {
        let d2 = d * d;
        s1 += d;
        s2 += d2;
        s3 += d2 * d;
    }
    Ok(PowerSums { dev, s1, s2, s3 })
}

pub(super) fn z2_from_moments(x: &[f64], m: &MomentSummary) -> Result<TestStatistic> {
    let n = x.len();
    require_n(n, 3)?;
    let ps = power_sums(x, m)?;
    let nf = n as f64;
    let y: Vec<f64> = ps
        .dev
        .iter()
        .map(|&d| {
            let delta = -d / (nf - 1.0);
            let shifted = d - delta;
            let ss = ps.s2 - 2.0 * delta * ps.s1 + nf * delta * delta - shifted * shifted;
            (ss.max(0.0) / (nf - 2.0)).cbrt()
        })
        .collect();
    let r = correlation(&ps.dev, ps.s2, &y)?;
    Ok(TestStatistic { kind: StatisticKind::Z2, value: fisher_z(r)?, n })
}

pub(super) fn z3_from_moments(x: &[f64], m: &MomentSummary) -> Result<TestStatistic> {
    let n = x.len();
    require_n(n, 4)?;
    let ps = power_sums(x, m)?;
    let nf = n as f64;
    let y: Vec<f64> = ps
        .dev
        .iter()
        .map(|&d| {
            let delta = -d / (nf - 1.0);
            let shifted = d - delta;
            let cubes = ps.s3 - 3.0 * delta * ps.s2 + 3.0 * delta * delta * ps.s1
                - nf * delta * delta * delta
                - shifted * shifted * shifted;
            cubes / (nf - 1.0)
        })
        .collect();
    let r = correlation(&ps.dev, ps.s2, &y)?;
    Ok(TestStatistic { kind: StatisticKind::Z3, value: fisher_z(r)?, n })
}

/// Pearson correlation of centered `dev` (sum of squares `sxx`) with `y`.
fn correlation(dev: &[f64], sxx: f64, y: &[f64]) -> Result<f64> {
    let nf = y.len() as f64;
    let mut y_mean = y.iter().sum::<f64>() / nf;
    y_mean += y.iter().map(|&v| v - y_mean).sum::<f64>() / nf;
    let y_scale = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));

    let (mut syy, mut sxy) = (0.0, 0.0);
    for (&d, &v) in dev.iter().zip(y) {
        let e = v - y_mean;
        syy += e * e;
        sxy += d * e;
    }
    let noise = 64.0 * f64::EPSILON * y_scale;
    if sxx.is_nan() || sxx <= 0.0 || syy <= nf * noise * noise {
        return Err(Error::DegenerateSample("leave-one-out replicates do not vary"));
    }
    if let Some(sign) = two_level_sign(dev, y) {
        return Err(Error::PerfectCorrelation { r: sign });
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    if 1.0 - r.abs() <= PERFECT_CORRELATION_GAP {
        return Err(Error::PerfectCorrelation { r: r.signum() });
    }
    Ok(r)
}

/// A sample with exactly two distinct values has replicates that are a
/// function of a two-level variable, so the correlation is exactly +-1 even
/// when rounding in the sums says otherwise. Returns its sign.
fn two_level_sign(dev: &[f64], y: &[f64]) -> Option<f64> {
    let a = dev[0];
    let j = dev.iter().position(|&d| d != a)?;
    let b = dev[j];
    if dev.iter().any(|&d| d != a && d != b) {
        return None;
    }
    Some(((b - a) * (y[j] - y[0])).signum())
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    fn agree(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs())
    }

    #[test]
    fn two_level_replicates_are_perfectly_correlated() {
        // delete-one variances are 4.5, 4.5, 0
        assert_eq!(jackknife_z2(&sample(&[0.0, 0.0, 3.0])), Err(Error::PerfectCorrelation { r: -1.0 }));
        assert_eq!(oracle::z2(&[0.0, 0.0, 3.0]), Err(Error::PerfectCorrelation { r: -1.0 }));
        // delete-one third moments are -2/27, -2/27, 2/27, 2/27
        assert_eq!(jackknife_z3(&sample(&[0.0, 0.0, 1.0, 1.0])), Err(Error::PerfectCorrelation { r: 1.0 }));
        assert_eq!(oracle::z3(&[0.0, 0.0, 1.0, 1.0]), Err(Error::PerfectCorrelation { r: 1.0 }));
    }

    #[test]
    fn two_level_samples_are_exactly_perfect() {
        // rounding in the sums leaves r a few ulps short of 1 here
        let mut x = vec![-4.413906216320935; 173];
        x.push(50.17759357599387);
        let flipped: Vec<f64> = x.iter().map(|v| 3.0 - 7.0 * v).collect();
        // dropping the lone high value removes all the spread
        assert_eq!(jackknife_z2(&sample(&x)), Err(Error::PerfectCorrelation { r: -1.0 }));
        assert_eq!(jackknife_z2(&sample(&flipped)), Err(Error::PerfectCorrelation { r: 1.0 }));
        assert_eq!(jackknife_z3(&sample(&x)), Err(Error::PerfectCorrelation { r: -1.0 }));
        assert_eq!(jackknife_z3(&sample(&flipped)), Err(Error::PerfectCorrelation { r: -1.0 }));
    }

    #[test]
    fn constant_replicates_are_degenerate() {
        // every delete-one variance is 1/2
        assert!(matches!(jackknife_z2(&sample(&[0.0, 1.0, 0.0, 1.0])), Err(Error::DegenerateSample(_))));
        assert!(matches!(jackknife_z3(&sample(&[-2.5; 6])), Err(Error::DegenerateSample(_))));
        let dev = [-1.5, -0.5, 0.5, 1.5];
        assert!(matches!(correlation(&dev, 5.0, &[0.25; 4]), Err(Error::DegenerateSample(_))));
        assert!(matches!(jackknife_z2(&sample(&[2.0; 5])), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn small_sample_matches_transcription() {
        let x = [0.0, 1.0, 2.0, 4.0];
        let fast = jackknife_z2(&sample(&x)).unwrap().value;
        assert!(agree(fast, oracle::z2(&x).unwrap()), "{fast}");
        let fast = jackknife_z3(&sample(&x)).unwrap().value;
        assert!(agree(fast, oracle::z3(&x).unwrap()), "{fast}");
    }

    #[test]
    fn hand_computed_z2() {
        // delete-one samples of {0,1,2,4}: variances 7/3, 4, 13/3, 1
        let x = [0.0, 1.0, 2.0, 4.0];
        let y = [7.0f64 / 3.0, 4.0, 13.0 / 3.0, 1.0].map(f64::cbrt);
        let xm = 7.0 / 4.0;
        let ym = y.iter().sum::<f64>() / 4.0;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
        let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - ym).powi(2)).sum();
        let r = sxy / (sxx * syy).sqrt();
        let z = jackknife_z2(&sample(&x)).unwrap().value;
        assert!((z - r.atanh()).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn agrees_with_transcription(x in prop::collection::vec(-50.0f64..50.0, 4..150)) {
            match (jackknife_z2(&sample(&x)), oracle::z2(&x)) {
                (Ok(a), Ok(b)) => prop_assert!(agree(a.value, b), "{} {}", a.value, b),
                (a, b) => prop_assert_eq!(a.map(|s| s.value), b),
            }
            match (jackknife_z3(&sample(&x)), oracle::z3(&x)) {
                (Ok(a), Ok(b)) => prop_assert!(agree(a.value, b), "{} {}", a.value, b),
                (a, b) => prop_assert_eq!(a.map(|s| s.value), b),
            }
        }
    }
}
