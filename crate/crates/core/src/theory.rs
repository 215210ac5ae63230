//! Exact correlations between the sample mean and the unbiased sample
//! variance / third central moment, their large-sample limits, and the
//! inequalities that tie the standardized cumulants together.
//!
//! With skewness `gamma`, excess kurtosis `kappa` and sixth standardized
//! cumulant `lambda`,
//!
//! ```text
//! rho2(n) = gamma / sqrt(kappa + 3 - (n-3)/(n-1))
//! rho3(n) = kappa / sqrt(lambda + 9 n/(n-1) (kappa + gamma^2) + 6 n^2/((n-1)(n-2)))
//! ```
//!
//! and every distribution satisfies `gamma^2 <= kappa + 2` and
//! `kappa^2 <= lambda + 9(kappa + gamma^2) + 6`, both with equality for
//! two-point laws.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack below which a cumulant bound still counts as satisfied.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Highest order `k` for which `E|X|^k` is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MomentOrder {
    Finite(u32),
    Unbounded,
}

impl MomentOrder {
    pub fn at_least(self, k: u32) -> bool {
        match self {
            MomentOrder::Finite(m) => m >= k,
            MomentOrder::Unbounded => true,
        }
    }

    fn require(self, k: u32) -> Result<()> {
        if self.at_least(k) {
            Ok(())
        } else {
            Err(Error::MomentOrderTooLow { required: k, available: self.to_string() })
        }
    }
}

impl fmt::Display for MomentOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentOrder::Finite(k) => write!(f, "{k}"),
            MomentOrder::Unbounded => f.write_str("inf"),
        }
    }
}

/// Standardized population cumulants of a distribution.
///
/// Entries beyond `finite_moment_order` are meaningless (stored as NaN by the
/// samplers in [`crate::distributions`]); every function here checks the order
/// before reading them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationCumulants {
    pub gamma: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub finite_moment_order: MomentOrder,
}

impl PopulationCumulants {
    /// All moments finite.
    pub fn new(gamma: f64, kappa: f64, lambda: f64) -> Self {
        PopulationCumulants { gamma, kappa, lambda, finite_moment_order: MomentOrder::Unbounded }
    }

    pub fn with_order(gamma: f64, kappa: f64, lambda: f64, order: MomentOrder) -> Self {
        PopulationCumulants { gamma, kappa, lambda, finite_moment_order: order }
    }

    pub const NORMAL: PopulationCumulants = PopulationCumulants {
        gamma: 0.0,
        kappa: 0.0,
        lambda: 0.0,
        finite_moment_order: MomentOrder::Unbounded,
    };

    /// Skewness, if the third moment exists.
    pub fn skewness(&self) -> Option<f64> {
        self.finite_moment_order.at_least(3).then_some(self.gamma)
    }

    /// Excess kurtosis, if the fourth moment exists.
    pub fn excess_kurtosis(&self) -> Option<f64> {
        self.finite_moment_order.at_least(4).then_some(self.kappa)
    }

    pub fn sixth_cumulant(&self) -> Option<f64> {
        self.finite_moment_order.at_least(6).then_some(self.lambda)
    }
}

/// Correlation of the sample mean and the unbiased sample variance at size `n`.
pub fn rho2(pop: &PopulationCumulants, n: usize) -> Result<f64> {
    pop.finite_moment_order.require(4)?;
    if n < 2 {
        return Err(Error::InvalidN { n, min: 2 });
    }
    let n = n as f64;
    Ok(pop.gamma / (pop.kappa + 3.0 - (n - 3.0) / (n - 1.0)).sqrt())
}

/// `gamma / sqrt(kappa + 2)`, the large-sample limit of [`rho2`].
pub fn rho2_limit(pop: &PopulationCumulants) -> Result<f64> {
    pop.finite_moment_order.require(4)?;
    let denom = pop.kappa + 2.0;
    if denom.is_nan() || denom <= 0.0 {
        // two-point laws with kappa = -2 force gamma = 0
        return Err(Error::OutOfDomain(pop.kappa));
    }
    Ok(pop.gamma / denom.sqrt())
}

/// Correlation of the sample mean and the unbiased third central moment at size `n`.
pub fn rho3(pop: &PopulationCumulants, n: usize) -> Result<f64> {
    pop.finite_moment_order.require(6)?;
    if n < 3 {
        return Err(Error::InvalidN { n, min: 3 });
    }
    let n = n as f64;
    let g2 = pop.gamma * pop.gamma;
    let radicand = pop.lambda
        + 9.0 * n / (n - 1.0) * (pop.kappa + g2)
        + 6.0 * n * n / ((n - 1.0) * (n - 2.0));
    Ok(pop.kappa / radicand.sqrt())
}

/// `kappa / sqrt(lambda + 9(kappa + gamma^2) + 6)`, the large-sample limit of [`rho3`].
pub fn rho3_limit(pop: &PopulationCumulants) -> Result<f64> {
    pop.finite_moment_order.require(6)?;
    let g2 = pop.gamma * pop.gamma;
    Ok(pop.kappa / (pop.lambda + 9.0 * (pop.kappa + g2) + 6.0).sqrt())
}

/// Slack in the two cumulant inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantBounds {
    /// `kappa + 2 - gamma^2`
    pub slack_i: f64,
    /// `lambda + 9(kappa + gamma^2) + 6 - kappa^2`; `None` without a finite sixth moment.
    pub slack_ii: Option<f64>,
}

impl CumulantBounds {
    pub fn holds_i(&self) -> bool {
        self.slack_i >= -BOUND_TOLERANCE
    }

    pub fn holds_ii(&self) -> Option<bool> {
        self.slack_ii.map(|s| s >= -BOUND_TOLERANCE)
    }
}

pub fn check_cumulant_bounds(pop: &PopulationCumulants) -> Result<CumulantBounds> {
    pop.finite_moment_order.require(4)?;
    let g2 = pop.gamma * pop.gamma;
    let slack_i = pop.kappa + 2.0 - g2;
    let slack_ii = pop
        .finite_moment_order
        .at_least(6)
        .then_some(pop.lambda + 9.0 * (pop.kappa + g2) + 6.0 - pop.kappa * pop.kappa);
    Ok(CumulantBounds { slack_i, slack_ii })
}
