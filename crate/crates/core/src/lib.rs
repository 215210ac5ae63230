//! Moment-correlation tests for normality.
//!
//! The crate provides the statistics `Z2'` and `Z3'` (smooth functions of the
//! sample skewness, kurtosis and sixth standardized cumulant that estimate the
//! correlation between the sample mean and the sample variance or third
//! central moment), the jackknife statistics `Z2` and `Z3` they replace, the
//! exact finite-sample correlations they estimate, seedable samplers for a
//! family of alternatives, and a deterministic Monte Carlo engine for critical
//! values and power studies.
//!
//! ```
//! use normcorr::{moments, statistics, Sample};
//!
//! let sample = Sample::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
//! let cum = moments::standardized_cumulants(&moments::central_moments(&sample)).unwrap();
//! let z2 = statistics::z2_prime(&cum).unwrap();
//! assert!((z2.value - 0.8165).abs() < 1e-4);
//! ```

pub mod distributions;
pub mod error;
pub mod moments;
pub mod montecarlo;
pub mod rng;
pub mod statistics;
pub mod theory;

pub use distributions::AlternativeSpec;
pub use error::{Error, Result};
pub use moments::{CumulantEstimates, MomentSummary, Sample};
pub use montecarlo::{
    CriticalValueTable, NullSample, PowerCell, PowerReport, PowerStudyConfig, TailChoice,
    TestSpec,
};
pub use rng::RngStream;
pub use statistics::{Calibration, StatisticKind, Tail, TestStatistic};
pub use theory::{CumulantBounds, MomentOrder, PopulationCumulants};
