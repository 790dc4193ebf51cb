//! Monte Carlo tail estimates, bound-versus-simulation comparisons and the
//! autocovariance eigenvalue check.

pub mod autocov;
pub mod compare;
pub mod tail;

pub use autocov::{autocov_eigen_check, AutocovReport, AutocovTailRequest};
pub use compare::{compare, CompareParams, ComparisonReport, ComparisonRow, Verdict, COMPARABLE};
pub use tail::{estimate_tail, sample_statistic, Statistic, TailEstimate};
