//! Exponential sums, discrete means over the grid, integrals over G(x),
//! and the reports that compare them with their predicted main terms.

pub mod claims;
pub mod discrete;
pub mod expsum;
pub mod integral;
pub mod report;

pub use claims::{default_band, ClaimContext, ClaimOutput};
pub use discrete::{diagonal_decomposition, discrete_mean, ratio_spread, tau_uniformity_scan, Decomposition, FTerms, Quantity};
pub use expsum::{exp_sum, exp_sum_scan, ExpSumMode, ExpSumResult};
pub use integral::{bracket, bracket_report, integrate_over_set, Bracket, Integrand, Integrands};
pub use report::{Band, Check, ClaimId, MeanValueReport};
