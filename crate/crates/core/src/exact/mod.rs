//! Exact finite-n computations used as ground truth.

mod enumerate;
mod gamma;
mod moments;

pub use enumerate::{
    enumerate_pmf, enumerate_pmf_binary, enumerate_pmf_with_limits, CompensatedSum,
    EnumerationLimits, ExactPmf, PmfPoint,
};
pub use gamma::{gamma, ln_gamma, log_gamma_ratio};
pub use moments::{
    exact_mean_nonzeros, exact_moments_full, exact_moments_increasing, full_memory_moments,
    two_epoch_moments, MomentReport,
};
