//! Information-theoretic quantities, all in bits.
//!
//! - [`region`]: the achievable secrecy rate region of a finite-alphabet
//!   wiretap MAC, computed from the full joint distribution.
//! - [`entropy`]: exact entropy of a sum of uniform integers, the resulting
//!   secrecy sum-rate lower bound and the secure degrees of freedom.
//! - [`leakage`]: plug-in estimate of what the eavesdropper learns.

pub mod entropy;
pub mod leakage;
pub mod region;

pub use entropy::{
    mutual_information, residual_secrecy, sdof_fit, sdof_limit, sum_entropy, sum_rate_lower_bound,
    SlopeFit,
};
pub use leakage::{leakage_estimate, LeakageEstimate, MIN_LEAKAGE_SAMPLES};
pub use region::{achievable_region, region_contains, DiscreteMacSpec, RateRegion};

/// `-sum p log2 p` over the strictly positive entries.
pub(crate) fn entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}
