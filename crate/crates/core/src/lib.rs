//! Secure degrees of freedom of the single-antenna Gaussian multiple-access
//! channel through real interference alignment.
//!
//! K users share one real channel to an intended receiver while an
//! eavesdropper listens. Each user sends integers, pre-scaled so that all
//! signals land on the same integer lattice at the eavesdropper (they are
//! *aligned* there) while staying separable at the intended receiver, whose
//! gain ratios are rationally independent. Random binning on top of the
//! integer constellations turns the gap between the two receivers into a
//! secrecy rate whose prelog approaches `(K-1)/K`.
//!
//! The crate is organized by concern:
//!
//! - [`model`]: gains, normalization, effective power and the channel.
//! - [`constellation`]: `(Q, A)` selection, the received constellation,
//!   unique decomposability and hard-decoding error bounds.
//! - [`diophantine`]: brute-force minima of linear forms and the empirical
//!   Khintchine-Groshev constant.
//! - [`codec`]: random-binning codebooks, nearest-point decoding and bin
//!   recovery.
//! - [`secrecy`]: the discrete-memoryless secrecy rate region, exact sum
//!   entropies, the sum-rate bound and leakage estimation.
//! - [`simulator`]: seeded Monte Carlo sweeps tying everything together.
//! - [`report`] and [`config`]: the text formats consumed and produced by
//!   the `sdof` command-line tool.
//!
//! A narrative guide lives in the `book/` directory of the repository; its
//! Rust snippets are compiled and run as doctests of this crate.

pub mod codec;
pub mod config;
pub mod constellation;
pub mod diophantine;
pub mod error;
pub mod model;
pub mod report;
pub mod rng;
pub mod secrecy;
pub mod simulator;

pub use error::{Error, Result};

// Every chapter of the guide is compiled as a doctest so the book cannot
// drift from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel-model.md")]
    mod channel_model {}
    #[doc = include_str!("../../../book/src/constellations.md")]
    mod constellations {}
    #[doc = include_str!("../../../book/src/diophantine.md")]
    mod diophantine {}
    #[doc = include_str!("../../../book/src/coding.md")]
    mod coding {}
    #[doc = include_str!("../../../book/src/secrecy-region.md")]
    mod secrecy_region {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
