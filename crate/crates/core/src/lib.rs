//! Closed-form and simulated performance of a fluid-antenna backscatter link.
//!
//! A single-antenna source reaches a tag over a Rayleigh forward channel; the
//! tag reflects towards a reader whose fluid antenna switches to the best of
//! `K` spatially correlated ports. The end-to-end gain at port `k` is the
//! product of two unit-mean exponentials, and the ports are coupled with a
//! Clayton copula whose parameter is derived from Jakes' correlation model.
//!
//! Layers, bottom up:
//! - [`specfun`]: J₀, K₁ and friends.
//! - [`channel`]: configuration, port correlation, the product-channel law.
//! - [`copula`]: Clayton copula evaluation and sampling.
//! - [`metrics`]: outage probability and delay outage rate, exact and high-SNR.
//! - [`montecarlo`]: the simulation oracle used to audit the closed forms.
//! - [`sweep`] and [`validate`]: parameter sweeps, CSV/JSON output and the
//!   agreement report driven by the `fabc` binary.

pub mod channel;
pub mod config;
pub mod copula;
pub mod error;
pub mod metrics;
pub mod montecarlo;
mod roots;
pub mod specfun;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
