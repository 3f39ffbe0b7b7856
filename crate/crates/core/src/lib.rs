//! Downlink coverage of heterogeneous cellular networks whose base-station
//! tiers are Poisson cluster processes or homogeneous Poisson processes,
//! under max-average-received-power association and Rayleigh fading.
//!
//! Two engines compute the same quantities: [`analytic`] evaluates the
//! coverage integrals by adaptive quadrature and [`montecarlo`] simulates
//! the network directly.

// `!(x > 0.0)` is how argument checks reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature node tables are quoted at full published precision.
#![allow(clippy::excessive_precision)]
#![allow(clippy::too_many_arguments)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod exec;
pub mod kernels;
pub mod model;
pub mod montecarlo;
pub mod pointprocess;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use exec::Execution;
pub use kernels::OffspringKernel;
pub use model::{CoverageQuery, CoverageResult, NetworkModel, TierKind, TierSpec, UserModel};
