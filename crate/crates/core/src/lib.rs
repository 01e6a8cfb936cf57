//! Performance analysis of multi-antenna selective-combining decode-and-forward
//! relay networks over Nakagami-m fading.
//!
//! * [`analytic`]: branch CDF/PDF, the selection-combining SNR density as an
//!   exponential-polynomial mixture, MGF, M-PSK SEP, outage and capacity.
//! * [`montecarlo`]: seeded, stream-partitioned simulation of the same quantities.
//! * [`power`]: equal, adaptive, numerical and cubic (Rayleigh) power splits.
//! * [`experiments`]: the sweep and comparison tables behind the `scdf` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod config_file;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod parallel;
pub mod power;
pub mod quadrature;
pub mod special;

pub use channel::{Antennas, BranchParams, BranchRates, IidCheck, LinkParams, LinkRate, SystemConfig};
pub use error::{Error, Result};
