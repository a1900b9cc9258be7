//! Numerical core for supply planning against Gaussian demand when the
//! cumulative supply curve carries a power drift `κσn^α`.
//!
//! The crate is `no_std` (it needs `alloc`) so that the kernels can be embedded
//! anywhere; threading, files and the command line live in the `driftwalk`
//! companion crate.
//!
//! Module map:
//!
//! * [`normal`]: `φ`, `Φ`, `Φ̄`, its inverse, and the loss function `G(x) = E(Z - x)^+`.
//! * [`inventory`]: supply schedules and the lost-sales / backorder path recursions.
//! * [`asymptotics`]: Spitzer sums, regime-dependent bounds on `E[L_N]`.
//! * [`simulate`]: reproducible Monte Carlo over counter-based random streams.
//! * [`hitting`]: three-moment tail bounds and the Ornstein-Uhlenbeck hitting-time estimate.
//! * [`optimizer`]: surrogate cost minimization with ratio certificates.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
mod error;
pub mod hitting;
pub mod inventory;
pub mod minimize;
pub mod normal;
pub mod optimizer;
pub mod quadrature;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
