//! Hybrid analog/digital beamformer design for mmWave dual-function
//! radar-communication (DFRC) transmitters.
//!
//! The crate is `no_std` and only needs an allocator. It covers:
//!
//! - [`channel`]: ULA steering vectors, clustered multi-user multi-carrier
//!   channels and sin-space grids.
//! - [`architecture`]: full / partial / dynamic analog precoder feasible sets
//!   and their projections.
//! - [`metrics`]: radar and communication figures of merit.
//! - [`scalarize`]: normalization plus weighted-sum, epsilon-constraint and
//!   min-max scalarizations of the radar/communication pair.
//! - [`solvers`]: fully digital reference design, two-stage factorization,
//!   consensus ADMM and receive combiner design.
//! - [`virtualarray`]: the multi-carrier virtual array model, MUSIC and the
//!   DOA resolution study.
//!
//! All angles are sin-space values `u = sin(theta)` in `[-1, 1]`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod architecture;
pub mod channel;
mod error;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod scalarize;
pub mod solvers;
pub mod virtualarray;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
