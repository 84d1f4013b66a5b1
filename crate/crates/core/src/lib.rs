//! BFV somewhat-homomorphic encryption whose arithmetic kernels are written
//! against a processing-in-memory instruction model: native 32-bit `add` and
//! `addc`, and a software shift-and-add 32x32 multiply.
//!
//! The crate is layered bottom-up:
//!
//! * [`limbint`]: fixed-width integers over 32-bit limbs, with instruction counting.
//! * [`polyring`]: the negacyclic ring `Z_q[x]/(x^n + 1)` over those integers.
//! * [`bfv`]: key generation, encryption, decryption and the homomorphic operations.
//! * [`pimsim`]: a functional simulator and analytic cost model of a many-core PIM system.
//! * [`workloads`]: encrypted mean, variance and linear-regression pipelines.

pub mod bfv;
mod error;
pub mod limbint;
pub mod pimsim;
pub mod polyring;
pub mod rng;
pub mod workloads;

pub use error::{Error, Result};

/// Version string embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
