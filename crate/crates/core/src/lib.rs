//! Monte Carlo evaluation of six-dimensional point-kernel integrals
//!
//! ```text
//! A(B_s, B_t; phi) = ∫_{B_t} ∫_{B_s} phi(|r1 - r2|) / (4π |r1 - r2|²) dV1 dV2
//! ```
//!
//! over convex and nonconvex bodies, reduced to one-dimensional integrals
//! against signed ("quasi-probability") chord and ray length distributions.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of
//! its inputs and an explicit random stream; threads, files and the CLI live
//! in the `chordkit` companion crate, which plugs its worker pool in through
//! [`runner::ChunkExecutor`].
//!
//! Module map:
//!
//! - [`geometry`]: CSG solids and exact line crossing lists.
//! - [`sampling`]: seeded streams, isotropic directions, kinematic lines.
//! - [`quasidist`]: signed histograms for rays and chords.
//! - [`kernels`]: `phi` with its single and double antiderivatives.
//! - [`estimators`]: chord, ray and distance-distribution estimates, and
//!   the two direct oracles.
//! - [`multibody`]: per-pair histogram matrices and two-body identities.
//! - [`runner`]: chunked, reproducible sampling loops.

#![no_std]
// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod estimators;
pub mod geometry;
pub mod kernels;
pub(crate) mod math;
pub mod multibody;
pub mod quasidist;
pub mod runner;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{Body, CrossingList, Direction3, Line, Point3, Solid, Vec3};
pub use kernels::Kernel;
