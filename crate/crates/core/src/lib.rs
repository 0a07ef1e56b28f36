#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` guards are deliberate: they reject NaN where `x <= 0.0`
// would silently accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Adaptive cube coverings, fractional semi-norms, Riesz energies, and the
//! machinery for verifying the functional inequalities built on them.
//!
//! The crate is `no_std`-compatible (with `alloc`); every transcendental
//! goes through `libm`, so results do not depend on the `std` feature.

extern crate alloc;

pub mod covering;
pub mod density;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod math;
pub mod optimize;
pub mod quadrature;
pub mod report;
pub mod seminorm;

pub use error::{Error, Result};
pub use geometry::Cube;
pub use quadrature::{ErrorEstimate, QuadratureRule};
