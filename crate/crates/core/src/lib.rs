//! Asymptotic analysis of classical electrodynamics: fields from null-infinity data,
//! long-range (infrared and Coulomb) variables, radiated Poincaré charges with their
//! infrared mixing term, and massive Dirac fields on the unit hyperboloid.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod charges;
pub mod em;
pub mod error;
pub mod harmonics;
pub mod hyperboloid;
pub mod pulse;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod sphere;
pub mod spinors;
pub mod verify;
pub mod worldline;

pub use error::{Error, Result};
