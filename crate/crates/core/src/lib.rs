//! Corner layers of Gross–Pitaevskii ground states near the Thomas–Fermi boundary.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] evaluates Airy functions on the real line.
//! * [`painleve`] solves the Hastings–McLeod profile problem and its half-line variants.
//! * [`trap`] models trapping potentials and their Thomas–Fermi data.
//! * [`gpsolve`] computes unit-mass ground states (radial Newton, 2-D gradient flow).
//! * [`layers`] assembles the matched inner/outer approximation and closed-form predictions.
//! * [`verify`] compares ground states with those predictions and fits rates.
//! * [`cli`] drives everything from the command line.

// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod contour;
pub mod error;
pub mod gpsolve;
pub mod io;
pub mod layers;
pub mod numerics;
pub mod painleve;
pub mod specfun;
pub mod trap;
pub mod verify;

pub use error::{Error, Result};
