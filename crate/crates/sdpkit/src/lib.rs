//! Self-contained dense semidefinite-programming toolkit.
//!
//! The crate is organized around a small matrix kernel and a primal-dual
//! interior-point solver, with application layers built on top of them:
//!
//! - [`symcore`]: symmetric-matrix decompositions and PSD tests;
//! - [`sdpmodel`]: primal/dual SDP representations, form conversions and
//!   the SDPA text format;
//! - [`sdpsolve`]: a dense interior-point solver returning ε-optimal
//!   primal/dual pairs;
//! - [`theta`]: the Lovász theta number in its equivalent formulations,
//!   the ψ moment hierarchy and the fractional chromatic LP;
//! - [`copos`]: copositive / completely positive cone hierarchies and
//!   stable-set formulations;
//! - [`sos`]: sum-of-squares decomposition of homogeneous polynomials;
//! - [`qcr`]: quadratic convex reformulation of binary quadratic programs
//!   with an exact branch-and-bound;
//! - [`maxcut`]: the Goemans-Williamson relaxation and hyperplane rounding.
//!
//! Everything is dense and deterministic, sized for desk-scale instances
//! (matrix orders up to a few dozen). See the `examples/` directory for a
//! runnable tour of each capability; the `sdpkit` binary exposes the same
//! operations on text inputs.

mod linalg;

pub mod copos;
pub mod error;
pub mod maxcut;
pub mod qcr;
pub mod sdpmodel;
pub mod sdpsolve;
pub mod sos;
pub mod symcore;
pub mod theta;

pub mod cli;

pub use error::{Error, Result};
