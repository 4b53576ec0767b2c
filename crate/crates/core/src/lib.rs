//! Numerical lab for the damped hyperbolic gradient system
//! `alpha u_tt + u_t = -grad V(u) + u_xx` on the line.
//!
//! The pieces, bottom up: polynomial potentials and their constants
//! ([`potential`]), travelling-front profiles ([`frontsolver`]), a damped
//! leapfrog PDE solver ([`pdesim`]), energy and firewall diagnostics
//! ([`diagnostics`]), terrace fitting ([`terrace`]) and the acceptance
//! campaign ([`acceptance`]).

pub mod error;
pub mod polynomial;
pub mod potential;
pub mod linalg;
pub mod frontsolver;
pub mod pdesim;
pub mod diagnostics;
pub mod terrace;
pub mod io;
pub mod acceptance;

pub use error::{Error, Result};
pub use potential::{PotentialAnalysis, PotentialSpec};
