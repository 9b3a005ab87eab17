//! Numerical laboratory for the thin (boundary) obstacle problem.
//!
//! The crate solves the discrete problem by projected relaxation and then
//! probes the solution near its free boundary: Almgren's frequency and
//! sphere averages, blow-up profiles, contact-set geometry, monotone
//! cones, a barrier comparison and a Hölder diagnostic of directional
//! derivative quotients. Closed-form global solutions serve as oracles.

pub mod blowup;
pub mod error;
pub mod exact;
pub mod free_boundary;
pub mod frequency;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Direction, Grid, ScalarField};
