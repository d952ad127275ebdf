//! Spectral mild-solution laboratory for the two-dimensional
//! parabolic-parabolic Keller-Segel system
//!
//! ```text
//! u_t - Δu + ∇·(u∇v) = 0,   v_t - Δv + v - u = 0,   (u, v)(0) = (u0, v0)
//! ```
//!
//! on a periodic torus. Solutions are built by Picard iteration of the
//! Duhamel formulation over a discrete time grid, and the estimates that
//! drive the contraction argument are checked numerically.

pub mod data;
pub mod duhamel;
pub mod error;
pub mod field;
pub mod lab;
pub mod norms;
pub mod semigroup;
pub mod solver;

pub use error::{KsError, Result};
