//! Lattice toolkit for one-dimensional chains with purely imaginary
//! sinusoidal on-site potentials.
//!
//! The crate builds finite open-chain and Bloch Hamiltonians for gain/loss
//! modulations `i V sin(2 pi q/p n + delta)`, diagonalizes them with
//! biorthogonal left/right eigenvector pairing, measures real line gaps and
//! symmetry residuals, detects zero modes (`Re E = 0`) at edges and domain
//! walls, computes the biorthogonal Wilson-loop polarization and global Berry
//! phase, assembles polar phase diagrams, and integrates the nonlinear
//! saturable-gain field equations used for laser mode selection.

pub mod error;
pub mod export;
pub mod laser;
pub mod model;
pub mod spectral;
pub mod svg;
pub mod topology;

pub use error::{Error, Result};
