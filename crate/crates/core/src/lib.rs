//! Simulation and verification toolkit for squared Bessel particle systems.
//!
//! The system of `p` ordered particles
//!
//! ```text
//! dX_i = 2 sqrt(|X_i|) dB_i + (alpha + sum_{j != i} (|X_i| + |X_j|) / (X_i - X_j) 1{X_i != X_j}) dt
//! ```
//!
//! is simulated in three equivalent representations: the particles
//! themselves ([`sde::simulate_particles`]), the eigenvalues of a matrix
//! diffusion ([`sde::simulate_wishart`]) and the elementary symmetric
//! polynomials of the particles ([`sde::simulate_polys`]). The classification
//! of start points into uniqueness and non-negativity regimes lives in
//! [`domain`], the polynomial algebra in [`sympoly`], the constructive
//! non-unique solutions in [`constructions`] and the Monte Carlo tooling in
//! [`analysis`].

pub mod analysis;
pub mod cli;
pub mod constructions;
pub mod domain;
mod error;
pub mod linalg;
pub mod sde;
pub mod sympoly;

pub use domain::{ParticleConfig, SystemParams};
pub use error::{Error, Result};
pub use sympoly::SymPolyVector;
