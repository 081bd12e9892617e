//! Simulation and analysis of a single spin excitation hopping through a
//! disordered network with power-law couplings, subject to dephasing noise.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: couplings, static disorder, the single-excitation
//!   Hamiltonian and its spectrum.
//! - [`noise`]: telegraph and spectrally shaped Gaussian on-site noise.
//! - [`dynamics`]: pure-state trajectories, the Lindblad dephasing equation,
//!   the classical rate equation, and realization ensembles.
//! - [`analysis`]: transport efficiency, wave-packet width, power-law fits,
//!   light-cone cutoffs and bootstrap intervals.
//!
//! Energies are angular frequencies (rad/s) with ħ = 1; times are seconds.
//! Ensembles run on rayon when the default `parallel` feature is enabled.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod noise;
pub mod parallel;
pub mod seed;

pub use error::{Error, Result};
pub use parallel::Workers;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
