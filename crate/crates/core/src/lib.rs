//! Equilibrium statistics of hard rods in parking configurations.
//!
//! Unit rods on a line with every gap between neighbouring left endpoints in
//! `[1, 2]`: no rod overlaps and no further rod fits. The crate computes
//!
//! - the equation of state and thermodynamic potentials ([`eos`]),
//! - Irwin-Hall densities in exact arithmetic ([`specialfns`]),
//! - the pair distribution `g(x)` and correlation `h(x) = g(x) - 1`
//!   ([`paircorr`]),
//! - the Laplace transform of `g`, its poles and the correlation length
//!   ([`spectral`]),
//! - Monte Carlo samplers for the isobaric and canonical ensembles and the
//!   probability that uniform points form a parking configuration
//!   ([`ensembles`]).
//!
//! Loops over grid points and Monte Carlo samples run through [`Exec`],
//! which uses rayon when the `parallel` feature is on.

pub mod ensembles;
pub mod eos;
pub mod error;
pub mod exec;
pub mod ext;
pub mod grid;
pub mod paircorr;
pub mod rational;
pub mod rng;
pub mod specialfns;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Exec;
pub use ext::ExtFloat;
pub use grid::GridFunction;
pub use rational::Rational;
