//! Numerical laboratory for the one-parameter family of walks interpolating
//! between a persistent (correlated) random walk and a discrete-time quantum
//! walk on ℤ.
//!
//! The channel `L_p = p L^RW + (1−p) L^QW` is evolved exactly on block
//! density operators ([`evolution`]) or unraveled into pure-state
//! trajectories ([`trajectory`]). The diffusive limit law (a normal variance
//! mixture whose mixing law is arcsine) lives in [`limit_law`]; the
//! Fourier-space generator and its perturbative spectrum in [`fourier`] and
//! [`spectral`]; the `p = γ/s` ballistic regime in [`poisson`].
//!
//! Simulation backends implement [`engine::Engine`] and are looked up by
//! name in an [`engine::EngineRegistry`].

pub mod coin;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod limit_law;
pub mod linalg;
pub mod output;
pub mod poisson;
pub mod spectral;
pub mod trajectory;

pub use coin::{Coin, WalkParams};
pub use distribution::Distribution;
pub use engine::{Engine, EngineOptions, EngineOutput, EngineRegistry};
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
