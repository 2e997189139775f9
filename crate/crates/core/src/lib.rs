//! Information entropy of open compartmental systems in equilibrium.
//!
//! A system `dx/dt = B x + u` at steady state is read from the point of view
//! of a single particle: it enters through pool `j` with probability
//! `u_j / sum(u)`, jumps between pools as an absorbing continuous-time
//! Markov chain and eventually leaves. The entropy of that particle's whole
//! path, and its rates per unit time and per jump, are computed exactly and
//! checked against a seeded Monte Carlo sampler.
//!
//! ```
//! use compartmental_entropy::{entropy::EntropyReport, system::CompartmentalSystem};
//!
//! // serial two-pool system with unit rates
//! let sys = CompartmentalSystem::from_rows(&[1.0, 0.0], &[&[-1.0, 0.0], &[1.0, -1.0]]).unwrap();
//! let report = EntropyReport::new(&sys).unwrap();
//! assert!((report.path_entropy - 2.0).abs() < 1e-12);
//! assert!((report.rate_per_time - 1.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` rejects NaN as well as nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod io;
pub mod maxent;
pub mod random;
pub mod sampler;
pub mod system;
pub mod zoo;

pub use error::{Error, Result};
pub use system::CompartmentalSystem;
