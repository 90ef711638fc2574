//! Small-Hilbert-space simulator for single-photon interference, ideal
//! premeasurement and back-to-back two-photon correlations.
//!
//! - [`qcore`]: labeled kets, bipartite states, density operators, partial
//!   trace, Schmidt coefficients.
//! - [`optics`]: beam splitter and phase shifter unitaries, the Mach–Zehnder
//!   interferometer, delayed choice.
//! - [`entangle`]: the premeasurement map and subsystem-coherence checks.
//! - [`nonlocal`]: the entangled-pair interferometer, correlation functions,
//!   Bell/CHSH evaluation and the comparison table.
//! - [`stochastic`]: seeded sampling, detection streams, coincidence matching.
//! - [`cli`]: configuration, experiment dispatch and result files.

pub mod cli;
pub mod entangle;
pub mod error;
pub mod nonlocal;
pub mod optics;
pub mod qcore;
pub mod stochastic;

pub use error::{QError, Result};
