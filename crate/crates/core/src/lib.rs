//! Desk-scale simulator of entanglement swapping between two independent,
//! synchronized pulsed entangled-photon sources.
//!
//! The crate is organized around the physical pipeline:
//!
//! - [`quantum`] — exact state algebra for 1..4 polarization qubits
//!   (density matrices, Bell basis, POVMs, partial traces).
//! - [`wavepacket`] — temporal/spectral photon model: coherence time from
//!   filter bandwidth and the indistinguishability scalar `I`.
//! - [`sync`] — passive Kerr-coupled synchronization of the two pump
//!   lasers as a stochastic round-trip map, plus the SFG cross-correlator.
//! - [`swap`] — four-photon state, partial-distinguishability Bell-state
//!   measurement, swapped state and its visibility/fidelity.
//! - [`chsh`] — CHSH value (analytic and Monte-Carlo) with uncertainties.
//! - [`scenario`] / [`pipeline`] — config-driven reproducible runs.
//!
//! Basis convention used everywhere: |H> = 0, |V> = 1, photon 1 is the
//! most significant qubit. Angles are degrees at every public boundary.

pub mod chsh;
pub mod pipeline;
pub mod quantum;
pub mod scenario;
pub mod swap;
pub mod sync;
pub mod wavepacket;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("measurement outcome has probability below 1e-15 (null outcome)")]
    NullOutcome,
    #[error("lasers not locked: {0}")]
    NotLocked(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("scenario error at {location}: {message}")]
    Scenario { location: String, message: String },
    #[error("io error for {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SimError>;
