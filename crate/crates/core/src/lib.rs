//! Link-level simulator and analysis toolkit for receive spatial modulation
//! (RSM) through a reconfigurable intelligent surface (RIS), with receive
//! antenna selection.
//!
//! The transmitter sends one of `M` constellation symbols while the RIS
//! steers its reflection toward one of `n_s` receive antennas, so each
//! channel use carries `log2(n_s) + log2(M)` bits. The toolkit covers:
//!
//! - [`modem`]: Gray-labelled QAM/PSK constellations and the bit ↔
//!   (antenna, symbol) mapping.
//! - [`channel`]: Rayleigh fading between RIS elements and antennas, phase
//!   alignment, and noisy signal generation.
//! - [`selection`]: the COAS, ACAS and EDAS receive-antenna-selection rules.
//! - [`detection`]: joint maximum-likelihood and two-stage greedy detectors.
//! - [`analysis`]: semi-analytic bit-error bound, ergodic capacity
//!   estimation, and exact real-multiplication complexity counts.
//! - [`harness`]: a deterministic, parallel Monte Carlo BER engine with
//!   CSV/JSON persistence.
//!
//! The companion guide under `book/` walks through each subsystem; its code
//! snippets are compiled as doc-tests by the `ris-rsm-book` crate.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod detection;
pub mod harness;
pub mod modem;
pub mod rng;
pub mod selection;

pub use num_complex::Complex64;
