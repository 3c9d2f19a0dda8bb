//! Faster-than-Nyquist (FTN) signaling laboratory.
//!
//! The crate is organised bottom-up:
//!
//! - [`pulse`]: shaping pulses, their spectra, ISI taps and folded spectra.
//! - [`model`]: frame generation, AWGN and the receiver observation models.
//! - [`capacity`]: constrained capacity, water-filling and simulated information rates.
//! - [`eq_time`]: trellis equalizers (Viterbi, BCJR, M-BCJR).
//! - [`eq_freq`]: cyclic-prefix frequency-domain MMSE and eigen-precoding.
//! - [`mazo`]: minimum-distance search and Mazo-limit scans.
//! - [`coded`]: convolutional outer code and turbo equalization.
//! - [`sensing`]: expected ambiguity functions and Doppler estimation.
//!
//! Everything is a pure function of its inputs; stochastic routines take an
//! explicit seed and are bit-for-bit reproducible.

pub mod capacity;
pub mod coded;
pub mod eq_freq;
pub mod eq_time;
mod error;
pub mod mazo;
pub mod model;
pub mod pulse;
pub mod sensing;
pub mod util;

pub use error::{Error, Result};
pub use model::{Constellation, FtnConfig, Observation, ObservationModel, SymbolFrame, Waveform};
pub use pulse::{FoldedSpectrum, IsiChannel, PulseKind, PulseShape};

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
