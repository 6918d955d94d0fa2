//! Desk-scale simulator and analysis library for the Y-00 (Yuen 2000)
//! quantum stream cipher in its intensity-modulation form.
//!
//! The library covers the full signal chain of the cipher and the standard
//! attacks against it:
//!
//! - [`keystream`] — LFSR and de Bruijn NFSR running-key generators,
//!   Berlekamp–Massey linear-complexity analysis and unicity-distance
//!   metrics.
//! - [`modem`] — the 2M-level intensity/amplitude alphabet, keyed
//!   encoding/decoding with overlapping selection keying (OSK), and the
//!   up/down parity observable.
//! - [`channel`] — coherent-state attenuation, heterodyne/homodyne/direct
//!   detection noise, and beam-splitter cloning.
//! - [`receiver`] — Bob's keyed binary detection, Eve's keyless M-ary
//!   detection, closed-form error probabilities, and eye-pattern
//!   histograms.
//! - [`secmetrics`] — brute-force complexity counts, unambiguous and
//!   Bayes-optimal discrimination of symmetric coherent ensembles,
//!   Helstrom bounds, and communication-distance solving.
//! - [`attacks`] — end-to-end cryptanalysis: the conventional stream-cipher
//!   break, the heterodyne known/chosen-plaintext attack, and the parity
//!   (indirect-observable) attack.
//! - [`sim`] — assembled Alice→Bob / Alice→Eve link simulations used by the
//!   CLI and the acceptance suite.

pub mod attacks;
pub mod channel;
pub mod keystream;
pub mod magnitude;
pub mod modem;
pub mod receiver;
pub mod secmetrics;
pub mod sim;

pub use magnitude::Magnitude;

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Keyed decoding was handed a symbol whose basis does not match the
    /// running key (loss of synchronization between Alice and Bob).
    #[error("basis sync error: symbol index {index} is not in basis {expected}")]
    SyncError { index: usize, expected: u32 },

    /// A key-targeting attack was given less material than the unicity
    /// distance of the generator requires.
    #[error("insufficient known plaintext: got {got} bits, need at least {required}")]
    InsufficientBits { got: usize, required: usize },

    /// The observed keystream is not consistent with a shift register of
    /// the assumed size.
    #[error(
        "keystream model mismatch: measured linear complexity {complexity} exceeds \
         the assumed register length {key_len}"
    )]
    ModelMismatch { key_len: usize, complexity: usize },

    /// A brute-force request was refused because the search space is too
    /// large to enumerate on a desk machine.
    #[error("complexity guard: {0}")]
    ComplexityGuard(String),

    /// A numerical routine produced a non-physical value.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A Fock-space truncation leaves more tail mass than tolerated.
    #[error(
        "Fock truncation at n_max={n_max} leaves tail mass {tail:.3e} > {limit:.1e}; \
         need n_max >= {required}"
    )]
    TruncationTail {
        n_max: usize,
        tail: f64,
        limit: f64,
        required: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
