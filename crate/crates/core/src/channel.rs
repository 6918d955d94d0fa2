//! Coherent-state propagation and measurement noise.
//!
//! An energy-loss channel multiplies amplitudes by a transmissivity
//! `kappa`. Measurements add the quantum noise of a coherent state:
//! two-dimensional Gaussian with variance 1/2 per quadrature for
//! heterodyne, one-dimensional Gaussian with variance 1/4 for homodyne,
//! and the shot-noise-limited Gaussian (variance = mean intensity) for
//! direct detection. Beam-splitter cloning divides the amplitude among Q
//! copies.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Amplitude transmissivity of the Alice→receiver channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    kappa: f64,
}

impl ChannelParams {
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidParameter(format!(
                "kappa {kappa} outside [0, 1]"
            )));
        }
        Ok(ChannelParams { kappa })
    }

    /// Fiber model: `kappa = 10^(-loss_db_per_km * length_km / 20)`.
    pub fn from_fiber(loss_db_per_km: f64, length_km: f64) -> Result<Self> {
        if loss_db_per_km < 0.0 || length_km < 0.0 {
            return Err(Error::InvalidParameter(
                "fiber loss and length must be non-negative".into(),
            ));
        }
        Ok(ChannelParams {
            kappa: 10f64.powf(-loss_db_per_km * length_km / 20.0),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Attenuate a field amplitude: `kappa * alpha`.
pub fn attenuate(alpha: f64, params: &ChannelParams) -> f64 {
    params.kappa * alpha
}

/// What a receiver measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    Heterodyne,
    Homodyne,
    Direct,
}

/// A tagged noisy observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementOutcome {
    /// Complex field value, variance 1/2 per quadrature.
    Heterodyne(Complex64),
    /// Single quadrature, variance 1/4.
    Homodyne(f64),
    /// Intensity, shot-noise Gaussian (variance = mean), clamped at zero.
    Direct(f64),
}

impl MeasurementOutcome {
    pub fn mode(&self) -> DetectionMode {
        match self {
            MeasurementOutcome::Heterodyne(_) => DetectionMode::Heterodyne,
            MeasurementOutcome::Homodyne(_) => DetectionMode::Homodyne,
            MeasurementOutcome::Direct(_) => DetectionMode::Direct,
        }
    }
}

/// Measure a (real-amplitude) coherent state.
pub fn measure<R: Rng>(alpha: f64, mode: DetectionMode, rng: &mut R) -> MeasurementOutcome {
    measure_scaled(alpha, mode, 1.0, 0.0, rng)
}

/// Measurement with a noise scale (diagnostics; 0 disables noise) and an
/// additive excess-noise variance (device noise, default 0).
pub fn measure_scaled<R: Rng>(
    alpha: f64,
    mode: DetectionMode,
    noise_scale: f64,
    excess_var: f64,
    rng: &mut R,
) -> MeasurementOutcome {
    match mode {
        DetectionMode::Heterodyne => {
            let sigma = noise_scale * (0.5 + excess_var).sqrt();
            let (nr, ni) = if sigma > 0.0 {
                let d = Normal::new(0.0, sigma).unwrap();
                (d.sample(rng), d.sample(rng))
            } else {
                (0.0, 0.0)
            };
            MeasurementOutcome::Heterodyne(Complex64::new(alpha + nr, ni))
        }
        DetectionMode::Homodyne => {
            let sigma = noise_scale * (0.25 + excess_var).sqrt();
            let n = if sigma > 0.0 {
                Normal::new(0.0, sigma).unwrap().sample(rng)
            } else {
                0.0
            };
            MeasurementOutcome::Homodyne(alpha + n)
        }
        DetectionMode::Direct => {
            let mean = alpha * alpha;
            let sigma = noise_scale * (mean + excess_var).sqrt();
            let n = if sigma > 0.0 {
                Normal::new(0.0, sigma).unwrap().sample(rng)
            } else {
                0.0
            };
            MeasurementOutcome::Direct((mean + n).max(0.0))
        }
    }
}

/// Beam-splitter cloning convention for the amplitude of each of Q copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloneConvention {
    /// `alpha / Q` per copy, as the attack analysis states it.
    Paper,
    /// `alpha / sqrt(Q)` per copy, conserving total energy.
    EnergyConserving,
}

/// Split a coherent amplitude into Q copies.
pub fn beamsplit_clone(alpha: f64, q: u32, convention: CloneConvention) -> Result<Vec<f64>> {
    if q < 1 {
        return Err(Error::InvalidParameter("Q must be >= 1".into()));
    }
    let each = match convention {
        CloneConvention::Paper => alpha / q as f64,
        CloneConvention::EnergyConserving => alpha / (q as f64).sqrt(),
    };
    Ok(vec![each; q as usize])
}

/// Deterministic per-purpose random stream.
///
/// Every Monte Carlo consumer derives its own ChaCha stream from the master
/// seed and a stream id; trial ids are added to a purpose base, so results
/// are reproducible independent of worker count or evaluation order.
pub fn derive_rng(master_seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream-id bases used by the built-in simulations.
pub mod streams {
    pub const DATA: u64 = 1 << 32;
    pub const KEY: u64 = 2 << 32;
    pub const BOB_NOISE: u64 = 3 << 32;
    pub const EVE_NOISE: u64 = 4 << 32;
    pub const ATTACK_TRIAL: u64 = 5 << 32;
    pub const EYE: u64 = 6 << 32;
    pub const MONTE_CARLO: u64 = 7 << 32;
}
