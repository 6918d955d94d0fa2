//! The 2M-level signal alphabet and keyed bit mapping.
//!
//! The transmitter's amplitude range is divided into 2M levels, uniformly
//! spaced either in field amplitude or in intensity. Basis m pairs levels
//! (m, m+M), so the intensity gap inside every pair equals half the full
//! range. One data bit is sent per symbol: the running key selects the
//! basis, and the bit picks one of its two levels, with the polarity
//! alternating between adjacent bases and optionally swapped per-symbol by
//! the OSK bit. Under this mapping the coarse up/down observable reveals
//! only `data XOR parity(running key)`, which is what the indirect
//! (parity) attack measures.

use crate::keystream::RunningKeyBlock;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Which metric the 2M levels are uniform in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Uniform field-amplitude spacing `(a_max - a_min) / 2M`.
    Amplitude,
    /// Uniform intensity spacing `(a_max^2 - a_min^2) / 2M` (direct laser
    /// modulation).
    Intensity,
}

/// The designed 2M-level alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTable {
    scheme: Scheme,
    m: u32,
    alpha_min: f64,
    alpha_max: f64,
    delta: f64,
    amplitudes: Vec<f64>,
}

/// Design the 2M-level table over `[alpha_min, alpha_max)`.
pub fn design_levels(alpha_min: f64, alpha_max: f64, m: u32, scheme: Scheme) -> Result<LevelTable> {
    if !(alpha_min >= 0.0 && alpha_min < alpha_max) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= alpha_min < alpha_max, got ({alpha_min}, {alpha_max})"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M must be >= 2, got {m}")));
    }
    let levels = 2 * m as usize;
    let (delta, amplitudes) = match scheme {
        Scheme::Amplitude => {
            let delta = (alpha_max - alpha_min) / levels as f64;
            let amps = (0..levels)
                .map(|i| alpha_min + i as f64 * delta)
                .collect();
            (delta, amps)
        }
        Scheme::Intensity => {
            let i_min = alpha_min * alpha_min;
            let i_max = alpha_max * alpha_max;
            let delta = (i_max - i_min) / levels as f64;
            let amps = (0..levels)
                .map(|i| (i_min + i as f64 * delta).sqrt())
                .collect();
            (delta, amps)
        }
    };
    Ok(LevelTable {
        scheme,
        m,
        alpha_min,
        alpha_max,
        delta,
        amplitudes,
    })
}

impl LevelTable {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of bases (half the number of levels).
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of levels, 2M.
    pub fn num_levels(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    /// Level spacing in the designed metric.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn amplitude(&self, index: usize) -> f64 {
        self.amplitudes[index]
    }

    pub fn intensity(&self, index: usize) -> f64 {
        self.amplitudes[index] * self.amplitudes[index]
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Basis number of a level.
    pub fn basis(&self, index: usize) -> u32 {
        (index % self.m as usize) as u32
    }

    /// True for levels in the upper half of the line.
    pub fn is_upper(&self, index: usize) -> bool {
        index >= self.m as usize
    }

    /// The other member of the basis pair.
    pub fn mate(&self, index: usize) -> usize {
        (index + self.m as usize) % self.num_levels()
    }

    /// Level pair (lower, upper) of a basis.
    pub fn pair(&self, basis: u32) -> (usize, usize) {
        (basis as usize, basis as usize + self.m as usize)
    }

    /// Shot-noise standard deviation at the mid-range amplitude, scaled by
    /// the channel transmissivity. For the amplitude scheme this is the
    /// homodyne quadrature noise (variance 1/4) instead.
    pub fn mid_sigma(&self, kappa: f64) -> f64 {
        match self.scheme {
            Scheme::Intensity => kappa * (self.alpha_min + self.alpha_max) / 2.0,
            Scheme::Amplitude => 0.5,
        }
    }

    /// Level spacing seen after amplitude transmissivity `kappa`.
    pub fn delta_at(&self, kappa: f64) -> f64 {
        match self.scheme {
            Scheme::Intensity => kappa * kappa * self.delta,
            Scheme::Amplitude => kappa * self.delta,
        }
    }

    /// CSV export: `index,amplitude,intensity,basis,mate_index`.
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,amplitude,intensity,basis,mate_index")?;
        for i in 0..self.num_levels() {
            writeln!(
                w,
                "{},{},{},{},{}",
                i,
                self.amplitude(i),
                self.intensity(i),
                self.basis(i),
                self.mate(i)
            )?;
        }
        Ok(())
    }
}

/// Signal distance between neighboring states of an M-basis phase-keying
/// circle of amplitude `alpha`: `2*pi*|alpha| / 2M`. Only the distance
/// formula of the phase scheme is modeled; `m` is a positive real here.
pub fn phase_signal_distance(alpha: f64, m: f64) -> Result<f64> {
    if alpha < 0.0 || m < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "need alpha >= 0 and M >= 1, got ({alpha}, {m})"
        )));
    }
    Ok(std::f64::consts::PI * alpha / m)
}

/// Parity of a running-key value in the 1-based numbering (1, 3, 5, ... map
/// to 1): value `v` stored 0-based has parity `(v + 1) mod 2`.
pub fn running_key_parity(value: u32) -> bool {
    (value + 1) % 2 == 1
}

/// Map a data bit into one of the 2M levels.
///
/// The effective half-line bit is `bit XOR osk XOR parity(value)`; the
/// basis-parity alternation makes the up/down coarse observable equal
/// `data XOR parity` when OSK is off.
pub fn encode(bit: bool, block: &RunningKeyBlock, table: &LevelTable) -> Result<usize> {
    if block.value >= table.m() {
        return Err(Error::InvalidParameter(format!(
            "running key value {} out of range for M={}",
            block.value,
            table.m()
        )));
    }
    let upper = bit ^ block.osk ^ running_key_parity(block.value);
    Ok(block.value as usize + (upper as usize) * table.m() as usize)
}

/// Invert [`encode`] given the running key. A level outside the keyed basis
/// is a synchronization error.
pub fn decode_keyed(index: usize, block: &RunningKeyBlock, table: &LevelTable) -> Result<bool> {
    if index >= table.num_levels() {
        return Err(Error::InvalidParameter(format!(
            "level index {index} out of range"
        )));
    }
    if table.basis(index) != block.value {
        return Err(Error::SyncError {
            index,
            expected: block.value,
        });
    }
    Ok(table.is_upper(index) ^ block.osk ^ running_key_parity(block.value))
}

/// The coarse half-line a level sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    Up,
    Down,
}

impl Half {
    /// Numeric value of the observable: up = 1, down = 0.
    pub fn bit(self) -> bool {
        matches!(self, Half::Up)
    }
}

/// The indirect observable pair: which half-line the level is on, and the
/// parity of its basis number. With OSK off these satisfy
/// `half = data XOR parity` for every encoded symbol.
pub fn parity_observable(index: usize, table: &LevelTable) -> Result<(Half, bool)> {
    if index >= table.num_levels() {
        return Err(Error::InvalidParameter(format!(
            "level index {index} out of range"
        )));
    }
    let half = if table.is_upper(index) {
        Half::Up
    } else {
        Half::Down
    };
    Ok((half, running_key_parity(table.basis(index))))
}
