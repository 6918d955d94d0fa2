//! Detection: Bob's keyed binary decision, Eve's keyless M-ary decision,
//! the closed-form neighbor error probability, exact per-level error sums
//! for the link budget, and eye-pattern histograms.

use crate::channel::MeasurementOutcome;
use crate::modem::{running_key_parity, LevelTable, Scheme};
use crate::keystream::RunningKeyBlock;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::collections::BTreeMap;
use std::io::Write;

/// Gaussian upper-tail probability Q(x).
fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Per-receiver error bookkeeping with a signed level-offset histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub trials: u64,
    pub errors: u64,
    pub ber: f64,
    /// Signed offset (estimated - true, in levels) -> count. Offset 0 is a
    /// correct decision; bit errors are recorded as +/-1.
    pub confusion: BTreeMap<i64, u64>,
}

impl DetectionStats {
    pub fn new() -> Self {
        DetectionStats {
            trials: 0,
            errors: 0,
            ber: 0.0,
            confusion: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, offset: i64) {
        self.trials += 1;
        if offset != 0 {
            self.errors += 1;
        }
        *self.confusion.entry(offset).or_insert(0) += 1;
        self.ber = self.errors as f64 / self.trials as f64;
    }

    /// Smallest half-width w such that offsets in [-w, w] cover at least
    /// the given fraction of the recorded errors. Zero when error-free.
    pub fn error_spread(&self, coverage: f64) -> u32 {
        if self.errors == 0 {
            return 0;
        }
        let mut widths: Vec<(u64, u64)> = self
            .confusion
            .iter()
            .filter(|(&off, _)| off != 0)
            .map(|(&off, &c)| (off.unsigned_abs(), c))
            .collect();
        widths.sort_unstable();
        let mut seen = 0u64;
        for (w, c) in widths {
            seen += c;
            if seen as f64 >= coverage * self.errors as f64 {
                return w as u32;
            }
        }
        self.confusion
            .keys()
            .map(|o| o.unsigned_abs() as u32)
            .max()
            .unwrap_or(0)
    }
}

impl Default for DetectionStats {
    fn default() -> Self {
        Self::new()
    }
}

/// Bob's keyed binary detection of a direct-detection outcome.
///
/// The decision threshold is the midpoint of the two attenuated pair
/// intensities selected by the running key; the threshold decision is then
/// unmapped through the basis parity and the OSK bit. An outcome exactly at
/// threshold decides bit 1.
pub fn bob_detect(
    outcome: &MeasurementOutcome,
    block: &RunningKeyBlock,
    table: &LevelTable,
    kappa: f64,
) -> Result<bool> {
    let y = match outcome {
        MeasurementOutcome::Direct(y) => *y,
        other => {
            return Err(Error::InvalidParameter(format!(
                "bob_detect needs a direct-detection outcome, got {:?}",
                other.mode()
            )))
        }
    };
    if block.value >= table.m() {
        return Err(Error::InvalidParameter(format!(
            "running key value {} out of range for M={}",
            block.value,
            table.m()
        )));
    }
    let (lo, hi) = table.pair(block.value);
    let k2 = kappa * kappa;
    let threshold = k2 * (table.intensity(lo) + table.intensity(hi)) / 2.0;
    if y == threshold {
        return Ok(true);
    }
    let upper = y > threshold;
    Ok(upper ^ block.osk ^ running_key_parity(block.value))
}

/// Index of the sorted value nearest to y, ties toward the lower index.
fn nearest_index(values: &[f64], y: f64) -> usize {
    let n = values.len();
    let pos = values.partition_point(|&v| v < y);
    if pos == 0 {
        return 0;
    }
    if pos == n {
        return n - 1;
    }
    let d_lo = y - values[pos - 1];
    let d_hi = values[pos] - y;
    if d_lo <= d_hi {
        pos - 1
    } else {
        pos
    }
}

/// Eve's keyless 2M-ary detection: the level whose attenuated signal value
/// is nearest the outcome. Direct detection compares intensities; homodyne
/// and heterodyne compare the in-phase amplitude.
pub fn eve_mary_detect(
    outcome: &MeasurementOutcome,
    table: &LevelTable,
    kappa: f64,
) -> Result<usize> {
    match (outcome, table.scheme()) {
        (MeasurementOutcome::Direct(y), Scheme::Intensity) => {
            let k2 = kappa * kappa;
            let vals: Vec<f64> = (0..table.num_levels())
                .map(|i| k2 * table.intensity(i))
                .collect();
            Ok(nearest_index(&vals, *y))
        }
        (MeasurementOutcome::Heterodyne(z), _) => {
            let vals: Vec<f64> = (0..table.num_levels())
                .map(|i| kappa * table.amplitude(i))
                .collect();
            Ok(nearest_index(&vals, z.re))
        }
        (MeasurementOutcome::Homodyne(x), Scheme::Amplitude) => {
            let vals: Vec<f64> = (0..table.num_levels())
                .map(|i| kappa * table.amplitude(i))
                .collect();
            Ok(nearest_index(&vals, *x))
        }
        (outcome, scheme) => Err(Error::InvalidParameter(format!(
            "measurement mode {:?} does not match table scheme {scheme:?}",
            outcome.mode()
        ))),
    }
}

/// Error probability between two neighboring levels separated by `delta`
/// under Gaussian noise of standard deviation `sigma`:
/// `1/2 - Phi_0(t0)` with `t0 = (delta/2)/sigma`.
pub fn neighbor_error_prob(delta: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    Ok(q_func(delta / (2.0 * sigma)))
}

/// Bob's exact closed-form bit error rate at transmissivity `kappa`
/// (intensity scheme, direct detection, exact per-level shot noise).
pub fn bob_error_closed(table: &LevelTable, kappa: f64) -> Result<f64> {
    if table.scheme() != Scheme::Intensity {
        return Err(Error::InvalidParameter(
            "closed-form link errors are defined for the intensity scheme".into(),
        ));
    }
    if kappa <= 0.0 {
        // No light reaches the receiver: the keyed decision is a coin.
        return Ok(0.5);
    }
    let m = table.m() as usize;
    let k2 = kappa * kappa;
    let mut total = 0.0;
    for v in 0..m {
        let (lo, hi) = table.pair(v as u32);
        let threshold = k2 * (table.intensity(lo) + table.intensity(hi)) / 2.0;
        for idx in [lo, hi] {
            let mean = k2 * table.intensity(idx);
            let sigma = kappa * table.amplitude(idx);
            if sigma == 0.0 {
                continue;
            }
            // Probability the measurement falls on the wrong side.
            total += q_func((threshold - mean).abs() / sigma);
        }
    }
    Ok(total / (2.0 * m as f64))
}

/// Decision boundaries (midpoints) of the attenuated intensity levels.
fn intensity_boundaries(table: &LevelTable, kappa: f64) -> Vec<f64> {
    let k2 = kappa * kappa;
    (0..table.num_levels() - 1)
        .map(|i| k2 * (table.intensity(i) + table.intensity(i + 1)) / 2.0)
        .collect()
}

/// P(estimate = j | true = i) for keyless nearest-intensity detection with
/// exact per-level shot noise.
fn confusion_prob(table: &LevelTable, kappa: f64, bounds: &[f64], i: usize, j: usize) -> f64 {
    let mean = kappa * kappa * table.intensity(i);
    let sigma = kappa * table.amplitude(i);
    if sigma == 0.0 {
        return if i == j { 1.0 } else { 0.0 };
    }
    let upper = if j + 1 < table.num_levels() {
        1.0 - q_func((bounds[j] - mean) / sigma)
    } else {
        1.0
    };
    let lower = if j > 0 {
        1.0 - q_func((bounds[j - 1] - mean) / sigma)
    } else {
        0.0
    };
    (upper - lower).max(0.0)
}

/// Eve's exact per-symbol error probability for keyless 2M-ary detection.
pub fn eve_symbol_error_closed(table: &LevelTable, kappa: f64) -> Result<f64> {
    if table.scheme() != Scheme::Intensity {
        return Err(Error::InvalidParameter(
            "closed-form link errors are defined for the intensity scheme".into(),
        ));
    }
    let n = table.num_levels();
    let bounds = intensity_boundaries(table, kappa);
    let mut correct = 0.0;
    for i in 0..n {
        correct += confusion_prob(table, kappa, &bounds, i, i);
    }
    Ok(1.0 - correct / n as f64)
}

/// Eve's exact bit-inference error for keyless detection with OSK off: she
/// maps her level estimate through the public half/parity rule. Errors occur
/// whenever the estimate flips `half XOR parity` relative to the truth.
pub fn eve_bit_error_closed(table: &LevelTable, kappa: f64) -> Result<f64> {
    if table.scheme() != Scheme::Intensity {
        return Err(Error::InvalidParameter(
            "closed-form link errors are defined for the intensity scheme".into(),
        ));
    }
    let n = table.num_levels();
    let bounds = intensity_boundaries(table, kappa);
    let infer = |idx: usize| table.is_upper(idx) ^ running_key_parity(table.basis(idx));
    let mut err = 0.0;
    for i in 0..n {
        let truth = infer(i);
        for j in 0..n {
            if infer(j) != truth {
                err += confusion_prob(table, kappa, &bounds, i, j);
            }
        }
    }
    Ok(err / n as f64)
}

/// One sample of an eye trace: a time position inside the symbol slot, the
/// measured value, and the rail (level group) it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeSample {
    /// Slot phase in [0, 1).
    pub phase: f64,
    pub value: f64,
    pub rail: u32,
}

/// 2-D eye-pattern histogram with an envelope-gap opening metric.
///
/// The opening is the minimum vertical gap between the 0.1%/99.9% quantile
/// envelopes of adjacent rails over the middle third of the slot; a closed
/// eye has a non-positive opening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeHistogram {
    pub phase_bins: usize,
    pub value_bins: usize,
    pub value_min: f64,
    pub value_max: f64,
    pub total: u64,
    /// Counts in phase-major order: `counts[p * value_bins + v]`.
    pub counts: Vec<u64>,
    /// None when no samples were ingested.
    pub opening: Option<f64>,
    pub rails: u32,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Build the eye histogram and opening metric from trace samples.
pub fn eye_histogram(samples: &[EyeSample], phase_bins: usize, value_bins: usize) -> EyeHistogram {
    if samples.is_empty() {
        return EyeHistogram {
            phase_bins,
            value_bins,
            value_min: 0.0,
            value_max: 0.0,
            total: 0,
            counts: vec![0; phase_bins * value_bins],
            opening: None,
            rails: 0,
        };
    }
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for s in samples {
        vmin = vmin.min(s.value);
        vmax = vmax.max(s.value);
    }
    if vmin == vmax {
        vmax = vmin + 1.0;
    }
    let mut counts = vec![0u64; phase_bins * value_bins];
    for s in samples {
        let p = ((s.phase * phase_bins as f64) as usize).min(phase_bins - 1);
        let v = (((s.value - vmin) / (vmax - vmin) * value_bins as f64) as usize)
            .min(value_bins - 1);
        counts[p * value_bins + v] += 1;
    }

    // Envelope statistics per rail over the middle third of the slot.
    let mut by_rail: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for s in samples {
        if (0.333..0.667).contains(&s.phase) {
            by_rail.entry(s.rail).or_default().push(s.value);
        }
    }
    if by_rail.is_empty() {
        // Degenerate phase sampling; fall back to all phases.
        for s in samples {
            by_rail.entry(s.rail).or_default().push(s.value);
        }
    }
    let mut envelopes: Vec<(f64, f64, f64)> = by_rail
        .values_mut()
        .map(|vals| {
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let med = quantile(vals, 0.5);
            (med, quantile(vals, 0.001), quantile(vals, 0.999))
        })
        .collect();
    envelopes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let opening = if envelopes.len() < 2 {
        None
    } else {
        Some(
            envelopes
                .windows(2)
                .map(|w| w[1].1 - w[0].2)
                .fold(f64::INFINITY, f64::min),
        )
    };
    EyeHistogram {
        phase_bins,
        value_bins,
        value_min: vmin,
        value_max: vmax,
        total: samples.len() as u64,
        counts,
        opening,
        rails: by_rail.len() as u32,
    }
}

impl EyeHistogram {
    /// CSV export: `slot_bin,intensity_bin,count` (non-zero cells).
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "slot_bin,intensity_bin,count")?;
        for p in 0..self.phase_bins {
            for v in 0..self.value_bins {
                let c = self.counts[p * self.value_bins + v];
                if c > 0 {
                    writeln!(w, "{p},{v},{c}")?;
                }
            }
        }
        Ok(())
    }
}
