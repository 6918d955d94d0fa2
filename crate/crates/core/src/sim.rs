//! Assembled link simulations: Alice → fiber → Bob and Alice → Eve (at the
//! transmitter), eye-pattern traces, and the BER-versus-distance sweep.

use crate::channel::{derive_rng, measure_scaled, streams, ChannelParams, DetectionMode,
    MeasurementOutcome};
use crate::keystream::{maximal_taps, running_key_blocks, Lfsr, SecretKey};
use crate::modem::{design_levels, encode, running_key_parity, LevelTable, Scheme};
use crate::receiver::{
    bob_detect, bob_error_closed, eve_bit_error_closed, eve_mary_detect,
    eve_symbol_error_closed, eye_histogram, DetectionStats, EyeHistogram, EyeSample,
};
use crate::secmetrics::{max_distance, DistanceParams};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Configuration of one transmission experiment. The default profile is the
/// demonstration scale: 20-bit LFSR key, M = 128, amplitudes 80..100,
/// OSK on, 20 km of 0.2 dB/km fiber, a million bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub key_len: u32,
    /// Tap polynomial; defaults to the built-in maximal table entry.
    pub taps: Option<Vec<u32>>,
    pub m: u32,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub osk: bool,
    pub loss_db_per_km: f64,
    pub length_km: f64,
    pub n_bits: u64,
    pub master_seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            key_len: 20,
            taps: None,
            m: 128,
            alpha_min: 80.0,
            alpha_max: 100.0,
            osk: true,
            loss_db_per_km: 0.2,
            length_km: 20.0,
            n_bits: 1_000_000,
            master_seed: 1,
        }
    }
}

impl LinkConfig {
    pub fn table(&self) -> Result<LevelTable> {
        design_levels(self.alpha_min, self.alpha_max, self.m, Scheme::Intensity)
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::from_fiber(self.loss_db_per_km, self.length_km)
    }

    fn keystream(&self) -> Result<Lfsr> {
        let taps = match &self.taps {
            Some(t) => t.clone(),
            None => maximal_taps(self.key_len).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no built-in maximal polynomial for key length {}",
                    self.key_len
                ))
            })?,
        };
        let mut rng = derive_rng(self.master_seed, streams::KEY);
        let seed = loop {
            let s: u64 = rng.random_range(1..(1u64 << self.key_len));
            if s != 0 {
                break s;
            }
        };
        Lfsr::new(taps, &SecretKey::from_u64(seed, self.key_len)?)
    }
}

/// One raw per-symbol record for CSV export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawSample {
    pub symbol: u64,
    pub data_bit: u8,
    pub level_index: u32,
    pub bob_intensity: f64,
    pub bob_bit: u8,
    pub eve_intensity: f64,
    pub eve_level: u32,
}

/// Outcome of a transmission experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionReport {
    pub kappa: f64,
    pub n_bits: u64,
    /// Bob's keyed bit decisions (offsets are +/-1 on error).
    pub bob: DetectionStats,
    /// Eve's keyless level decisions at the transmitter.
    pub eve_symbol: DetectionStats,
    /// Eve's data-bit inference through the public half/parity map.
    pub eve_bit: DetectionStats,
}

/// Run the Alice→Bob and Alice→Eve paths over `n_bits` symbols.
pub fn run_transmission(cfg: &LinkConfig) -> Result<TransmissionReport> {
    Ok(run_transmission_with_samples(cfg, 0)?.0)
}

/// Same as [`run_transmission`], also returning the first `sample_cap` raw
/// per-symbol records.
pub fn run_transmission_with_samples(
    cfg: &LinkConfig,
    sample_cap: usize,
) -> Result<(TransmissionReport, Vec<RawSample>)> {
    let table = cfg.table()?;
    let channel = cfg.channel()?;
    let kappa = channel.kappa();
    let mut keystream = cfg.keystream()?;
    let mut data_rng = derive_rng(cfg.master_seed, streams::DATA);
    let mut bob_rng = derive_rng(cfg.master_seed, streams::BOB_NOISE);
    let mut eve_rng = derive_rng(cfg.master_seed, streams::EVE_NOISE);

    let mut bob = DetectionStats::new();
    let mut eve_symbol = DetectionStats::new();
    let mut eve_bit = DetectionStats::new();
    let mut samples = Vec::with_capacity(sample_cap);

    for symbol in 0..cfg.n_bits {
        let block = running_key_blocks(&mut keystream, cfg.m, 1, cfg.osk)?[0];
        let bit: bool = data_rng.random();
        let idx = encode(bit, &block, &table)?;

        // Bob at the far end of the fiber.
        let bob_out = measure_scaled(
            kappa * table.amplitude(idx),
            DetectionMode::Direct,
            1.0,
            0.0,
            &mut bob_rng,
        );
        let bob_bit = bob_detect(&bob_out, &block, &table, kappa)?;
        bob.record(if bob_bit == bit { 0 } else { 1 });

        // Eve taps the transmitter.
        let eve_out = measure_scaled(
            table.amplitude(idx),
            DetectionMode::Direct,
            1.0,
            0.0,
            &mut eve_rng,
        );
        let est = eve_mary_detect(&eve_out, &table, 1.0)?;
        eve_symbol.record(est as i64 - idx as i64);
        // Bit inference through the public half/parity map; with OSK on it
        // additionally misses the per-symbol swap.
        let inferred = table.is_upper(est) ^ running_key_parity(table.basis(est));
        eve_bit.record(if inferred == bit { 0 } else { 1 });

        if samples.len() < sample_cap {
            let (MeasurementOutcome::Direct(by), MeasurementOutcome::Direct(ey)) =
                (bob_out, eve_out)
            else {
                unreachable!()
            };
            samples.push(RawSample {
                symbol,
                data_bit: bit as u8,
                level_index: idx as u32,
                bob_intensity: by,
                bob_bit: bob_bit as u8,
                eve_intensity: ey,
                eve_level: est as u32,
            });
        }
    }
    Ok((
        TransmissionReport {
            kappa,
            n_bits: cfg.n_bits,
            bob,
            eve_symbol,
            eve_bit,
        },
        samples,
    ))
}

/// Eye histograms for Bob's keyed binary view and Eve's keyless 2M-level
/// view, with their opening metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyePair {
    pub bob: EyeHistogram,
    pub eve: EyeHistogram,
    pub n_symbols: u64,
    pub samples_per_symbol: u32,
    pub kappa: f64,
}

/// Trace both receivers' eyes over `n_symbols` symbols with
/// `samples_per_symbol` noise samples spread across each slot.
///
/// Bob's trace is re-centered on his per-symbol keyed threshold (his
/// decision levels track the running key), so it collapses onto two rails;
/// Eve sees the raw 2M-level line.
pub fn run_eye(
    cfg: &LinkConfig,
    n_symbols: u64,
    samples_per_symbol: u32,
    phase_bins: usize,
    value_bins: usize,
) -> Result<EyePair> {
    if n_symbols == 0 || samples_per_symbol == 0 {
        return Err(Error::InvalidParameter(
            "eye trace needs symbols and samples per symbol".into(),
        ));
    }
    let table = cfg.table()?;
    let channel = cfg.channel()?;
    let kappa = channel.kappa();
    let mut keystream = cfg.keystream()?;
    let mut data_rng = derive_rng(cfg.master_seed, streams::DATA);
    let mut bob_rng = derive_rng(cfg.master_seed, streams::BOB_NOISE + 1);
    let mut eve_rng = derive_rng(cfg.master_seed, streams::EVE_NOISE + 1);

    let mut bob_samples = Vec::with_capacity((n_symbols * samples_per_symbol as u64) as usize);
    let mut eve_samples = Vec::with_capacity(bob_samples.capacity());
    for _ in 0..n_symbols {
        let block = running_key_blocks(&mut keystream, cfg.m, 1, cfg.osk)?[0];
        let bit: bool = data_rng.random();
        let idx = encode(bit, &block, &table)?;
        let (lo, hi) = table.pair(block.value);
        let threshold = kappa * kappa * (table.intensity(lo) + table.intensity(hi)) / 2.0;
        let upper = table.is_upper(idx);
        for s in 0..samples_per_symbol {
            let phase = (s as f64 + 0.5) / samples_per_symbol as f64;
            let bob_out = measure_scaled(
                kappa * table.amplitude(idx),
                DetectionMode::Direct,
                1.0,
                0.0,
                &mut bob_rng,
            );
            let MeasurementOutcome::Direct(by) = bob_out else {
                unreachable!()
            };
            bob_samples.push(EyeSample {
                phase,
                value: by - threshold,
                rail: upper as u32,
            });
            let eve_out = measure_scaled(
                table.amplitude(idx),
                DetectionMode::Direct,
                1.0,
                0.0,
                &mut eve_rng,
            );
            let MeasurementOutcome::Direct(ey) = eve_out else {
                unreachable!()
            };
            eve_samples.push(EyeSample {
                phase,
                value: ey,
                rail: idx as u32,
            });
        }
    }
    Ok(EyePair {
        bob: eye_histogram(&bob_samples, phase_bins, value_bins),
        eve: eye_histogram(&eve_samples, phase_bins, value_bins),
        n_symbols,
        samples_per_symbol,
        kappa,
    })
}

/// One row of the distance sweep: Monte Carlo and closed-form error rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub km: f64,
    pub kappa: f64,
    pub bob_ber_mc: f64,
    pub eve_bit_err_mc: f64,
    pub eve_symbol_err_mc: f64,
    pub bob_err_closed: f64,
    pub eve_bit_err_closed: f64,
    pub advantage_closed: f64,
    pub advantage_mc: f64,
}

/// Distance sweep result with the closed-form crossing overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerDistanceReport {
    pub points: Vec<SweepPoint>,
    /// Closed-form largest length with the keyed advantage intact.
    pub closed_form_max_km: f64,
    /// First simulated length where the advantage was lost, if any.
    pub mc_crossing_km: Option<f64>,
}

/// Sweep fiber length, simulating Bob at every grid point and Eve once at
/// the transmitter, with the closed-form curves overlaid. OSK is kept off
/// so the keyless bit inference stays meaningful (with OSK on it is 1/2 at
/// any length).
pub fn ber_distance_sweep(
    cfg: &LinkConfig,
    step_km: f64,
    max_km: f64,
    bits_per_point: u64,
) -> Result<BerDistanceReport> {
    if step_km <= 0.0 || max_km < 0.0 {
        return Err(Error::InvalidParameter(
            "sweep step must be positive".into(),
        ));
    }
    let mut sweep_cfg = cfg.clone();
    sweep_cfg.osk = false;
    sweep_cfg.n_bits = bits_per_point;
    let table = sweep_cfg.table()?;

    // Eve's figures do not depend on the fiber; measure them once.
    sweep_cfg.length_km = 0.0;
    let eve_report = run_transmission(&sweep_cfg)?;
    let eve_bit_mc = eve_report.eve_bit.ber;
    let eve_sym_mc = eve_report.eve_symbol.ber;
    let eve_bit_cf = eve_bit_error_closed(&table, 1.0)?;

    let distance = max_distance(
        &table,
        &DistanceParams {
            loss_db_per_km: cfg.loss_db_per_km,
            step_km,
            max_km,
            q_copies: None,
        },
    )?;

    let mut points = Vec::new();
    let mut mc_crossing = None;
    let mut km = 0.0;
    while km <= max_km + 1e-9 {
        sweep_cfg.length_km = km;
        sweep_cfg.master_seed = cfg.master_seed.wrapping_add((km / step_km) as u64 + 1);
        let rep = run_transmission(&sweep_cfg)?;
        let bob_cf = bob_error_closed(&table, rep.kappa)?;
        let point = SweepPoint {
            km,
            kappa: rep.kappa,
            bob_ber_mc: rep.bob.ber,
            eve_bit_err_mc: eve_bit_mc,
            eve_symbol_err_mc: eve_sym_mc,
            bob_err_closed: bob_cf,
            eve_bit_err_closed: eve_bit_cf,
            advantage_closed: eve_bit_cf - bob_cf,
            advantage_mc: eve_bit_mc - rep.bob.ber,
        };
        if mc_crossing.is_none() && point.bob_ber_mc >= point.eve_bit_err_mc {
            mc_crossing = Some(km);
        }
        points.push(point);
        km += step_km;
    }
    Ok(BerDistanceReport {
        points,
        closed_form_max_km: distance.max_km,
        mc_crossing_km: mc_crossing,
    })
}

/// Keyless symbol- and bit-error rates for Eve simulated standalone;
/// convenience for closed-form cross-checks.
pub fn eve_error_closed_pair(table: &LevelTable) -> Result<(f64, f64)> {
    Ok((
        eve_symbol_error_closed(table, 1.0)?,
        eve_bit_error_closed(table, 1.0)?,
    ))
}
