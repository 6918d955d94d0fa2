//! Closed-form security and distance analysis.
//!
//! Complexity counts for the brute-force attack, unambiguous and
//! Bayes-optimal discrimination of M symmetric coherent states, binary
//! Helstrom bounds (pure and small mixed-state), and the communication
//! distance where the keyed receiver keeps its advantage.

use crate::magnitude::Magnitude;
use crate::modem::LevelTable;
use crate::receiver::{bob_error_closed, eve_bit_error_closed, eve_symbol_error_closed};
use crate::keystream::PrngKind;
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// How a known-plaintext brute force relates to the generator period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackRegime {
    /// The required plaintext fits inside one generator period; the brute
    /// force can in principle complete.
    BreakableInPeriod,
    /// The required plaintext exceeds the data available in one period;
    /// the attack cannot be completed.
    NotCompletable,
}

/// Brute-force complexity summary for a keyed M-ary modulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Per-slot ambiguity (number of plausible basis values).
    pub j: u32,
    /// Known-plaintext bits that pin the generator.
    pub f_of_k: f64,
    pub m: u32,
    /// Number of key candidates left after the first measurement pass:
    /// `Q = J^(f/log2 M)`.
    pub q: Magnitude,
    /// Known-plaintext bits needed for the copy attack: `Z = (f/log2 M) Q`.
    pub z: Magnitude,
    /// `log2(|K'| / log2 M)`: the data available in one period, in slots.
    pub period_slots_log2: f64,
    pub regime: AttackRegime,
    /// For an LFSR, whether `Z < 2^|K| - 1` (the in-period bound).
    pub lfsr_within_period: Option<bool>,
}

/// `Q = J^(f / log2 M)`: the candidate combinations for the slots covering
/// `f` generator bits. Exact whenever the exponent is integral and the
/// power fits in a `u128`.
pub fn combinations_q(j: u32, f_of_k: f64, m: u32) -> Result<Magnitude> {
    if j < 1 {
        return Err(Error::InvalidParameter("J must be >= 1".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter("M must be >= 2".into()));
    }
    if f_of_k <= 0.0 {
        return Err(Error::InvalidParameter("f(|K|) must be positive".into()));
    }
    if j == 1 {
        return Ok(Magnitude::exact(1));
    }
    let exponent = f_of_k / (m as f64).log2();
    if exponent.fract() == 0.0 && exponent <= 127.0 {
        let e = exponent as u32;
        if let Some(q) = (j as u128).checked_pow(e) {
            return Ok(Magnitude::exact(q));
        }
    }
    Ok(Magnitude::from_log2(exponent * (j as f64).log2()))
}

/// The randomized-modulation variant: `Q = M^(2|K|/log2 M) = 2^(2|K|)`.
pub fn combinations_q_randomized(key_len: u32) -> Magnitude {
    Magnitude::pow2(2 * key_len)
}

/// `Z = (f / log2 M) * Q`: the known plaintext the copy attack consumes.
pub fn required_plaintext_z(f_of_k: f64, m: u32, q: &Magnitude) -> Result<Magnitude> {
    if m < 2 {
        return Err(Error::InvalidParameter("M must be >= 2".into()));
    }
    if f_of_k <= 0.0 {
        return Err(Error::InvalidParameter("f(|K|) must be positive".into()));
    }
    let slots = f_of_k / (m as f64).log2();
    Ok(q.scale(slots))
}

/// Classify Z against the data available in one generator period.
pub fn classify_regime(
    key_len: u32,
    kind: PrngKind,
    m: u32,
    z: &Magnitude,
) -> (AttackRegime, Option<bool>, f64) {
    let period_bits_log2 = match kind {
        PrngKind::Lfsr => Magnitude::pow2_minus_one(key_len).log2(),
        PrngKind::NfsrDebruijn => key_len as f64,
    };
    let period_slots_log2 = period_bits_log2 - (m as f64).log2().log2();
    let regime = if z.log2() > period_slots_log2 {
        AttackRegime::NotCompletable
    } else {
        AttackRegime::BreakableInPeriod
    };
    let lfsr_bound = match kind {
        PrngKind::Lfsr => Some(z.log2() < Magnitude::pow2_minus_one(key_len).log2()),
        PrngKind::NfsrDebruijn => None,
    };
    (regime, lfsr_bound, period_slots_log2)
}

/// Assemble the full complexity report for a generator kind.
pub fn complexity_report(j: u32, key_len: u32, kind: PrngKind, m: u32) -> Result<ComplexityReport> {
    let f_of_k = match kind {
        PrngKind::Lfsr => 2.0 * key_len as f64 - 1.0,
        PrngKind::NfsrDebruijn => {
            if key_len <= 64 {
                ((1u128 << (key_len - 1)) + key_len as u128) as f64
            } else {
                2f64.powi(key_len as i32 - 1)
            }
        }
    };
    let q = combinations_q(j, f_of_k, m)?;
    let z = required_plaintext_z(f_of_k, m, &q)?;
    let (regime, lfsr_within_period, period_slots_log2) = classify_regime(key_len, kind, m, &z);
    Ok(ComplexityReport {
        j,
        f_of_k,
        m,
        q,
        z,
        period_slots_log2,
        regime,
        lfsr_within_period,
    })
}

/// Discrimination figures for M equiprobable symmetric coherent states of
/// mean photon number `nbar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationResult {
    pub m: u32,
    pub nbar: f64,
    /// Optimal unambiguous-measurement success probability
    /// `M * min_k |c_k|^2`.
    pub p_qum: f64,
    /// Natural log of `p_qum`, meaningful even when the probability
    /// underflows f64 (`log_domain` set).
    pub ln_p_qum: f64,
    /// Pure guessing, `1/M`.
    pub p_guess: f64,
    /// Bayes-optimal correct-decision probability (square-root measurement
    /// on the circulant Gram spectrum).
    pub p_bayes: f64,
    /// True when `p_qum` was too small for f64 and is reported as 0 with
    /// the logarithm carried in `ln_p_qum`.
    pub log_domain: bool,
}

/// Natural logs of the symmetric-state weights `|c_k|^2` for k = 0..M-1.
///
/// `|c_k|^2` is the total Poisson(`nbar`) mass on photon numbers congruent
/// to k mod M — the sector decomposition of a coherent state under the M-th
/// roots of unity. Summing positive terms in log domain keeps weights
/// accurate down to (and below) 1e-300, where the direct trigonometric sum
/// of the same quantity drowns in cancellation noise.
fn sector_log_weights(m: u32, nbar: f64) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mean photon number {nbar} must be finite and non-negative"
        )));
    }
    let m = m as usize;
    if nbar == 0.0 {
        let mut w = vec![f64::NEG_INFINITY; m];
        w[0] = 0.0;
        return Ok(w);
    }
    // Cover every residue class and run the Poisson tails down to ~e^-800.
    let width = (40.0 * nbar.sqrt()).ceil() as i64 + m as i64 + 10;
    let lo = ((nbar as i64) - width).max(0) as u64;
    let hi = (nbar as i64 + width) as u64;
    let ln_nbar = nbar.ln();
    let mut max_ln = vec![f64::NEG_INFINITY; m];
    let ln_terms: Vec<f64> = (lo..=hi)
        .map(|n| {
            let ln_p = -nbar + n as f64 * ln_nbar - ln_gamma(n as f64 + 1.0);
            let k = (n % m as u64) as usize;
            if ln_p > max_ln[k] {
                max_ln[k] = ln_p;
            }
            ln_p
        })
        .collect();
    let mut sums = vec![0.0f64; m];
    for (i, n) in (lo..=hi).enumerate() {
        let k = (n % m as u64) as usize;
        if max_ln[k].is_finite() {
            sums[k] += (ln_terms[i] - max_ln[k]).exp();
        }
    }
    Ok((0..m)
        .map(|k| {
            if max_ln[k].is_finite() {
                max_ln[k] + sums[k].ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect())
}

/// Full discrimination report for the symmetric coherent ensemble.
pub fn discriminate_symmetric(m: u32, nbar: f64) -> Result<DiscriminationResult> {
    let ln_w = sector_log_weights(m, nbar)?;
    let ln_min = ln_w.iter().cloned().fold(f64::INFINITY, f64::min);
    let ln_p_qum = (m as f64).ln() + ln_min;
    let p_qum = ln_p_qum.exp();
    let log_domain = ln_min.is_finite() && p_qum == 0.0;

    // Bayes via the square-root measurement: lambda_k = M |c_k|^2,
    // P = (sum_k sqrt(lambda_k))^2 / M^2 = (sum_k sqrt(|c_k|^2))^2 / M.
    let ln_max = ln_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let p_bayes = if ln_max.is_finite() {
        let s: f64 = ln_w.iter().map(|&lw| ((lw - ln_max) / 2.0).exp()).sum();
        (ln_max + 2.0 * (s.ln()) - (m as f64).ln()).exp()
    } else {
        return Err(Error::NumericalFailure(
            "all sector weights vanished".into(),
        ));
    };

    let eps = 1e-9;
    for (name, p) in [("P_D(QUM)", p_qum), ("P(Bayes)", p_bayes)] {
        if !( -eps..=1.0 + eps).contains(&p) || p.is_nan() {
            return Err(Error::NumericalFailure(format!(
                "{name} = {p} outside [0, 1]"
            )));
        }
    }
    Ok(DiscriminationResult {
        m,
        nbar,
        p_qum: p_qum.clamp(0.0, 1.0),
        ln_p_qum,
        p_guess: 1.0 / m as f64,
        p_bayes: p_bayes.clamp(0.0, 1.0),
        log_domain,
    })
}

/// Optimal unambiguous-discrimination success probability for M symmetric
/// coherent states: `M * min_k |c_k|^2`.
pub fn qum_success(m: u32, nbar: f64) -> Result<f64> {
    Ok(discriminate_symmetric(m, nbar)?.p_qum)
}

/// Bayes-optimal correct-decision probability for the same ensemble.
pub fn bayes_success_symmetric(m: u32, nbar: f64) -> Result<f64> {
    Ok(discriminate_symmetric(m, nbar)?.p_bayes)
}

/// Direct trigonometric evaluation of the sector weights,
/// `|c_k|^2 = (1/M) sum_j e^(2 pi i jk/M) e^(nbar (e^(2 pi i j/M) - 1))`,
/// folding conjugate terms so the sum is real by construction and using
/// Neumaier-compensated summation. Cross-validates [`qum_success`]; its
/// absolute accuracy floor is ~1e-18 per weight, so the sector route is the
/// one used for reported values.
pub fn qum_sector_weights_direct(m: u32, nbar: f64) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    let mf = m as f64;
    let mut out = Vec::with_capacity(m as usize);
    for k in 0..m {
        let mut sum = 1.0f64; // j = M term: phase 0, magnitude 1
        let mut comp = 0.0f64;
        let add = |sum: &mut f64, comp: &mut f64, v: f64| {
            let t = *sum + v;
            if sum.abs() >= v.abs() {
                *comp += (*sum - t) + v;
            } else {
                *comp += (v - t) + *sum;
            }
            *sum = t;
        };
        let half = (m - 1) / 2;
        for j in 1..=half {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / mf;
            let ln_mag = nbar * (theta.cos() - 1.0);
            if ln_mag < -745.0 {
                continue;
            }
            let phase = nbar * theta.sin() + theta * k as f64;
            add(&mut sum, &mut comp, 2.0 * ln_mag.exp() * phase.cos());
        }
        if m % 2 == 0 {
            let ln_mag = -2.0 * nbar;
            if ln_mag >= -745.0 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                add(&mut sum, &mut comp, sign * ln_mag.exp());
            }
        }
        out.push((sum + comp) / mf);
    }
    Ok(out)
}

/// Binary Helstrom bound for two pure states with the given overlap
/// `|<psi_0|psi_1>|` and priors: `P_e = (1 - sqrt(1 - 4 p0 p1 ov^2)) / 2`.
pub fn helstrom_binary_pure(overlap: f64, p0: f64, p1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::InvalidParameter(format!(
            "overlap {overlap} outside [0, 1]"
        )));
    }
    if p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "priors ({p0}, {p1}) must be non-negative and sum to 1"
        )));
    }
    let q = 4.0 * p0 * p1 * overlap * overlap;
    // (1 - sqrt(1-q))/2 in the cancellation-free form.
    Ok(q / (2.0 * (1.0 + (1.0 - q).sqrt())))
}

/// Fock-basis amplitudes of a real-amplitude coherent state, and the mass
/// left beyond the truncation.
fn coherent_fock(alpha: f64, n_max: usize) -> (Vec<f64>, f64) {
    let mut c = Vec::with_capacity(n_max + 1);
    let mut cur = (-alpha * alpha / 2.0).exp();
    let mut mass = 0.0;
    for n in 0..=n_max {
        if n > 0 {
            cur *= alpha / (n as f64).sqrt();
        }
        c.push(cur);
        mass += cur * cur;
    }
    (c, (1.0 - mass).max(0.0))
}

const TRUNCATION_TAIL_LIMIT: f64 = 1e-12;

/// Binary Helstrom bound for two equiprobable mixtures of coherent states
/// given by their amplitude lists, in a number basis truncated at `n_max`.
pub fn helstrom_mixed_from_amplitudes(
    up: &[f64],
    down: &[f64],
    n_max: usize,
) -> Result<f64> {
    if up.is_empty() || down.is_empty() {
        return Err(Error::InvalidParameter("empty mixture".into()));
    }
    let dim = n_max + 1;
    let mut worst_tail = 0.0f64;
    let mut rho = |amps: &[f64]| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        let w = 1.0 / amps.len() as f64;
        for &a in amps {
            let (c, tail) = coherent_fock(a, n_max);
            worst_tail = worst_tail.max(tail);
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += w * c[i] * c[j];
                }
            }
        }
        m
    };
    let rho_up = rho(up);
    let rho_down = rho(down);
    if worst_tail > TRUNCATION_TAIL_LIMIT {
        // Find the truncation that would satisfy the tail bound.
        let alpha_max = up
            .iter()
            .chain(down.iter())
            .cloned()
            .fold(0.0f64, f64::max);
        let mut required = n_max;
        loop {
            required += 8;
            let (_, tail) = coherent_fock(alpha_max, required);
            if tail <= TRUNCATION_TAIL_LIMIT || required > 4096 {
                break;
            }
        }
        return Err(Error::TruncationTail {
            n_max,
            tail: worst_tail,
            limit: TRUNCATION_TAIL_LIMIT,
            required,
        });
    }
    let delta = (rho_up - rho_down) * 0.5;
    let eig = delta.symmetric_eigenvalues();
    let trace_norm: f64 = eig.iter().map(|l| l.abs()).sum();
    Ok(0.5 * (1.0 - trace_norm))
}

/// Binary Helstrom bound between the upper-half and lower-half mixtures of
/// a designed level table (equal priors). Desk-scale only: M <= 16 and
/// intensities <= 16 photons; the Fock truncation must leave tail mass
/// below 1e-12 or the required `n_max` is reported.
pub fn helstrom_binary_mixed(table: &LevelTable, n_max: usize) -> Result<f64> {
    let m = table.m() as usize;
    if m > 16 {
        return Err(Error::ComplexityGuard(format!(
            "mixed-state Helstrom limited to M <= 16, got {m}"
        )));
    }
    let max_intensity = table.intensity(table.num_levels() - 1);
    if max_intensity > 16.0 {
        return Err(Error::ComplexityGuard(format!(
            "mixed-state Helstrom limited to <= 16 photons, got {max_intensity}"
        )));
    }
    let amps = table.amplitudes();
    helstrom_mixed_from_amplitudes(&amps[m..], &amps[..m], n_max)
}

/// Distance sweep parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceParams {
    pub loss_db_per_km: f64,
    pub step_km: f64,
    pub max_km: f64,
    /// Copies for the beam-splitting test of the keyed-copy comparison;
    /// when set, the curve reports whether `kappa > 1/Q` at each length.
    pub q_copies: Option<f64>,
}

impl Default for DistanceParams {
    fn default() -> Self {
        DistanceParams {
            loss_db_per_km: 0.2,
            step_km: 10.0,
            max_km: 400.0,
            q_copies: None,
        }
    }
}

/// One length on the advantage curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancePoint {
    pub km: f64,
    pub kappa: f64,
    /// Bob's signal distance (the keyed pair gap) at this length.
    pub d_i: f64,
    pub bob_err: f64,
    pub eve_bit_err: f64,
    pub eve_symbol_err: f64,
    /// `eve_bit_err - bob_err`; positive while the advantage holds.
    pub advantage: f64,
    /// Whether `kappa > 1/Q` (keyed Eve on a split copy is worse than Bob).
    pub keyed_copy_test: Option<bool>,
}

/// Closed-form communication-distance report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Largest length (km) with `bob_err < eve_bit_err`.
    pub max_km: f64,
    pub curve: Vec<DistancePoint>,
    /// Keyed Eve's error on one of Q split copies, when Q was given.
    pub eve_keyed_copy_err: Option<f64>,
    pub diagnosis: Option<String>,
}

/// Largest communication distance where the keyed receiver's error stays
/// below the keyless receiver's, plus the full advantage curve.
///
/// Eve sits at the transmitter; her bit-inference error (OSK off) is the
/// comparison figure, since with OSK on a keyless bit inference is exactly
/// 1/2 and the comparison degenerates. Bob's error uses the exact
/// per-level closed form at `kappa(km)`.
pub fn max_distance(table: &LevelTable, params: &DistanceParams) -> Result<DistanceReport> {
    if params.loss_db_per_km <= 0.0 {
        return Err(Error::InvalidParameter(
            "loss must be positive dB/km".into(),
        ));
    }
    if params.step_km <= 0.0 || params.max_km <= 0.0 {
        return Err(Error::InvalidParameter(
            "sweep step and range must be positive".into(),
        ));
    }
    let kappa_of = |km: f64| 10f64.powf(-params.loss_db_per_km * km / 20.0);
    let eve_bit = eve_bit_error_closed(table, 1.0)?;
    let eve_sym = eve_symbol_error_closed(table, 1.0)?;
    let bob_at = |km: f64| bob_error_closed(table, kappa_of(km));

    let mut diagnosis = None;
    let max_km = if bob_at(0.0)? >= eve_bit {
        diagnosis = Some(format!(
            "no advantage even back-to-back: Bob {} vs Eve {}",
            bob_at(0.0)?,
            eve_bit
        ));
        0.0
    } else {
        // Bob's error is monotone increasing in km; bisect the crossing.
        let mut lo = 0.0f64;
        let mut hi = params.max_km;
        if bob_at(hi)? < eve_bit {
            hi = f64::INFINITY;
            let mut probe = params.max_km;
            for _ in 0..40 {
                probe *= 2.0;
                if bob_at(probe)? >= eve_bit {
                    hi = probe;
                    break;
                }
            }
            if !hi.is_finite() {
                diagnosis = Some("advantage holds at every probed length".into());
            }
        }
        if hi.is_finite() {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if bob_at(mid)? < eve_bit {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        } else {
            f64::INFINITY
        }
    };

    let half_range =
        (table.alpha_max() * table.alpha_max() - table.alpha_min() * table.alpha_min()) / 2.0;
    let mut curve = Vec::new();
    let mut km = 0.0;
    while km <= params.max_km + 1e-9 {
        let kappa = kappa_of(km);
        let bob = bob_at(km)?;
        curve.push(DistancePoint {
            km,
            kappa,
            d_i: kappa * kappa * half_range,
            bob_err: bob,
            eve_bit_err: eve_bit,
            eve_symbol_err: eve_sym,
            advantage: eve_bit - bob,
            keyed_copy_test: params.q_copies.map(|q| kappa > 1.0 / q),
        });
        km += params.step_km;
    }
    let eve_keyed_copy_err = match params.q_copies {
        Some(q) if q >= 1.0 => Some(bob_error_closed(table, 1.0 / q)?),
        _ => None,
    };
    Ok(DistanceReport {
        max_km,
        curve,
        eve_keyed_copy_err,
        diagnosis,
    })
}
