//! End-to-end cryptanalysis experiments.
//!
//! Three attacks are modeled: the textbook break of a conventional
//! (noiseless XOR) stream cipher via Berlekamp–Massey, the heterodyne
//! known/chosen-plaintext attack against the keyed M-ary modulation with a
//! full likelihood brute force over the key space, and the indirect parity
//! attack that measures only the up/down observable.

use crate::channel::{derive_rng, streams};
use crate::keystream::{
    berlekamp_massey, bits_per_block, maximal_taps, LinearRecurrence, Lfsr, RunningKeyBlock,
    SecretKey,
};
use crate::magnitude::Magnitude;
use crate::modem::{design_levels, encode, running_key_parity, LevelTable, Scheme};
use crate::receiver::DetectionStats;
use crate::secmetrics::{combinations_q, required_plaintext_z};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Result of breaking a conventional XOR stream cipher from known
/// plaintext.
#[derive(Debug, Clone)]
pub struct ConventionalBreak {
    /// Recovered secret key (the register contents).
    pub key: SecretKey,
    /// Measured linear complexity of the exposed keystream.
    pub complexity: usize,
    /// The recovered recurrence.
    pub recurrence: LinearRecurrence,
    /// The full decoded plaintext (known prefix plus residual).
    pub plaintext: Vec<bool>,
}

/// Break `c_i = x_i XOR k'_i` given a known-plaintext prefix.
///
/// The exposed keystream prefix must be at least `2|K|` bits; recovering
/// the recurrence then decodes the remaining `|K'| - f(|K|)` bits without
/// error. A measured complexity above `key_len` means the keystream did
/// not come from an LFSR of the assumed size.
pub fn break_conventional(
    known_plaintext: &[bool],
    ciphertext: &[bool],
    key_len: usize,
) -> Result<ConventionalBreak> {
    if known_plaintext.len() > ciphertext.len() {
        return Err(Error::InvalidParameter(
            "known plaintext longer than the ciphertext".into(),
        ));
    }
    let n = known_plaintext.len();
    if n < 2 * key_len {
        return Err(Error::InsufficientBits {
            got: n,
            required: 2 * key_len,
        });
    }
    let keystream_prefix: Vec<bool> = known_plaintext
        .iter()
        .zip(ciphertext)
        .map(|(x, c)| x ^ c)
        .collect();
    let recurrence = berlekamp_massey(&keystream_prefix);
    if recurrence.complexity() > key_len {
        return Err(Error::ModelMismatch {
            key_len,
            complexity: recurrence.complexity(),
        });
    }
    let keystream = recurrence.extend(&keystream_prefix, ciphertext.len())?;
    let plaintext: Vec<bool> = ciphertext
        .iter()
        .zip(&keystream)
        .map(|(c, k)| c ^ k)
        .collect();
    let key = SecretKey::from_bits(keystream[..key_len.min(keystream.len())].to_vec())?;
    Ok(ConventionalBreak {
        key,
        complexity: recurrence.complexity(),
        recurrence,
        plaintext,
    })
}

/// Eve's measurement for the quantum attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EveMode {
    Heterodyne,
    Direct,
}

/// Configuration of the quantum known-plaintext attacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub key_len: u32,
    pub m: u32,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub osk: bool,
    pub eve_mode: EveMode,
    /// Known-plaintext budget in generator bits (the exposure the
    /// conventional attack would get). Each symbol pins
    /// `ceil(log2 M) (+1 with OSK)` generator bits, so the number of known
    /// data symbols is this budget divided by the per-symbol consumption.
    pub known_plaintext_bits: u64,
    /// Fresh symbols decoded with the winning key to measure the residual
    /// bit error rate.
    pub residual_symbols: u32,
    pub trials: u32,
    pub master_seed: u64,
    /// Multiplies the quantum noise; 0 is the noiseless diagnostic limit.
    pub noise_scale: f64,
    /// Basis values within this log-likelihood window of the best one form
    /// the per-symbol candidate set.
    pub candidate_ln_window: f64,
}

impl AttackConfig {
    /// Defaults at the designed operating point (amplitudes 80..100).
    pub fn new(key_len: u32, m: u32) -> Self {
        AttackConfig {
            key_len,
            m,
            alpha_min: 80.0,
            alpha_max: 100.0,
            osk: true,
            eve_mode: EveMode::Heterodyne,
            known_plaintext_bits: 2 * key_len as u64,
            residual_symbols: 1000,
            trials: 200,
            master_seed: 1,
            noise_scale: 1.0,
            candidate_ln_window: 8.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidParameter("M must be >= 2".into()));
        }
        if !(2..=63).contains(&self.key_len) {
            return Err(Error::InvalidParameter(format!(
                "key length {} out of range 2..=63",
                self.key_len
            )));
        }
        if self.noise_scale < 0.0 {
            return Err(Error::InvalidParameter("noise scale must be >= 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        Ok(())
    }

    fn table(&self) -> Result<LevelTable> {
        design_levels(self.alpha_min, self.alpha_max, self.m, Scheme::Intensity)
    }

    fn bits_per_symbol(&self) -> u32 {
        bits_per_block(self.m, self.osk)
    }

    fn known_symbols(&self) -> Result<usize> {
        let f_of_k = 2 * self.key_len as u64 - 1;
        if self.known_plaintext_bits < f_of_k {
            return Err(Error::InsufficientBits {
                got: self.known_plaintext_bits as usize,
                required: f_of_k as usize,
            });
        }
        let n = (self.known_plaintext_bits / self.bits_per_symbol() as u64) as usize;
        if n == 0 {
            return Err(Error::InsufficientBits {
                got: self.known_plaintext_bits as usize,
                required: self.bits_per_symbol() as usize,
            });
        }
        Ok(n)
    }
}

/// Brute-force search cap: 2^24 keys keeps a full likelihood scan under
/// desk-scale runtimes.
pub const BRUTE_FORCE_KEY_CAP: u32 = 24;

/// Per-trial attack outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    /// Rank of the true key by likelihood (1 = attack succeeded); 0 when
    /// the brute force was refused.
    pub true_rank: u64,
    pub success: bool,
    /// Basis-error spread of this trial's symbols (window size covering
    /// 95% of errors, 1 when error-free).
    pub j_hat: u32,
    /// Residual-decode bit error rate under the best-scoring wrong key.
    pub residual_ber: Option<f64>,
    pub mean_candidates: f64,
}

/// Aggregate brute-force outcome over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceSummary {
    pub keys_tested: u64,
    pub rank1_fraction: f64,
    pub median_rank: f64,
    pub mean_residual_ber_best_wrong: f64,
}

/// Full report of the heterodyne known-plaintext attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub config: AttackConfig,
    pub known_symbols: u32,
    pub mean_candidate_set_size: f64,
    pub max_candidate_set_size: u32,
    /// Ambiguity measured from the basis-estimate errors: `2w + 1` where w
    /// covers 95% of errors.
    pub empirical_j: u32,
    pub basis_error_rate: f64,
    pub empirical_q: Magnitude,
    pub empirical_z: Magnitude,
    pub brute_force: Option<BruteForceSummary>,
    /// Set when the brute force was refused by the complexity guard.
    pub refused: Option<String>,
    pub trials: Vec<TrialRecord>,
}

/// Packed one-period m-sequence with cyclic window reads, used to evaluate
/// every key (= every phase of the single maximal cycle) without
/// materializing per-key streams.
struct MSequence {
    bits: Vec<u64>,
    period: usize,
}

impl MSequence {
    fn new(key_len: u32) -> Result<Self> {
        let taps = maximal_taps(key_len).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no built-in maximal polynomial for key length {key_len}"
            ))
        })?;
        let period = (1usize << key_len) - 1;
        let mut lfsr = Lfsr::new(taps, &SecretKey::from_u64(1, key_len)?)?;
        let mut bits = vec![0u64; period.div_ceil(64)];
        for (i, word) in bits.iter_mut().enumerate() {
            let mut w = 0u64;
            for b in 0..64 {
                if i * 64 + b < period {
                    use crate::keystream::BitSource;
                    w |= (lfsr.next_bit() as u64) << b;
                }
            }
            *word = w;
        }
        Ok(MSequence { bits, period })
    }

    #[inline]
    fn bit(&self, i: usize) -> bool {
        let i = i % self.period;
        (self.bits[i >> 6] >> (i & 63)) & 1 == 1
    }

    /// Cyclic MSB-first windows of the given width at every phase.
    fn windows(&self, width: u32) -> Vec<u32> {
        let mask = (1u32 << width) - 1;
        let mut w = 0u32;
        for i in 0..width as usize {
            w = (w << 1) | self.bit(i) as u32;
        }
        let mut out = Vec::with_capacity(self.period);
        for i in 0..self.period {
            out.push(w);
            w = ((w << 1) & mask) | self.bit(i + width as usize) as u32;
        }
        out
    }
}

/// The running-key block a given key phase produces for a given symbol.
#[inline]
fn block_at(
    windows: &[u32],
    phase: usize,
    symbol: usize,
    bps: u32,
    m: u32,
    osk: bool,
) -> RunningKeyBlock {
    let w = windows[(phase + symbol * bps as usize) % windows.len()];
    if osk {
        RunningKeyBlock {
            value: (w >> 1) % m,
            osk: w & 1 == 1,
        }
    } else {
        RunningKeyBlock {
            value: w % m,
            osk: false,
        }
    }
}

/// How the key space is handled in a trial: enumerable (brute force over
/// every phase of the maximal cycle) or sample-only for guarded sizes.
enum KeySpace {
    Full { windows: Vec<u32> },
    SampleOnly { key_len: u32 },
}

/// Eve's per-symbol observation, reduced to what the likelihood needs.
#[derive(Clone, Copy)]
enum Observation {
    /// In-phase heterodyne quadrature (the imaginary part carries no
    /// signal for a real alphabet and cancels in likelihood ratios).
    Heterodyne(f64),
    Direct(f64),
}

fn observe<R: Rng>(cfg: &AttackConfig, table: &LevelTable, idx: usize, rng: &mut R) -> Observation {
    match cfg.eve_mode {
        EveMode::Heterodyne => {
            let sigma = cfg.noise_scale * 0.5f64.sqrt();
            let n = if sigma > 0.0 {
                Normal::new(0.0, sigma).unwrap().sample(rng)
            } else {
                0.0
            };
            Observation::Heterodyne(table.amplitude(idx) + n)
        }
        EveMode::Direct => {
            let mean = table.intensity(idx);
            let sigma = cfg.noise_scale * mean.sqrt();
            let n = if sigma > 0.0 {
                Normal::new(0.0, sigma).unwrap().sample(rng)
            } else {
                0.0
            };
            Observation::Direct((mean + n).max(0.0))
        }
    }
}

const EXACT_MISS: f64 = -1e18;

/// Log-likelihood (up to observation-constant terms) of an observation
/// given a hypothesized transmitted level.
fn log_likelihood(cfg: &AttackConfig, table: &LevelTable, obs: Observation, idx: usize) -> f64 {
    match obs {
        Observation::Heterodyne(x) => {
            let mu = table.amplitude(idx);
            if cfg.noise_scale == 0.0 {
                return if x == mu { 0.0 } else { EXACT_MISS };
            }
            let var = 0.5 * cfg.noise_scale * cfg.noise_scale;
            -(x - mu) * (x - mu) / (2.0 * var)
        }
        Observation::Direct(y) => {
            let mu = table.intensity(idx);
            if cfg.noise_scale == 0.0 {
                return if y == mu { 0.0 } else { EXACT_MISS };
            }
            let var = mu * cfg.noise_scale * cfg.noise_scale;
            -(y - mu) * (y - mu) / (2.0 * var) - 0.5 * var.ln()
        }
    }
}

struct TrialOutput {
    record: TrialRecord,
    error_offsets: Vec<i64>,
    candidate_sizes: Vec<u32>,
}

fn run_trial(
    cfg: &AttackConfig,
    table: &LevelTable,
    key_space: &KeySpace,
    n_syms: usize,
    trial: u32,
) -> TrialOutput {
    let m = cfg.m;
    let bps = cfg.bits_per_symbol();
    let mut rng = derive_rng(cfg.master_seed, streams::ATTACK_TRIAL + trial as u64);
    let total_syms = n_syms + cfg.residual_symbols as usize;
    let (true_phase, true_blocks) = match key_space {
        KeySpace::Full { windows } => {
            let phase = rng.random_range(0..windows.len());
            let blocks = (0..total_syms)
                .map(|j| block_at(windows, phase, j, bps, m, cfg.osk))
                .collect::<Vec<_>>();
            (phase, blocks)
        }
        KeySpace::SampleOnly { key_len } => {
            let seed = rng.random_range(1..(1u64 << key_len));
            let mut lfsr = Lfsr::new(
                maximal_taps(*key_len).expect("validated"),
                &SecretKey::from_u64(seed, *key_len).expect("validated"),
            )
            .expect("validated");
            let blocks = crate::keystream::running_key_blocks(&mut lfsr, m, total_syms, cfg.osk)
                .expect("validated");
            (0, blocks)
        }
    };
    let data: Vec<bool> = (0..total_syms).map(|_| rng.random()).collect();
    let observations: Vec<Observation> = (0..total_syms)
        .map(|j| {
            let idx = encode(data[j], &true_blocks[j], table).expect("valid block");
            observe(cfg, table, idx, &mut rng)
        })
        .collect();

    // Per-symbol likelihood over every level, shared by the candidate-set
    // analysis and the key scan.
    let ll_by_level: Vec<Vec<f64>> = observations[..n_syms]
        .iter()
        .map(|&obs| {
            (0..table.num_levels())
                .map(|idx| log_likelihood(cfg, table, obs, idx))
                .collect()
        })
        .collect();

    // Candidate sets and basis estimates from Eve's point of view: with
    // known plaintext each basis value maps to one level (two with OSK).
    let mut error_offsets = Vec::new();
    let mut candidate_sizes = Vec::with_capacity(n_syms);
    for j in 0..n_syms {
        let mut best_v = 0u32;
        let mut best_ll = f64::NEG_INFINITY;
        let mut lls = Vec::with_capacity(m as usize);
        for v in 0..m {
            let mut ll = f64::NEG_INFINITY;
            for osk_bit in [false, true] {
                if osk_bit && !cfg.osk {
                    break;
                }
                let blk = RunningKeyBlock { value: v, osk: osk_bit };
                let idx = encode(data[j], &blk, table).expect("valid block");
                ll = ll.max(ll_by_level[j][idx]);
            }
            lls.push(ll);
            if ll > best_ll {
                best_ll = ll;
                best_v = v;
            }
        }
        let window = cfg.candidate_ln_window;
        candidate_sizes.push(lls.iter().filter(|&&l| l >= best_ll - window).count() as u32);
        let truth = true_blocks[j].value;
        if best_v != truth {
            let half = m as i64 / 2;
            let mut d = (best_v as i64 - truth as i64).rem_euclid(m as i64);
            if d > half {
                d -= m as i64;
            }
            error_offsets.push(d);
        }
    }

    let j_hat = spread95(&error_offsets);
    let mean_candidates =
        candidate_sizes.iter().map(|&c| c as f64).sum::<f64>() / n_syms as f64;

    let (true_rank, success, residual_ber) = if let KeySpace::Full { windows } = key_space {
        let period = windows.len();
        let score_of = |phase: usize| -> f64 {
            let mut s = 0.0;
            for j in 0..n_syms {
                let blk = block_at(windows, phase, j, bps, m, cfg.osk);
                let idx = encode(data[j], &blk, table).expect("valid block");
                s += ll_by_level[j][idx];
            }
            s
        };
        let true_score = score_of(true_phase);
        let mut better = 0u64;
        let mut best_wrong_phase = usize::MAX;
        let mut best_wrong_score = f64::NEG_INFINITY;
        for phase in 0..period {
            if phase == true_phase {
                continue;
            }
            let s = score_of(phase);
            if s > true_score {
                better += 1;
            }
            if s > best_wrong_score {
                best_wrong_score = s;
                best_wrong_phase = phase;
            }
        }
        let rank = 1 + better;

        // Decode fresh symbols with the best-scoring wrong key.
        let mut errors = 0u64;
        for r in 0..cfg.residual_symbols as usize {
            let j = n_syms + r;
            let blk = block_at(windows, best_wrong_phase, j, bps, m, cfg.osk);
            let (lo, hi) = table.pair(blk.value);
            let ll_lo = log_likelihood(cfg, table, observations[j], lo);
            let ll_hi = log_likelihood(cfg, table, observations[j], hi);
            let upper = ll_hi > ll_lo;
            let bit = upper ^ blk.osk ^ running_key_parity(blk.value);
            if bit != data[j] {
                errors += 1;
            }
        }
        let ber = errors as f64 / cfg.residual_symbols.max(1) as f64;
        (rank, rank == 1, Some(ber))
    } else {
        (0, false, None)
    };

    TrialOutput {
        record: TrialRecord {
            trial,
            true_rank,
            success,
            j_hat,
            residual_ber,
            mean_candidates,
        },
        error_offsets,
        candidate_sizes,
    }
}

/// Window size `2w + 1` where `w` covers 95% of the error offsets; 1 when
/// there are no errors.
fn spread95(errors: &[i64]) -> u32 {
    if errors.is_empty() {
        return 1;
    }
    let mut mags: Vec<u64> = errors.iter().map(|e| e.unsigned_abs()).collect();
    mags.sort_unstable();
    let idx = ((errors.len() as f64) * 0.95).ceil() as usize - 1;
    2 * mags[idx.min(mags.len() - 1)] as u32 + 1
}

/// The heterodyne known/chosen-plaintext attack.
///
/// Eve taps the transmitter at full power, measures every known-plaintext
/// symbol, forms per-symbol candidate sets, and (for key lengths up to
/// [`BRUTE_FORCE_KEY_CAP`]) ranks every key of the maximal-LFSR key space
/// by exact Gaussian log-likelihood of her measurement record. Key lengths
/// above the cap return an analysis-only report with `refused` set.
pub fn heterodyne_kpa(cfg: &AttackConfig) -> Result<AttackReport> {
    cfg.validate()?;
    let table = cfg.table()?;
    let n_syms = cfg.known_symbols()?;
    let brute_force = cfg.key_len <= BRUTE_FORCE_KEY_CAP;
    let key_space = if brute_force {
        let mseq = MSequence::new(cfg.key_len)?;
        KeySpace::Full {
            windows: mseq.windows(cfg.bits_per_symbol()),
        }
    } else {
        // Guarded sizes still need the maximal polynomial for the sampled
        // true key.
        maximal_taps(cfg.key_len).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no built-in maximal polynomial for key length {}",
                cfg.key_len
            ))
        })?;
        KeySpace::SampleOnly {
            key_len: cfg.key_len,
        }
    };

    let outputs: Vec<TrialOutput> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &table, &key_space, n_syms, t))
        .collect();

    let mut all_offsets = Vec::new();
    let mut candidate_sizes = Vec::new();
    let mut records = Vec::with_capacity(outputs.len());
    for out in outputs {
        all_offsets.extend(out.error_offsets);
        candidate_sizes.extend(out.candidate_sizes);
        records.push(out.record);
    }
    let empirical_j = spread95(&all_offsets);
    let total_syms = (cfg.trials as usize * n_syms) as f64;
    let basis_error_rate = all_offsets.len() as f64 / total_syms;
    let f_of_k = 2.0 * cfg.key_len as f64 - 1.0;
    let empirical_q = combinations_q(empirical_j, f_of_k, cfg.m)?;
    let empirical_z = required_plaintext_z(f_of_k, cfg.m, &empirical_q)?;

    let brute = if brute_force {
        let mut ranks: Vec<u64> = records.iter().map(|r| r.true_rank).collect();
        ranks.sort_unstable();
        let rank1 = records.iter().filter(|r| r.success).count() as f64 / records.len() as f64;
        let median = if ranks.len() % 2 == 1 {
            ranks[ranks.len() / 2] as f64
        } else {
            (ranks[ranks.len() / 2 - 1] + ranks[ranks.len() / 2]) as f64 / 2.0
        };
        let mean_ber = records
            .iter()
            .filter_map(|r| r.residual_ber)
            .sum::<f64>()
            / records.len() as f64;
        Some(BruteForceSummary {
            keys_tested: (1u64 << cfg.key_len) - 1,
            rank1_fraction: rank1,
            median_rank: median,
            mean_residual_ber_best_wrong: mean_ber,
        })
    } else {
        None
    };

    Ok(AttackReport {
        config: cfg.clone(),
        known_symbols: n_syms as u32,
        mean_candidate_set_size: candidate_sizes.iter().map(|&c| c as f64).sum::<f64>()
            / candidate_sizes.len().max(1) as f64,
        max_candidate_set_size: candidate_sizes.iter().copied().max().unwrap_or(0),
        empirical_j,
        basis_error_rate,
        empirical_q,
        empirical_z,
        brute_force: brute,
        refused: if brute_force {
            None
        } else {
            Some(format!(
                "brute force refused: key length {} exceeds the 2^{BRUTE_FORCE_KEY_CAP} guard",
                cfg.key_len
            ))
        },
        trials: records,
    })
}

/// Report of the indirect (parity) attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub n_symbols: u64,
    /// Error rate of the up/down measurement itself.
    pub l_error_rate: f64,
    /// Empirical mutual information (bits) between the measured observable
    /// (XOR the known plaintext) and the running-key parity.
    pub mi_bits: f64,
    /// Running-key values per parity class: even-parity and odd-parity
    /// class sizes. At least 2 each for M >= 4.
    pub candidates_even: u32,
    pub candidates_odd: u32,
    /// M = 2 boundary case: the parity alone pins the running key.
    pub parity_determines_key: bool,
    /// Eve's data-bit error when inferring through the parity relation,
    /// granting her the true parity. With OSK on this tends to 1/2.
    pub data_bit_error: f64,
}

/// Simulate the indirect up/down measurement attack.
pub fn parity_attack(cfg: &AttackConfig, n_symbols: u64) -> Result<ParityReport> {
    cfg.validate()?;
    if n_symbols == 0 {
        return Err(Error::InvalidParameter("need at least one symbol".into()));
    }
    let table = cfg.table()?;
    let m = cfg.m;
    let mut rng = derive_rng(cfg.master_seed, streams::ATTACK_TRIAL);
    let seed = rng.random_range(1..(1u64 << cfg.key_len));
    let mut keystream = Lfsr::new(
        maximal_taps(cfg.key_len).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no built-in maximal polynomial for key length {}",
                cfg.key_len
            ))
        })?,
        &SecretKey::from_u64(seed, cfg.key_len)?,
    )?;

    // Mid-line of the intensity range: the boundary between the halves.
    let threshold = (table.intensity(m as usize - 1) + table.intensity(m as usize)) / 2.0;

    let mut l_errors = 0u64;
    let mut joint = [[0u64; 2]; 2]; // [l_hat xor x][ktilde]
    let mut bit_errors = 0u64;
    for _ in 0..n_symbols {
        let blk = crate::keystream::running_key_blocks(&mut keystream, m, 1, cfg.osk)?[0];
        let x: bool = rng.random();
        let idx = encode(x, &blk, &table)?;
        let y = match observe(cfg, &table, idx, &mut rng) {
            Observation::Direct(y) => y,
            Observation::Heterodyne(a) => a * a, // intensity from the field value
        };
        let l_hat = y > threshold;
        if l_hat != table.is_upper(idx) {
            l_errors += 1;
        }
        let ktilde = running_key_parity(blk.value);
        joint[(l_hat ^ x) as usize][ktilde as usize] += 1;
        // Charitable inference: grant Eve the true parity; OSK still
        // randomizes the polarity she cannot see.
        let x_hat = l_hat ^ ktilde;
        if x_hat != x {
            bit_errors += 1;
        }
    }

    let n = n_symbols as f64;
    let mut mi = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let p = joint[a][b] as f64 / n;
            if p > 0.0 {
                let pa = (joint[a][0] + joint[a][1]) as f64 / n;
                let pb = (joint[0][b] + joint[1][b]) as f64 / n;
                mi += p * (p / (pa * pb)).log2();
            }
        }
    }

    let odd = m.div_ceil(2); // values 0, 2, ... carry odd 1-based numbering
    Ok(ParityReport {
        n_symbols,
        l_error_rate: l_errors as f64 / n,
        mi_bits: mi,
        candidates_even: m - odd,
        candidates_odd: odd,
        parity_determines_key: m == 2,
        data_bit_error: bit_errors as f64 / n,
    })
}

/// Bit-level confusion of Eve's keyless detection over a transmission, for
/// CSV summaries.
pub fn summarize_offsets(offsets: &[i64]) -> DetectionStats {
    let mut stats = DetectionStats::new();
    for &o in offsets {
        stats.record(o);
    }
    stats
}
