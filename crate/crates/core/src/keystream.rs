//! Running-key generation and analysis.
//!
//! The shared secret key seeds a pseudo-random generator — a linear feedback
//! shift register (LFSR) or a de Bruijn nonlinear feedback shift register —
//! whose output stream is chopped into running-key blocks that drive the
//! M-ary modulation. This module also provides the Berlekamp–Massey
//! algorithm used to attack LFSR keystreams, and the unicity-distance
//! metrics that summarize how much material an attacker needs.

use crate::magnitude::Magnitude;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Built-in primitive (maximal-period) tap polynomials for register lengths
/// 3..=32, given as exponent lists including the leading degree and the
/// constant term. `x^k + ... + 1` produces an m-sequence of period `2^k - 1`.
const MAXIMAL_POLYS: [&[u32]; 30] = [
    &[3, 2, 0],
    &[4, 3, 0],
    &[5, 3, 0],
    &[6, 5, 0],
    &[7, 6, 0],
    &[8, 6, 5, 4, 0],
    &[9, 5, 0],
    &[10, 7, 0],
    &[11, 9, 0],
    &[12, 11, 10, 4, 0],
    &[13, 12, 11, 8, 0],
    &[14, 13, 12, 2, 0],
    &[15, 14, 0],
    &[16, 15, 13, 4, 0],
    &[17, 14, 0],
    &[18, 11, 0],
    &[19, 18, 17, 14, 0],
    &[20, 17, 0],
    &[21, 19, 0],
    &[22, 21, 0],
    &[23, 18, 0],
    &[24, 23, 22, 17, 0],
    &[25, 22, 0],
    &[26, 25, 24, 20, 0],
    &[27, 26, 25, 22, 0],
    &[28, 25, 0],
    &[29, 27, 0],
    &[30, 29, 28, 7, 0],
    &[31, 28, 0],
    &[32, 30, 26, 25, 0],
];

/// A maximal tap polynomial for the given register length, if one is in the
/// built-in table (lengths 3..=32).
pub fn maximal_taps(key_len: u32) -> Option<Vec<u32>> {
    if (3..=32).contains(&key_len) {
        Some(MAXIMAL_POLYS[(key_len - 3) as usize].to_vec())
    } else {
        None
    }
}

/// The shared secret key as a bit string.
///
/// Bit 0 is the first output bit of a register seeded with this key (the
/// register LSB). Hex encoding packs bit `i` into byte `i / 8` at position
/// `i % 8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    bits: Vec<bool>,
}

impl SecretKey {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "secret key must have at least 2 bits, got {}",
                bits.len()
            )));
        }
        Ok(SecretKey { bits })
    }

    /// Key from the low `len` bits of `value` (bit 0 first).
    pub fn from_u64(value: u64, len: u32) -> Result<Self> {
        if len < 2 || len > 64 {
            return Err(Error::InvalidParameter(format!(
                "secret key length {len} out of range 2..=64"
            )));
        }
        Ok(SecretKey {
            bits: (0..len).map(|i| (value >> i) & 1 == 1).collect(),
        })
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() % 2 != 0 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::InvalidParameter(format!(
                "invalid hex key string {hex:?}"
            )));
        }
        let bytes: Vec<u8> = (0..hex.len() / 2)
            .map(|i| u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).unwrap())
            .collect();
        if len > bytes.len() * 8 {
            return Err(Error::InvalidParameter(format!(
                "hex key {hex:?} too short for {len} bits"
            )));
        }
        SecretKey::from_bits(
            (0..len)
                .map(|i| (bytes[i / 8] >> (i % 8)) & 1 == 1)
                .collect(),
        )
    }

    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_all_zero(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    fn as_u64(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }
}

/// Which pseudo-random generator stretches the secret key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrngKind {
    Lfsr,
    NfsrDebruijn,
}

/// Serializable description of a running-key generator.
///
/// JSON shape: `{"kind":"lfsr","taps":[20,17,0],"seed":"beef01"}` or
/// `{"kind":"nfsr-debruijn","order":8,"seed":"a5"}`. Seeds are hex bit
/// strings; the register length is the tap-polynomial degree (LFSR) or the
/// order (NFSR).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PrngSpec {
    Lfsr { taps: Vec<u32>, seed: String },
    NfsrDebruijn { order: u32, seed: String },
}

impl PrngSpec {
    pub fn lfsr(taps: Vec<u32>, seed: &SecretKey) -> Self {
        PrngSpec::Lfsr {
            taps,
            seed: seed.to_hex(),
        }
    }

    pub fn debruijn(order: u32, seed: &SecretKey) -> Self {
        PrngSpec::NfsrDebruijn {
            order,
            seed: seed.to_hex(),
        }
    }

    pub fn kind(&self) -> PrngKind {
        match self {
            PrngSpec::Lfsr { .. } => PrngKind::Lfsr,
            PrngSpec::NfsrDebruijn { .. } => PrngKind::NfsrDebruijn,
        }
    }

    /// Instantiate the generator this spec describes.
    pub fn build(&self) -> Result<Keystream> {
        match self {
            PrngSpec::Lfsr { taps, seed } => {
                let degree = *taps.iter().max().ok_or_else(|| {
                    Error::InvalidParameter("empty tap polynomial".into())
                })? as usize;
                let key = SecretKey::from_hex(seed, degree)?;
                Ok(Keystream::Lfsr(Lfsr::new(taps.clone(), &key)?))
            }
            PrngSpec::NfsrDebruijn { order, seed } => {
                let key = SecretKey::from_hex(seed, *order as usize)?;
                Ok(Keystream::DeBruijn(DeBruijnNfsr::new(*order, &key)?))
            }
        }
    }
}

/// A deterministic bit generator.
pub trait BitSource {
    fn next_bit(&mut self) -> bool;

    fn next_bits(&mut self, n: usize) -> Vec<bool> {
        (0..n).map(|_| self.next_bit()).collect()
    }

    /// Opaque fingerprint of the internal state, for consumption accounting.
    fn state_fingerprint(&self) -> u64;
}

/// Fibonacci LFSR over GF(2).
///
/// The register shifts right one bit per step and emits its LSB; the new MSB
/// is the parity of the state masked by the feedback polynomial (exponents
/// below the degree). A primitive polynomial yields period `2^|K| - 1`.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u64,
    mask: u64,
    len: u32,
    taps: Vec<u32>,
    primitive_checked: bool,
}

impl Lfsr {
    /// `taps` are polynomial exponents and must include the degree and 0.
    /// The seed length must equal the degree and must not be all-zero.
    pub fn new(mut taps: Vec<u32>, seed: &SecretKey) -> Result<Self> {
        taps.sort_unstable();
        taps.dedup();
        let degree = *taps
            .last()
            .ok_or_else(|| Error::InvalidParameter("empty tap polynomial".into()))?;
        if degree < 2 || degree > 63 {
            return Err(Error::InvalidParameter(format!(
                "tap polynomial degree {degree} out of range 2..=63"
            )));
        }
        if taps[0] != 0 {
            return Err(Error::InvalidParameter(
                "tap polynomial must include the constant term 0".into(),
            ));
        }
        if seed.len() != degree as usize {
            return Err(Error::InvalidParameter(format!(
                "seed length {} does not match tap polynomial degree {degree}",
                seed.len()
            )));
        }
        if seed.is_all_zero() {
            return Err(Error::InvalidParameter(
                "LFSR seed must not be all-zero".into(),
            ));
        }
        let mask = taps
            .iter()
            .filter(|&&t| t < degree)
            .fold(0u64, |m, &t| m | (1 << t));
        let primitive_checked = maximal_taps(degree)
            .map(|t| {
                let mut sorted = t;
                sorted.sort_unstable();
                sorted == taps
            })
            .unwrap_or(false);
        Ok(Lfsr {
            state: seed.as_u64(),
            mask,
            len: degree,
            taps,
            primitive_checked,
        })
    }

    /// LFSR with the built-in maximal polynomial for this length.
    pub fn maximal(seed: &SecretKey) -> Result<Self> {
        let taps = maximal_taps(seed.len() as u32).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no built-in maximal polynomial for length {}",
                seed.len()
            ))
        })?;
        Lfsr::new(taps, seed)
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn taps(&self) -> &[u32] {
        &self.taps
    }

    /// True when the tap polynomial came from the built-in primitive table.
    /// Arbitrary polynomials are accepted but their period is not checked.
    pub fn primitive_checked(&self) -> bool {
        self.primitive_checked
    }

    pub fn state(&self) -> u64 {
        self.state
    }
}

impl BitSource for Lfsr {
    fn next_bit(&mut self) -> bool {
        let out = self.state & 1 == 1;
        let fb = ((self.state & self.mask).count_ones() & 1) as u64;
        self.state = (self.state >> 1) | (fb << (self.len - 1));
        out
    }

    fn state_fingerprint(&self) -> u64 {
        self.state
    }
}

/// De Bruijn sequence generator realized as a nonlinear feedback shift
/// register.
///
/// The feedback function is tabulated from the prefer-one greedy
/// construction, which yields a full de Bruijn cycle: every `order`-bit
/// window occurs exactly once per period `2^order`. Orders above 24 are
/// rejected (the feedback table grows as `2^order`).
#[derive(Debug, Clone)]
pub struct DeBruijnNfsr {
    feedback: Vec<u64>,
    order: u32,
    state: u32,
}

impl DeBruijnNfsr {
    pub const MAX_ORDER: u32 = 24;

    pub fn new(order: u32, seed: &SecretKey) -> Result<Self> {
        if !(2..=Self::MAX_ORDER).contains(&order) {
            return Err(Error::InvalidParameter(format!(
                "de Bruijn order {order} out of range 2..={}",
                Self::MAX_ORDER
            )));
        }
        if seed.len() != order as usize {
            return Err(Error::InvalidParameter(format!(
                "seed length {} does not match de Bruijn order {order}",
                seed.len()
            )));
        }
        let seq = prefer_one_sequence(order);
        let n = 1usize << order;
        let mask = (n - 1) as u32;
        // Feedback table: for the window starting at cyclic position i, the
        // next sequence bit. Windows are read MSB-first.
        let mut feedback = vec![0u64; n.div_ceil(64)];
        let mut window = 0u32;
        for i in 0..order as usize {
            window = (window << 1) | seq[i] as u32;
        }
        for i in 0..n {
            let succ = seq[(i + order as usize) % n];
            if succ {
                feedback[window as usize >> 6] |= 1 << (window & 63);
            }
            window = ((window << 1) & mask) | succ as u32;
        }
        // Seed bits fill the window MSB-first: bit 0 of the key is the
        // window's most significant bit.
        let mut state = 0u32;
        for &b in seed.bits() {
            state = (state << 1) | b as u32;
        }
        Ok(DeBruijnNfsr {
            feedback,
            order,
            state,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn state(&self) -> u32 {
        self.state
    }
}

impl BitSource for DeBruijnNfsr {
    fn next_bit(&mut self) -> bool {
        let b = (self.feedback[self.state as usize >> 6] >> (self.state & 63)) & 1 == 1;
        let mask = (1u32 << self.order) - 1;
        self.state = ((self.state << 1) & mask) | b as u32;
        b
    }

    fn state_fingerprint(&self) -> u64 {
        self.state as u64
    }
}

/// Prefer-one greedy de Bruijn sequence of the given order.
///
/// Greedily append a 1 whenever the resulting window is new, else a 0, else
/// stop. The greedy string has length `2^order + order - 1` and contains
/// every window exactly once; its first `2^order` bits form the cycle.
fn prefer_one_sequence(order: u32) -> Vec<bool> {
    let n = 1usize << order;
    let mask = (n - 1) as u32;
    let mut seq = vec![false; order as usize];
    let mut seen = vec![0u64; n.div_ceil(64)];
    seen[0] |= 1; // the all-zero start window
    let mut window = 0u32;
    loop {
        let cand1 = ((window << 1) & mask) | 1;
        let cand0 = (window << 1) & mask;
        let next = if (seen[cand1 as usize >> 6] >> (cand1 & 63)) & 1 == 0 {
            seen[cand1 as usize >> 6] |= 1 << (cand1 & 63);
            true
        } else if (seen[cand0 as usize >> 6] >> (cand0 & 63)) & 1 == 0 {
            seen[cand0 as usize >> 6] |= 1 << (cand0 & 63);
            false
        } else {
            break;
        };
        seq.push(next);
        window = ((window << 1) & mask) | next as u32;
    }
    debug_assert_eq!(seq.len(), n + order as usize - 1);
    seq.truncate(n);
    seq
}

/// Either kind of running-key generator behind one interface.
#[derive(Debug, Clone)]
pub enum Keystream {
    Lfsr(Lfsr),
    DeBruijn(DeBruijnNfsr),
}

impl BitSource for Keystream {
    fn next_bit(&mut self) -> bool {
        match self {
            Keystream::Lfsr(l) => l.next_bit(),
            Keystream::DeBruijn(d) => d.next_bit(),
        }
    }

    fn state_fingerprint(&self) -> u64 {
        match self {
            Keystream::Lfsr(l) => l.state_fingerprint(),
            Keystream::DeBruijn(d) => d.state_fingerprint(),
        }
    }
}

/// One running-key block: an M-ary basis selector plus the optional
/// basis-swap (OSK) bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunningKeyBlock {
    /// Basis number in `[0, M)`.
    pub value: u32,
    /// Overlapping-selection-keying bit; false when OSK is disabled.
    pub osk: bool,
}

/// Number of generator bits one block consumes.
pub fn bits_per_block(m: u32, osk: bool) -> u32 {
    ceil_log2(m) + osk as u32
}

fn ceil_log2(m: u32) -> u32 {
    32 - (m - 1).leading_zeros()
}

/// Chop the keystream into running-key blocks.
///
/// Each block consumes `ceil(log2 M)` bits (MSB first) reduced mod M, plus
/// one OSK bit when enabled. For M not a power of two the reduction is
/// biased: the low `2^b mod M` values are twice as likely.
pub fn running_key_blocks<S: BitSource>(
    src: &mut S,
    m: u32,
    n_blocks: usize,
    osk: bool,
) -> Result<Vec<RunningKeyBlock>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M must be >= 2, got {m}")));
    }
    let width = ceil_log2(m);
    let mut out = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let mut v = 0u32;
        for _ in 0..width {
            v = (v << 1) | src.next_bit() as u32;
        }
        let osk_bit = osk && src.next_bit();
        out.push(RunningKeyBlock {
            value: v % m,
            osk: osk_bit,
        });
    }
    Ok(out)
}

/// A linear recurrence `s_n = c_1 s_{n-1} ^ ... ^ c_L s_{n-L}` over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRecurrence {
    coeffs: Vec<bool>,
}

impl LinearRecurrence {
    /// The linear complexity L.
    pub fn complexity(&self) -> usize {
        self.coeffs.len()
    }

    /// Recurrence coefficients `c_1..c_L`.
    pub fn coeffs(&self) -> &[bool] {
        &self.coeffs
    }

    /// Continue a prefix out to `n` bits using the recurrence. The prefix
    /// must be at least L bits long.
    pub fn extend(&self, prefix: &[bool], n: usize) -> Result<Vec<bool>> {
        let l = self.complexity();
        if prefix.len() < l {
            return Err(Error::InsufficientBits {
                got: prefix.len(),
                required: l,
            });
        }
        let mut s: Vec<bool> = prefix.to_vec();
        s.truncate(n.max(prefix.len()));
        while s.len() < n {
            let k = s.len();
            let mut b = false;
            for (i, &c) in self.coeffs.iter().enumerate() {
                if c {
                    b ^= s[k - 1 - i];
                }
            }
            s.push(b);
        }
        s.truncate(n);
        Ok(s)
    }

    /// Tap polynomial of the equivalent LFSR, when one exists (the
    /// recurrence must use its oldest term, i.e. `c_L = 1`).
    pub fn to_taps(&self) -> Option<Vec<u32>> {
        let l = self.complexity();
        if l == 0 || !self.coeffs[l - 1] {
            return None;
        }
        let mut taps: Vec<u32> = vec![l as u32];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c {
                taps.push((l - 1 - i) as u32);
            }
        }
        taps.sort_unstable();
        Some(taps)
    }
}

/// Berlekamp–Massey over GF(2): the shortest linear recurrence generating
/// the given bit sequence.
pub fn berlekamp_massey(bits: &[bool]) -> LinearRecurrence {
    let n = bits.len();
    // Connection polynomial C(D) = 1 + c_1 D + ... + c_L D^L.
    let mut c = vec![false; n + 1];
    let mut b = vec![false; n + 1];
    c[0] = true;
    b[0] = true;
    let mut l = 0usize;
    let mut m = 1usize;
    for i in 0..n {
        let mut d = bits[i];
        for j in 1..=l {
            d ^= c[j] & bits[i - j];
        }
        if !d {
            m += 1;
        } else if 2 * l <= i {
            let t = c.clone();
            for j in 0..=n - m {
                if b[j] {
                    c[j + m] ^= true;
                }
            }
            l = i + 1 - l;
            b = t;
            m = 1;
        } else {
            for j in 0..=n - m {
                if b[j] {
                    c[j + m] ^= true;
                }
            }
            m += 1;
        }
    }
    LinearRecurrence {
        coeffs: c[1..=l].to_vec(),
    }
}

/// Unicity-distance summary for a keyed generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnicityReport {
    /// Ciphertext-only unicity distance H(X)/D in bits; `None` when the
    /// plaintext redundancy is zero and the distance is infinite.
    pub n_u: Option<f64>,
    /// Known-plaintext unicity distance, ~H(K) = |K| bits for a
    /// conventional stream cipher.
    pub n_gu: f64,
    /// Known-plaintext bits needed to pin the generator: `2|K| - 1` for an
    /// LFSR; for a de Bruijn NFSR the linear-complexity lower bound
    /// `2^(|K|-1) + |K|`.
    pub f_of_k: Magnitude,
    /// The companion count including the shift-parameter uncertainty,
    /// `2|K|` for an LFSR. Both figures circulate; they differ by one bit.
    pub f_of_k_shift_variant: Magnitude,
    /// Generator period in bits: `2^|K| - 1` (LFSR) or `2^|K|` (de Bruijn).
    pub period: Magnitude,
}

/// Unicity metrics for a generator of the given kind and key length.
///
/// `h_x` is the per-symbol plaintext entropy and `redundancy` the
/// per-symbol redundancy D; a redundancy of zero makes the ciphertext-only
/// unicity distance infinite.
pub fn unicity_metrics(
    key_len: u32,
    kind: PrngKind,
    h_x: f64,
    redundancy: f64,
) -> Result<UnicityReport> {
    if key_len < 2 {
        return Err(Error::InvalidParameter(format!(
            "key length {key_len} must be >= 2"
        )));
    }
    if redundancy < 0.0 || h_x < 0.0 {
        return Err(Error::InvalidParameter(
            "entropy and redundancy must be non-negative".into(),
        ));
    }
    let n_u = if redundancy == 0.0 {
        None
    } else {
        Some(h_x / redundancy)
    };
    let (f_of_k, shift, period) = match kind {
        PrngKind::Lfsr => (
            Magnitude::exact(2 * key_len as u128 - 1),
            Magnitude::exact(2 * key_len as u128),
            Magnitude::pow2_minus_one(key_len),
        ),
        PrngKind::NfsrDebruijn => {
            // Linear complexity of any binary de Bruijn sequence of order n
            // is at least 2^(n-1) + n; report the guaranteed bound.
            let f = if key_len <= 127 {
                Magnitude::exact((1u128 << (key_len - 1)) + key_len as u128)
            } else {
                Magnitude::from_log2(key_len as f64 - 1.0)
            };
            (f, f, Magnitude::pow2(key_len))
        }
    };
    Ok(UnicityReport {
        n_u,
        n_gu: key_len as f64,
        f_of_k,
        f_of_k_shift_variant: shift,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn key(v: u64, len: u32) -> SecretKey {
        SecretKey::from_u64(v, len).unwrap()
    }

    #[test]
    fn lfsr_3bit_full_period_all_windows() {
        // x^3 + x + 1, seed 001: one period of 7 bits contains every
        // nonzero 3-bit window exactly once.
        let mut lfsr = Lfsr::new(vec![3, 1, 0], &key(1, 3)).unwrap();
        let bits = lfsr.next_bits(7);
        let mut windows = HashSet::new();
        for i in 0..7 {
            let w = (0..3).fold(0u32, |acc, j| (acc << 1) | bits[(i + j) % 7] as u32);
            windows.insert(w);
        }
        assert_eq!(windows.len(), 7);
        assert!(!windows.contains(&0));
    }

    #[test]
    fn next_bits_zero_leaves_state() {
        let mut lfsr = Lfsr::maximal(&key(0b1011, 8)).unwrap();
        let before = lfsr.state_fingerprint();
        assert!(lfsr.next_bits(0).is_empty());
        assert_eq!(lfsr.state_fingerprint(), before);
    }

    #[test]
    fn lfsr_20bit_period_is_maximal() {
        let mut lfsr = Lfsr::maximal(&key(1, 20)).unwrap();
        let start = lfsr.state();
        let mut period = 0u64;
        loop {
            lfsr.next_bit();
            period += 1;
            if lfsr.state() == start {
                break;
            }
        }
        assert_eq!(period, (1 << 20) - 1);
    }

    #[test]
    fn all_maximal_table_entries_have_full_period_small() {
        // Exhaustive period check for the short entries; the long ones are
        // standard published primitive polynomials.
        for k in 3..=16u32 {
            let mut lfsr = Lfsr::maximal(&key(1, k)).unwrap();
            let start = lfsr.state();
            let mut seen = vec![false; 1 << k];
            let mut period = 0u64;
            loop {
                let s = lfsr.state() as usize;
                assert!(!seen[s], "state {s} repeated early for K={k}");
                seen[s] = true;
                lfsr.next_bit();
                period += 1;
                if lfsr.state() == start {
                    break;
                }
            }
            assert_eq!(period, (1u64 << k) - 1, "period wrong for K={k}");
        }
    }

    #[test]
    fn lfsr_rejects_bad_seeds_and_taps() {
        assert!(Lfsr::new(vec![3, 1, 0], &key(0, 3)).is_err());
        assert!(Lfsr::new(vec![3, 1], &key(1, 3)).is_err());
        assert!(Lfsr::new(vec![3, 1, 0], &key(1, 4)).is_err());
        let custom = Lfsr::new(vec![4, 1, 0], &key(1, 4)).unwrap();
        assert!(!custom.primitive_checked());
        let table = Lfsr::maximal(&key(1, 4)).unwrap();
        assert!(table.primitive_checked());
    }

    #[test]
    fn debruijn_covers_every_window_once() {
        for order in [2u32, 4, 6, 10] {
            let n = 1usize << order;
            let mut gen = DeBruijnNfsr::new(order, &key(0, order)).unwrap();
            let bits = gen.next_bits(n);
            let mut windows = HashSet::new();
            for i in 0..n {
                let w = (0..order as usize)
                    .fold(0u32, |acc, j| (acc << 1) | bits[(i + j) % n] as u32);
                windows.insert(w);
            }
            assert_eq!(windows.len(), n, "order {order} missed windows");
            // Period exactly 2^order: the state must recur only now.
            let state0 = gen.state();
            let again = gen.next_bits(n);
            assert_eq!(bits, again);
            assert_eq!(gen.state(), state0);
        }
    }

    #[test]
    fn debruijn_rejects_large_orders() {
        assert!(DeBruijnNfsr::new(25, &key(0, 25)).is_err());
    }

    #[test]
    fn block_extraction_reads_msb_first() {
        struct Fixed(Vec<bool>, usize);
        impl BitSource for Fixed {
            fn next_bit(&mut self) -> bool {
                let b = self.0[self.1];
                self.1 += 1;
                b
            }
            fn state_fingerprint(&self) -> u64 {
                self.1 as u64
            }
        }
        // M=4, stream 00|10|11 -> (0, 2, 3)
        let mut src = Fixed(
            vec![false, false, true, false, true, true],
            0,
        );
        let blocks = running_key_blocks(&mut src, 4, 3, false).unwrap();
        let values: Vec<u32> = blocks.iter().map(|b| b.value).collect();
        assert_eq!(values, vec![0, 2, 3]);

        // M=3: 11 -> 3 mod 3 = 0 (mod-reduction bias documented)
        let mut src = Fixed(vec![true, true], 0);
        let blocks = running_key_blocks(&mut src, 3, 1, false).unwrap();
        assert_eq!(blocks[0].value, 0);
    }

    #[test]
    fn blocks_consume_exact_bit_count() {
        for (m, osk) in [(100u32, false), (128, true), (5, true)] {
            let mut a = Lfsr::maximal(&key(0x5a5a5, 20)).unwrap();
            let mut b = a.clone();
            let n_blocks = 37;
            running_key_blocks(&mut a, m, n_blocks, osk).unwrap();
            let consumed = n_blocks * bits_per_block(m, osk) as usize;
            b.next_bits(consumed);
            assert_eq!(a.state_fingerprint(), b.state_fingerprint());
        }
    }

    #[test]
    fn block_values_follow_mod_model_chi_square() {
        // M=100 from 7-bit words: values 0..=27 have probability 2/128,
        // 28..=99 have 1/128. Pearson statistic vs the exact model must sit
        // below the 99% chi-square quantile for 99 degrees of freedom.
        const CHI2_99DF_P99: f64 = 134.64161685578915;
        let mut lfsr = Lfsr::maximal(&key(0xbeef, 20)).unwrap();
        let n = 10_000usize;
        let blocks = running_key_blocks(&mut lfsr, 100, n, false).unwrap();
        let mut counts = [0u32; 100];
        for b in &blocks {
            counts[b.value as usize] += 1;
        }
        let mut chi2 = 0.0;
        for (v, &c) in counts.iter().enumerate() {
            let p = if v < 28 { 2.0 / 128.0 } else { 1.0 / 128.0 };
            let e = n as f64 * p;
            chi2 += (c as f64 - e).powi(2) / e;
        }
        assert!(
            chi2 < CHI2_99DF_P99,
            "chi2 {chi2} exceeds the 99% bound"
        );
    }

    #[test]
    fn power_of_two_blocks_are_uniform_chi_square() {
        const CHI2_127DF_P99: f64 = 166.9874405919814;
        let mut lfsr = Lfsr::maximal(&key(0x1234, 20)).unwrap();
        let n = 10_000usize;
        let blocks = running_key_blocks(&mut lfsr, 128, n, false).unwrap();
        let mut counts = [0u32; 128];
        for b in &blocks {
            counts[b.value as usize] += 1;
        }
        let e = n as f64 / 128.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < CHI2_127DF_P99, "chi2 {chi2} exceeds the 99% bound");
    }

    #[test]
    fn bm_on_zeros_gives_zero_complexity() {
        let rec = berlekamp_massey(&[false; 8]);
        assert_eq!(rec.complexity(), 0);
    }

    #[test]
    fn bm_recovers_4bit_lfsr_from_8_bits() {
        let mut lfsr = Lfsr::maximal(&key(0b1001, 4)).unwrap();
        let full = lfsr.next_bits(30);
        let rec = berlekamp_massey(&full[..8]);
        assert_eq!(rec.complexity(), 4);
        let regen = rec.extend(&full[..8], 30).unwrap();
        assert_eq!(regen, full);
        let taps = rec.to_taps().unwrap();
        let mut lfsr2 = Lfsr::new(taps, &key(0b1001, 4)).unwrap();
        assert_eq!(lfsr2.next_bits(30), full);
    }

    #[test]
    fn bm_on_debruijn_measures_large_complexity() {
        // Any order-6 de Bruijn sequence has linear complexity >= 2^5 + 6.
        let mut gen = DeBruijnNfsr::new(6, &key(0, 6)).unwrap();
        let bits = gen.next_bits(128);
        let rec = berlekamp_massey(&bits);
        assert!(
            rec.complexity() >= 38,
            "measured complexity {} below the de Bruijn bound",
            rec.complexity()
        );
    }

    #[test]
    fn unicity_examples() {
        let r = unicity_metrics(8, PrngKind::Lfsr, 1.0, 0.0).unwrap();
        assert!(r.n_u.is_none());

        let r = unicity_metrics(100, PrngKind::Lfsr, 1.0, 0.5).unwrap();
        assert_eq!(r.n_u, Some(2.0));
        assert_eq!(r.f_of_k.as_exact(), Some(199));
        assert_eq!(r.f_of_k_shift_variant.as_exact(), Some(200));
        assert_eq!(r.period.as_exact(), Some((1u128 << 100) - 1));
        assert_eq!(r.n_gu, 100.0);

        let r = unicity_metrics(20, PrngKind::NfsrDebruijn, 1.0, 1.0).unwrap();
        assert_eq!(r.period.as_exact(), Some(1 << 20));
        assert_eq!(r.f_of_k.as_exact(), Some((1 << 19) + 20));
    }

    #[test]
    fn prng_spec_json_round_trip() {
        let k = key(0xBEEF1, 20);
        let spec = PrngSpec::lfsr(maximal_taps(20).unwrap(), &k);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"lfsr\""), "{json}");
        assert!(json.contains("\"taps\""), "{json}");
        assert!(json.contains("\"seed\""), "{json}");
        let back: PrngSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let mut a = spec.build().unwrap();
        let mut b = back.build().unwrap();
        assert_eq!(a.next_bits(64), b.next_bits(64));
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = PrngSpec::debruijn(8, &key(0x42, 8));
        let mut a = spec.build().unwrap();
        let mut b = spec.build().unwrap();
        assert_eq!(a.next_bits(1000), b.next_bits(1000));
    }
}
