//! Exact-or-logarithmic integer magnitudes.
//!
//! Complexity counts in the security analysis (number of key candidates,
//! required known-plaintext length, generator periods) routinely exceed any
//! native integer range. A [`Magnitude`] stays exact as long as the value
//! fits in a `u128` and otherwise carries its base-2 logarithm, so that
//! comparisons of astronomically large counts remain meaningful.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A non-negative count that is either exact or represented by its log2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Magnitude {
    /// The exact integer value.
    Exact { value: u128 },
    /// Base-2 logarithm of the value, for counts beyond `u128` range.
    Log2 { log2: f64 },
}

impl Magnitude {
    pub fn exact(value: u128) -> Self {
        Magnitude::Exact { value }
    }

    pub fn from_log2(log2: f64) -> Self {
        Magnitude::Log2 { log2 }
    }

    /// 2^exp, exact whenever it fits.
    pub fn pow2(exp: u32) -> Self {
        if exp < 128 {
            Magnitude::Exact { value: 1u128 << exp }
        } else {
            Magnitude::Log2 { log2: exp as f64 }
        }
    }

    /// 2^exp - 1 (an m-sequence period), exact whenever it fits.
    pub fn pow2_minus_one(exp: u32) -> Self {
        if exp <= 128 {
            let v = if exp == 128 {
                u128::MAX
            } else {
                (1u128 << exp) - 1
            };
            Magnitude::Exact { value: v }
        } else {
            Magnitude::Log2 {
                log2: (exp as f64) + (-(2f64.powi(-(exp as i32)))).ln_1p() / std::f64::consts::LN_2,
            }
        }
    }

    /// Base-2 logarithm of the value.
    pub fn log2(&self) -> f64 {
        match *self {
            Magnitude::Exact { value } => {
                if value == 0 {
                    f64::NEG_INFINITY
                } else {
                    (value as f64).log2()
                }
            }
            Magnitude::Log2 { log2 } => log2,
        }
    }

    /// The exact value if this magnitude carries one.
    pub fn as_exact(&self) -> Option<u128> {
        match *self {
            Magnitude::Exact { value } => Some(value),
            Magnitude::Log2 { .. } => None,
        }
    }

    /// Multiply by a non-negative real factor, degrading to log form when
    /// exactness can no longer be guaranteed.
    pub fn scale(&self, factor: f64) -> Self {
        match *self {
            Magnitude::Exact { value } if factor.fract() == 0.0 && factor >= 0.0 => {
                let f = factor as u128;
                match value.checked_mul(f) {
                    Some(v) => Magnitude::Exact { value: v },
                    None => Magnitude::Log2 {
                        log2: self.log2() + factor.log2(),
                    },
                }
            }
            _ => Magnitude::Log2 {
                log2: self.log2() + factor.log2(),
            },
        }
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Magnitude::Exact { value: a }, Magnitude::Exact { value: b }) => a.partial_cmp(b),
            _ => self.log2().partial_cmp(&other.log2()),
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Magnitude::Exact { value } => write!(f, "{value}"),
            Magnitude::Log2 { log2 } => write!(f, "2^{log2:.3}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_and_period() {
        assert_eq!(Magnitude::pow2(20).as_exact(), Some(1 << 20));
        assert_eq!(
            Magnitude::pow2_minus_one(100).as_exact(),
            Some((1u128 << 100) - 1)
        );
        assert!(Magnitude::pow2(200).as_exact().is_none());
        assert!((Magnitude::pow2(200).log2() - 200.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_mixes_forms() {
        let a = Magnitude::exact(1 << 30);
        let b = Magnitude::from_log2(31.0);
        assert!(a < b);
        assert!(Magnitude::exact(9) > Magnitude::exact(8));
    }

    #[test]
    fn scale_keeps_exactness_for_integer_factors() {
        let q = Magnitude::exact(9);
        assert_eq!(q.scale(2.0).as_exact(), Some(18));
        assert!(q.scale(2.5).as_exact().is_none());
        assert!((q.scale(2.5).log2() - (22.5f64).log2()).abs() < 1e-12);
    }
}
