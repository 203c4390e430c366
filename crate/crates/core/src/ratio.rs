//! Exact rational thresholds.
//!
//! Mining thresholds and the balancing ratio are compared against integer
//! counts. Doing that in floating point invites off-by-one-ulp surprises at
//! exact boundaries (is 3/10 >= 0.3?), so thresholds are kept as small
//! rationals and every comparison cross-multiplies in 128-bit integers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A non-negative rational in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Ratio {
    num: u32,
    den: u32,
}

impl Ratio {
    /// Panics if `den` is zero.
    pub fn new(num: u32, den: u32) -> Ratio {
        assert!(den != 0, "ratio denominator must be nonzero");
        let g = gcd(num, den);
        Ratio { num: num / g, den: den / g }
    }

    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact test for `num / den >= self`, where `num / den` is a count
    /// ratio. A zero denominator never satisfies a positive threshold.
    pub fn le_ratio(&self, num: u64, den: u64) -> bool {
        num as u128 * self.den as u128 >= self.num as u128 * den as u128
    }

    /// Exact test for `count > self * total` (strict), used by the
    /// balancing pass.
    pub fn lt_scaled(&self, count: u64, total: u64) -> bool {
        count as u128 * self.den as u128 > self.num as u128 * total as u128
    }

    /// `floor(self * total)`, exact.
    pub fn floor_scaled(&self, total: u64) -> u64 {
        (self.num as u128 * total as u128 / self.den as u128) as u64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Parses either a decimal literal (`0.3`, `1`, `.05`) or an explicit
/// fraction (`3/10`). Decimals convert exactly: `0.3` becomes 3/10, not the
/// nearest f64.
impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Ratio, String> {
        let s = s.trim();
        let malformed = || format!("`{s}` is not a ratio (expected e.g. 0.3 or 3/10)");
        if let Some((n, d)) = s.split_once('/') {
            let num: u32 = n.trim().parse().map_err(|_| malformed())?;
            let den: u32 = d.trim().parse().map_err(|_| malformed())?;
            if den == 0 {
                return Err(malformed());
            }
            return Ok(Ratio::new(num, den));
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(malformed());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(malformed());
        }
        if frac_part.len() > 9 {
            return Err(format!("`{s}` has too many decimal places for an exact ratio"));
        }
        let int: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| malformed())? };
        let den = 10u64.pow(frac_part.len() as u32);
        let frac: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| malformed())? };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(malformed)?;
        if num > u32::MAX as u64 {
            return Err(format!("`{s}` is out of range"));
        }
        Ok(Ratio::new(num as u32, den as u32))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}
