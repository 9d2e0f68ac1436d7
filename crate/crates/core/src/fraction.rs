use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational in `[0, 1]`.
///
/// Thresholds such as `floor(phi * N)` are computed in integer arithmetic so
/// that values like `0.29 * 100` do not land one below the intended count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        let input = || format!("{num}/{den}");
        if den == 0 {
            return Err(Error::InvalidFraction { input: input(), reason: "zero denominator" });
        }
        if num > den {
            return Err(Error::InvalidFraction { input: input(), reason: "greater than one" });
        }
        let g = gcd(num, den).max(1);
        Ok(Fraction { num: num / g, den: den / g })
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `floor(self * n)`.
    pub fn floor_mul(self, n: u64) -> u64 {
        (self.num as u128 * n as u128 / self.den as u128) as u64
    }

    /// `ceil(1 / self)`; `None` for zero.
    pub fn ceil_recip(self) -> Option<u64> {
        (self.num != 0).then(|| self.den.div_ceil(self.num))
    }

    /// `self - other`, saturating at zero.
    pub fn saturating_sub(self, other: Fraction) -> Fraction {
        if self <= other {
            return Fraction::ZERO;
        }
        // Both operands are at most one, so the cross products fit in u128 and
        // the reduced result fits back in u64 whenever the denominators do.
        let num = self.num as u128 * other.den as u128 - other.num as u128 * self.den as u128;
        let den = self.den as u128 * other.den as u128;
        let g = {
            let (mut a, mut b) = (num, den);
            while b != 0 {
                (a, b) = (b, a % b);
            }
            a
        };
        let (num, den) = (num / g, den / g);
        match (u64::try_from(num), u64::try_from(den)) {
            (Ok(num), Ok(den)) => Fraction { num, den },
            _ => {
                // Round the result down to a 2^-63 grid; only reachable with
                // pathological denominators.
                let scale = 1u128 << 63;
                Fraction::new((num * scale / den) as u64, scale as u64).unwrap_or(Fraction::ZERO)
            }
        }
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    /// Accepts `a/b`, plain decimals (`0.05`, `.5`, `1`) and scientific
    /// notation (`1e-4`, `2.5E-3`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason| Error::InvalidFraction { input: s.to_owned(), reason };
        if let Some((n, d)) = s.split_once('/') {
            let parse = |t: &str| -> Result<u64> {
                if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(bad("expected unsigned integers around '/'"));
                }
                t.parse().map_err(|_| bad("integer out of range"))
            };
            return Fraction::new(parse(n)?, parse(d)?);
        }

        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => {
                let exp: i32 = s[i + 1..].parse().map_err(|_| bad("bad exponent"))?;
                (&s[..i], exp)
            }
            None => (s, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("no digits"));
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad("unexpected character"));
        }

        let digits = format!("{int_part}{frac_part}");
        let digits = digits.trim_start_matches('0');
        let digits = if digits.is_empty() { "0" } else { digits };
        let mut num: u64 = digits.parse().map_err(|_| bad("too many digits"))?;
        let mut scale = frac_part.len() as i64 - exponent as i64;
        while scale < 0 {
            num = num.checked_mul(10).ok_or_else(|| bad("greater than one"))?;
            scale += 1;
        }
        // Drop trailing zeros that only inflate the denominator.
        while scale > 0 && num % 10 == 0 && num != 0 {
            num /= 10;
            scale -= 1;
        }
        if num == 0 {
            return Ok(Fraction::ZERO);
        }
        if scale > 19 {
            return Err(bad("too small to represent"));
        }
        let den = 10u64.checked_pow(scale as u32).ok_or_else(|| bad("too small to represent"))?;
        Fraction::new(num, den)
    }
}

/// The hotness threshold `floor(phi * n)`, optionally lifted to one so that a
/// context has to occur at least once to be hot.
pub fn hot_threshold(phi: Fraction, n: u64, min_one: bool) -> u64 {
    let t = phi.floor_mul(n);
    if min_one {
        t.max(1)
    } else {
        t
    }
}
