//! Exact decimal and rational helpers used at the micron/DBU boundary.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Integer division rounding half away from zero. `d` must be nonzero.
pub fn div_round_half_away(n: i128, d: i128) -> i128 {
    debug_assert!(d != 0);
    let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
    let q = n / d;
    let r = n % d;
    if 2 * r.abs() >= d {
        q + n.signum()
    } else {
        q
    }
}

/// Ceiling division for nonnegative divisors.
pub fn div_ceil_i128(n: i128, d: i128) -> i128 {
    debug_assert!(d > 0);
    let q = n.div_euclid(d);
    if n.rem_euclid(d) == 0 {
        q
    } else {
        q + 1
    }
}

/// Floor of the square root.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = libm::sqrt(n as f64) as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// A decimal literal held exactly as `mantissa * 10^-scale`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decimal {
    pub mantissa: i128,
    pub scale: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed number `{0}`")]
pub struct BadNumber(pub String);

impl Decimal {
    pub fn from_int(v: i64) -> Self {
        Decimal { mantissa: v as i128, scale: 0 }
    }

    /// `self * mult`, rounded half away from zero. The flag reports exactness.
    pub fn scaled(self, mult: i64) -> (i64, bool) {
        let num = self.mantissa * mult as i128;
        let den = 10i128.pow(self.scale);
        let exact = num % den == 0;
        (div_round_half_away(num, den) as i64, exact)
    }

    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 / libm::pow(10.0, self.scale as f64)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio(self.mantissa, 10i128.pow(self.scale)))
    }
}

impl FromStr for Decimal {
    type Err = BadNumber;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadNumber(s.into());
        let (body, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (neg, digits) = match body.as_bytes().first() {
            Some(b'-') => (true, &body[1..]),
            Some(b'+') => (false, &body[1..]),
            _ => (false, body),
        };
        let (int_part, frac_part) = match digits.find('.') {
            Some(i) => (&digits[..i], &digits[i + 1..]),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let mut mantissa: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            if !b.is_ascii_digit() {
                return Err(bad());
            }
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((b - b'0') as i128))
                .ok_or_else(bad)?;
        }
        let mut scale = frac_part.len() as i32 - exp;
        while scale < 0 {
            mantissa = mantissa.checked_mul(10).ok_or_else(bad)?;
            scale += 1;
        }
        if scale > 30 {
            return Err(bad());
        }
        Ok(Decimal {
            mantissa: if neg { -mantissa } else { mantissa },
            scale: scale as u32,
        })
    }
}

/// Formats `num / den` as a plain decimal. Terminating fractions are printed
/// exactly; others are rounded to nine places. Trailing zeros are dropped.
pub fn format_ratio(num: i128, den: i128) -> String {
    assert!(den != 0, "zero denominator");
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let neg = num < 0;
    let mag = num.unsigned_abs();
    let den_u = den as u128;
    let mut places = 0u32;
    let mut scaled = mag;
    while scaled % den_u != 0 && places < 9 {
        scaled *= 10;
        places += 1;
    }
    let value = if scaled % den_u == 0 {
        scaled / den_u
    } else {
        (scaled + den_u / 2) / den_u
    };
    let pow = 10u128.pow(places);
    let int_part = value / pow;
    let mut frac = value % pow;
    let mut frac_places = places;
    while frac_places > 0 && frac.is_multiple_of(10) {
        frac /= 10;
        frac_places -= 1;
    }
    let sign = if neg && value != 0 { "-" } else { "" };
    if frac_places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac:0width$}", width = frac_places as usize)
    }
}

/// DBU value rendered in microns.
pub fn dbu_to_micron_string(v: i64, units: u32) -> String {
    format_ratio(v as i128, units as i128)
}

/// Nonnegative rational, used for thresholds and fractions that must compare exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Ratio { num, den }
    }

    pub fn integer(v: u64) -> Self {
        Ratio { num: v, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// Compares `self` with `other` exactly.
    pub fn cmp_exact(self, other: Ratio) -> core::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio(self.num as i128, self.den as i128))
    }
}

impl FromStr for Ratio {
    type Err = BadNumber;

    /// Accepts decimals (`0.6`) and fractions (`3/5`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadNumber(s.into());
        if let Some((a, b)) = s.split_once('/') {
            let num = a.trim().parse::<u64>().map_err(|_| bad())?;
            let den = b.trim().parse::<u64>().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Ratio { num, den });
        }
        let d: Decimal = s.parse()?;
        if d.mantissa < 0 || d.scale > 18 {
            return Err(bad());
        }
        let num = u64::try_from(d.mantissa).map_err(|_| bad())?;
        Ok(Ratio { num, den: 10u64.pow(d.scale) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(div_round_half_away(7, 5), 1);
        assert_eq!(div_round_half_away(15, 10), 2);
        assert_eq!(div_round_half_away(-15, 10), -2);
        assert_eq!(div_round_half_away(-14, 10), -1);
        assert_eq!(div_round_half_away(14, -10), -1);
    }

    #[test]
    fn decimals_parse_exactly() {
        let d: Decimal = "-0.5".parse().unwrap();
        assert_eq!(d.scaled(1000), (-500, true));
        let d: Decimal = "1.2345".parse().unwrap();
        assert_eq!(d.scaled(1000), (1235, false));
        let d: Decimal = "2e3".parse().unwrap();
        assert_eq!(d.scaled(1), (2000, true));
        assert!("1.2.3".parse::<Decimal>().is_err());
        assert!("".parse::<Decimal>().is_err());
        assert!("-".parse::<Decimal>().is_err());
    }

    #[test]
    fn ratios_format_tersely() {
        assert_eq!(format_ratio(500, 1000), "0.5");
        assert_eq!(format_ratio(-1, 2000), "-0.0005");
        assert_eq!(format_ratio(3000, 1000), "3");
        assert_eq!(format_ratio(1, 3), "0.333333333");
        assert_eq!(format_ratio(0, 7), "0");
    }

    #[test]
    fn ratio_parses_decimal_and_fraction() {
        assert_eq!("0.6".parse::<Ratio>().unwrap(), Ratio::new(6, 10));
        assert_eq!("3/5".parse::<Ratio>().unwrap(), Ratio::new(3, 5));
        assert!("-1".parse::<Ratio>().is_err());
        assert_eq!(Ratio::new(6, 10).cmp_exact(Ratio::new(3, 5)), core::cmp::Ordering::Equal);
    }

    #[test]
    fn isqrt_matches_definition() {
        for n in 0u128..2000 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }
}
