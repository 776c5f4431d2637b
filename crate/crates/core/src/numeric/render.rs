//! Decimal rendering of dyadic values and intervals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use super::dyadic::{Dyadic, Round};
use super::interval::Interval;

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

fn insert_point(n: &BigInt, k: u32) -> String {
    let neg = n.is_negative();
    let mut digits = n.abs().to_string();
    if k > 0 {
        if digits.len() <= k as usize {
            digits = "0".repeat(k as usize + 1 - digits.len()) + &digits;
        }
        digits.insert(digits.len() - k as usize, '.');
    }
    if neg {
        format!("-{digits}")
    } else {
        digits
    }
}

/// `d * 10^k` rounded to an integer in direction `dir`.
fn scaled(d: &Dyadic, k: u32, dir: Round) -> BigInt {
    let m = d.mantissa() * pow10(k);
    let e = d.exponent();
    if e >= 0 {
        m << e as u64
    } else {
        let den = BigInt::from(1) << (-e) as u64;
        match dir {
            Round::Down => m.div_floor(&den),
            Round::Up => -((-m).div_floor(&den)),
        }
    }
}

/// Fixed-point decimal with `k` fractional digits, rounded in direction `dir`.
pub fn fixed(d: &Dyadic, k: u32, dir: Round) -> String {
    insert_point(&scaled(d, k, dir), k)
}

/// Exact decimal expansion (always finite for a dyadic rational), with
/// trailing zeros trimmed.
pub fn exact_decimal(d: &Dyadic) -> String {
    let k = (-d.exponent()).max(0) as u32;
    fixed(d, k, Round::Down)
}

fn exact_digits(d: &Dyadic) -> u32 {
    (-d.exponent()).max(0) as u32
}

/// `(lo, hi)` decimal strings: exact for short point intervals; otherwise
/// enough fractional digits to resolve the width plus two guard digits,
/// with `lo` rounded down and `hi` rounded up.
pub fn render_interval(x: &Interval) -> (String, String) {
    let mag = x.lo().abs().greater(&x.hi().abs()).clone();
    let lead = mag.ilog2().map(|e| ((-e).max(0) as f64 * std::f64::consts::LOG10_2) as u32).unwrap_or(0);
    let cap = lead + (x.precision() as f64 * std::f64::consts::LOG10_2).ceil() as u32 + 2;
    if x.is_point() && exact_digits(x.lo()) <= cap {
        let s = exact_decimal(x.lo());
        return (s.clone(), s);
    }
    // First digit position the width reaches, so straddling a decimal
    // boundary (1.1999.. vs 1.2000..) does not cut the digit count short.
    let w = x.width();
    let mut k = 0;
    while k < cap && scaled(&w, k, Round::Down) < BigInt::from(1) {
        k += 1;
    }
    let k = (k + 2).min(cap);
    (fixed(x.lo(), k, Round::Down), fixed(x.hi(), k, Round::Up))
}
