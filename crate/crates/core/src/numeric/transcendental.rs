//! Outward-rounded `exp2`, `ln`, `log2` and rational powers.
//!
//! Series are evaluated in interval arithmetic at a working precision of
//! `prec + GUARD` bits; every truncation adds an explicit remainder
//! interval before the final rounding back to `prec` bits.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::dyadic::Dyadic;
use super::interval::Interval;
use crate::error::{Error, Result};

const GUARD: u32 = 40;
/// Halvings applied to the exp argument before the Taylor series.
const EXP_REDUCTION: i64 = 8;

fn ln2_cache() -> &'static Mutex<HashMap<u32, Interval>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Enclosure of `ln 2` at `prec` bits. Computed once per precision at `2*prec`
/// bits as `2 atanh(1/3)` and cached.
pub fn ln2(prec: u32) -> Interval {
    if let Some(v) = ln2_cache().lock().unwrap().get(&prec) {
        return v.clone();
    }
    let wp = 2 * prec + 8;
    let third = Interval::from_rational(&BigRational::new(1.into(), 3.into()), wp);
    let v = atanh_series(&third, wp).mul_pow2(1).with_precision(prec);
    ln2_cache().lock().unwrap().insert(prec, v.clone());
    v
}

/// `atanh(z)` for `|z| <= 1/3` by its odd power series plus a remainder.
fn atanh_series(z: &Interval, wp: u32) -> Interval {
    let z2 = z.sqr();
    let mut power = z.clone();
    let mut sum = z.clone();
    let stop = Dyadic::pow2(-(wp as i64) - 4);
    let mut k: u64 = 1;
    loop {
        power = &power * &z2;
        let term = power.div(&Interval::from_int(2 * k + 1, wp)).expect("odd divisor");
        sum = &sum + &term;
        k += 1;
        let mag = power.lo().abs().greater(&power.hi().abs()).clone();
        if mag < stop {
            // Tail <= |z|^{2k+1} / (1 - z^2) <= 2 |power| z^2 for |z| <= 1/3.
            let r = &(&mag * z2.hi()) * &Dyadic::from_int(2);
            let rem = Interval::outward(-&r, r, wp);
            return &sum + &rem;
        }
    }
}

/// `exp(y)` for `0 <= y <= 1/2` by Taylor series plus a remainder.
fn exp_series(y: &Interval, wp: u32) -> Interval {
    debug_assert!(!y.lo().is_negative() && y.hi() <= &Dyadic::pow2(-1));
    let mut term = Interval::one(wp);
    let mut sum = Interval::one(wp);
    let stop = Dyadic::pow2(-(wp as i64) - 4);
    let mut n: u64 = 1;
    loop {
        term = (&term * y).div(&Interval::from_int(n, wp)).expect("positive divisor");
        sum = &sum + &term;
        n += 1;
        if term.hi() < &stop {
            // Ratio of consecutive terms is at most y <= 1/2.
            let r = term.hi().mul_pow2(1);
            return &sum + &Interval::upto(r, wp);
        }
    }
}

/// `2^d` for a single dyadic point.
fn exp2_point(d: &Dyadic, prec: u32) -> Interval {
    let k = d.floor();
    let f = d - &Dyadic::from_int(k.clone());
    let k = k.to_i64().expect("exp2 exponent out of range");
    if f.is_zero() {
        return Interval::point(Dyadic::pow2(k), prec);
    }
    let wp = prec + GUARD;
    let y = (&ln2(wp) * &Interval::point(f, wp)).mul_pow2(-EXP_REDUCTION);
    let mut e = exp_series(&y, wp);
    for _ in 0..EXP_REDUCTION {
        e = e.sqr();
    }
    e.mul_pow2(k).with_precision(prec)
}

/// Enclosure of `2^x` for every `x` in the interval.
pub fn exp2(x: &Interval, prec: u32) -> Interval {
    let lo = exp2_point(x.lo(), prec);
    if x.is_point() {
        return lo;
    }
    let hi = exp2_point(x.hi(), prec);
    Interval::outward(lo.lo().clone(), hi.hi().clone(), prec)
}

/// `2^r` for an exact rational exponent.
pub fn exp2_rational(r: &BigRational, prec: u32) -> Interval {
    let k = r.floor().to_integer();
    let f = r - BigRational::from_integer(k.clone());
    let k = k.to_i64().expect("exp2 exponent out of range");
    if f.is_zero() {
        return Interval::point(Dyadic::pow2(k), prec);
    }
    let wp = prec + GUARD;
    exp2(&Interval::from_rational(&f, wp), wp).mul_pow2(k).with_precision(prec)
}

/// `ln d` for a single positive dyadic point.
fn ln_point(d: &Dyadic, wp: u32) -> Interval {
    debug_assert!(d.is_positive());
    let mut e = d.ilog2().unwrap();
    let mut m = d.mul_pow2(-e);
    // m in [3/4, 3/2) keeps |z| <= 1/5.
    if m >= Dyadic::new(BigInt::from(3), -1) {
        m = m.mul_pow2(-1);
        e += 1;
    }
    let ln2e = &ln2(wp) * &Interval::from_int(e, wp);
    if m == Dyadic::one() {
        return ln2e;
    }
    let mi = Interval::point(m, wp);
    let one = Interval::one(wp);
    let z = (&mi - &one).div(&(&mi + &one)).expect("m + 1 > 0");
    &atanh_series(&z, wp).mul_pow2(1) + &ln2e
}

/// Natural logarithm; requires `x.lo > 0`.
pub fn ln(x: &Interval, prec: u32) -> Result<Interval> {
    if !x.is_strictly_positive() {
        return Err(Error::domain("ln of an interval not strictly positive"));
    }
    let wp = prec + GUARD;
    let lo = ln_point(x.lo(), wp);
    let hi = if x.is_point() { lo.clone() } else { ln_point(x.hi(), wp) };
    Ok(Interval::outward(lo.lo().clone(), hi.hi().clone(), prec))
}

/// Base-two logarithm; requires `x.lo > 0`. Exact on powers of two.
pub fn log2(x: &Interval, prec: u32) -> Result<Interval> {
    if !x.is_strictly_positive() {
        return Err(Error::domain("log2 of an interval not strictly positive"));
    }
    let exact = |d: &Dyadic| d.is_pow2().then(|| Dyadic::from_int(d.exponent()));
    if let (Some(a), Some(b)) = (exact(x.lo()), exact(x.hi())) {
        return Ok(Interval::outward(a, b, prec));
    }
    let wp = prec + GUARD;
    ln(x, wp)?.div(&ln2(wp)).map(|v| v.with_precision(prec))
}

/// `x^q` for a rational exponent. Needs `x.lo > 0` unless `q` is a
/// nonnegative integer.
pub fn pow(x: &Interval, q: &BigRational, prec: u32) -> Result<Interval> {
    if q.is_integer() {
        let n = q.to_integer();
        let e = n.abs().to_u64().ok_or_else(|| Error::domain("exponent too large"))?;
        let p = x.with_precision(prec + GUARD).powi(e);
        let p = if n.is_negative() { p.recip()? } else { p };
        return Ok(p.with_precision(prec));
    }
    if !x.is_strictly_positive() {
        return Err(Error::domain("fractional power of an interval not strictly positive"));
    }
    let wp = prec + GUARD;
    let l = log2(x, wp)?;
    let arg = &l * &Interval::from_rational(q, wp);
    Ok(exp2(&arg, wp).with_precision(prec))
}

/// Enclosure of `2^(-l/T)` with width at most `2^(2-P)`.
pub fn pow2_frac(l: u64, t: &BigRational, prec: u32) -> Result<Interval> {
    if !t.is_positive() {
        return Err(Error::domain(format!("temperature must be positive, got {t}")));
    }
    if prec < 8 {
        return Err(Error::arg(format!("precision must be at least 8 bits, got {prec}")));
    }
    let r = -(BigRational::from_integer(l.into()) / t);
    Ok(exp2_rational(&r, prec))
}
