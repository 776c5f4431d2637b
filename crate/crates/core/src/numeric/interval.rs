use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use super::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` of dyadic rationals.
///
/// Every operation rounds `lo` toward minus infinity and `hi` toward plus
/// infinity at `prec` significant bits, so the exact image of any point of
/// the inputs stays inside the result. Binary operations work at the larger
/// of the two operand precisions.
#[derive(Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi, prec })
    }

    /// Build from endpoints, rounding them outward to `prec` bits.
    pub(crate) fn outward(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        debug_assert!(lo <= hi, "outward: {lo:?} > {hi:?}");
        Interval { lo: lo.round(prec, Round::Down), hi: hi.round(prec, Round::Up), prec }
    }

    pub fn point(x: Dyadic, prec: u32) -> Self {
        Interval::outward(x.clone(), x, prec)
    }

    pub fn zero(prec: u32) -> Self {
        Interval { lo: Dyadic::zero(), hi: Dyadic::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        Interval::point(Dyadic::one(), prec)
    }

    pub fn from_int(v: impl Into<BigInt>, prec: u32) -> Self {
        Interval::point(Dyadic::from_int(v), prec)
    }

    pub fn from_biguint(v: &BigUint, prec: u32) -> Self {
        Interval::point(Dyadic::from_biguint(v), prec)
    }

    /// Tightest `prec`-bit enclosure of a rational.
    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        if let Some(d) = Dyadic::from_rational(r) {
            return Interval::point(d, prec);
        }
        let n = Dyadic::from_int(r.numer().clone());
        let d = Dyadic::from_int(r.denom().clone());
        Interval {
            lo: Dyadic::div_round(&n, &d, prec, Round::Down),
            hi: Dyadic::div_round(&n, &d, prec, Round::Up),
            prec,
        }
    }

    /// `[0, hi]`, the shape of a nonnegative remainder bound.
    pub fn upto(hi: Dyadic, prec: u32) -> Self {
        Interval::outward(Dyadic::zero(), hi, prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Interval::outward(self.lo.clone(), self.hi.clone(), prec)
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    /// `width <= 2^k`.
    pub fn width_at_most_pow2(&self, k: i64) -> bool {
        self.width() <= Dyadic::pow2(k)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        self.lo.to_rational() <= *r && *r <= self.hi.to_rational()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.lesser(&other.lo).clone(),
            hi: self.hi.greater(&other.hi).clone(),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        Interval { lo: self.lo.mul_pow2(k), hi: self.hi.mul_pow2(k), prec: self.prec }
    }

    pub fn scale(&self, k: &BigUint) -> Self {
        self * &Interval::from_biguint(k, self.prec)
    }

    pub fn recip(&self) -> Result<Self> {
        Interval::one(self.prec).div(self)
    }

    /// Interval quotient; rejects divisors containing zero.
    pub fn div(&self, rhs: &Interval) -> Result<Self> {
        if rhs.contains_zero() {
            return Err(Error::domain("division by an interval containing zero"));
        }
        let prec = self.prec.max(rhs.prec);
        let cands = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let lo = cands
            .iter()
            .map(|(a, b)| Dyadic::div_round(a, b, prec, Round::Down))
            .min()
            .unwrap();
        let hi = cands
            .iter()
            .map(|(a, b)| Dyadic::div_round(a, b, prec, Round::Up))
            .max()
            .unwrap();
        Ok(Interval { lo, hi, prec })
    }

    pub fn sqr(&self) -> Self {
        let prec = self.prec;
        let (a, b) = (&self.lo * &self.lo, &self.hi * &self.hi);
        if self.contains_zero() {
            Interval::outward(Dyadic::zero(), a.greater(&b).clone(), prec)
        } else {
            Interval::outward(a.lesser(&b).clone(), a.greater(&b).clone(), prec)
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Interval::one(self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    /// Clamp the lower endpoint at zero; for quantities known to be
    /// nonnegative (variances, sums of nonnegative terms).
    pub fn clamp_nonneg(&self) -> Self {
        if self.lo.is_negative() {
            let hi = if self.hi.is_negative() { Dyadic::zero() } else { self.hi.clone() };
            Interval { lo: Dyadic::zero(), hi, prec: self.prec }
        } else {
            self.clone()
        }
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval::outward(&self.lo + &rhs.lo, &self.hi + &rhs.hi, self.prec.max(rhs.prec))
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval::outward(&self.lo - &rhs.hi, &self.hi - &rhs.lo, self.prec.max(rhs.prec))
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        let p = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let lo = p.iter().min().unwrap().clone();
        let hi = p.iter().max().unwrap().clone();
        Interval::outward(lo, hi, self.prec.max(rhs.prec))
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = super::render::render_interval(self);
        write!(f, "[{lo}, {hi}]")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn division_examples() {
        let one = Interval::one(64);
        let two = Interval::from_int(2, 64);
        let half = one.div(&two).unwrap();
        assert!(half.is_point());
        assert_eq!(half.lo(), &Dyadic::pow2(-1));
        let straddle = Interval::new(Dyadic::from_int(-1), Dyadic::one(), 64).unwrap();
        assert!(one.div(&straddle).is_err());
    }

    #[test]
    fn rational_enclosure_is_tight() {
        let third = Interval::from_rational(&q(1, 3), 100);
        assert!(third.contains_rational(&q(1, 3)));
        assert!(third.width_at_most_pow2(-100));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(Interval::new(Dyadic::one(), Dyadic::zero(), 64).is_err());
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Interval::from_rational(&q(3, 4), 80);
        let p = x.powi(5);
        assert!(p.contains_rational(&q(243, 1024)));
        assert_eq!(x.powi(0), Interval::one(80));
    }

    fn arb_rat() -> impl Strategy<Value = BigRational> {
        (-1000i64..1000, 1i64..500).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn field_ops_contain_exact_result(a in arb_rat(), b in arb_rat(), prec in 8u32..90) {
            let (ia, ib) = (Interval::from_rational(&a, prec), Interval::from_rational(&b, prec));
            prop_assert!((&ia + &ib).contains_rational(&(&a + &b)));
            prop_assert!((&ia - &ib).contains_rational(&(&a - &b)));
            prop_assert!((&ia * &ib).contains_rational(&(&a * &b)));
            if !ib.contains_zero() {
                prop_assert!(ia.div(&ib).unwrap().contains_rational(&(&a / &b)));
            }
        }

        #[test]
        fn widening_an_input_never_shrinks_the_output(a in arb_rat(), b in arb_rat(), k in 1i64..20) {
            let prec = 64;
            let ia = Interval::from_rational(&a, prec);
            let ib = Interval::from_rational(&b, prec);
            let eps = Dyadic::pow2(-k);
            let wide = Interval::new(ia.lo() - &eps, ia.hi() + &eps, prec).unwrap();
            prop_assert!((&wide + &ib).contains_interval(&(&ia + &ib)));
            prop_assert!((&wide * &ib).contains_interval(&(&ia * &ib)));
            if !ib.contains_zero() {
                prop_assert!(wide.div(&ib).unwrap().contains_interval(&ia.div(&ib).unwrap()));
            }
        }
    }
}
