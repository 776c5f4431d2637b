use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for inexact dyadic operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// A dyadic rational `mant * 2^exp`, kept canonical: `mant` odd, or zero
/// with `exp == 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

pub(crate) fn floor_shr(m: &BigInt, s: u64) -> BigInt {
    // BigInt's `>>` rounds toward negative infinity.
    m >> s
}

pub(crate) fn ceil_shr(m: &BigInt, s: u64) -> BigInt {
    -(&(-m) >> s)
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Dyadic { mant, exp: 0 };
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Dyadic { mant, exp }
        } else {
            Dyadic { mant: mant >> tz, exp: exp + tz as i64 }
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Dyadic::new(v.into(), 0)
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        Dyadic::new(BigInt::from_biguint(Sign::Plus, v.clone()), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: e }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac as i64, -1074)
        } else {
            ((frac | (1u64 << 52)) as i64, biased - 1075)
        };
        Some(Dyadic::new(BigInt::from(sign * m), e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Number of significant bits of the mantissa.
    pub fn bit_len(&self) -> u64 {
        self.mant.bits()
    }

    /// `floor(log2 |self|)`; `None` for zero.
    pub fn ilog2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.mant.bits() as i64 - 1)
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Is this an exact (possibly negative) power of two?
    pub fn is_pow2(&self) -> bool {
        self.mant.is_one()
    }

    /// Round to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let m = match dir {
            Round::Down => floor_shr(&self.mant, shift),
            Round::Up => ceil_shr(&self.mant, shift),
        };
        Dyadic::new(m, self.exp + shift as i64)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            floor_shr(&self.mant, (-self.exp) as u64)
        }
    }

    pub fn ceil(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            ceil_shr(&self.mant, (-self.exp) as u64)
        }
    }

    /// Quotient `a / b` rounded to `prec` significant bits. `b` must be nonzero.
    pub fn div_round(a: &Dyadic, b: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!b.is_zero(), "division by zero dyadic");
        if a.is_zero() {
            return Dyadic::zero();
        }
        let want = prec as i64 + 2 + b.mant.bits() as i64 - a.mant.bits() as i64;
        let s = want.max(0) as u64;
        let num = &a.mant << s;
        let q = match dir {
            Round::Down => num.div_floor(&b.mant),
            Round::Up => -((-num).div_floor(&b.mant)),
        };
        Dyadic::new(q, a.exp - b.exp - s as i64).round(prec, dir)
    }

    /// Nearest-ish `f64` (truncating); for display and tests only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (m, e) = if bits > 60 {
            let s = bits - 60;
            (floor_shr(&self.mant, s), self.exp + s as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        if e > 1100 {
            return mf * f64::INFINITY;
        }
        if e < -1200 {
            return 0.0;
        }
        mf * 2f64.powi(e as i32)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Exact dyadic value of a rational, if its denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let d = r.denom();
        if d.is_positive() && (d & (d - BigInt::one())).is_zero() {
            let k = d.bits() as i64 - 1;
            Some(Dyadic::new(r.numer().clone(), -k))
        } else {
            None
        }
    }

    pub fn lesser<'a>(&'a self, other: &'a Dyadic) -> &'a Dyadic {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn greater<'a>(&'a self, other: &'a Dyadic) -> &'a Dyadic {
        if self >= other {
            self
        } else {
            other
        }
    }
}

fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
    let e = a.exp.min(b.exp);
    ((&a.mant << (a.exp - e) as u64), (&b.mant << (b.exp - e) as u64), e)
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb || sa == 0 {
            return sa.cmp(&sb);
        }
        // Same nonzero sign: compare magnitudes by leading bit position first.
        let (la, lb) = (self.ilog2().unwrap(), other.ilog2().unwrap());
        if la != lb {
            let mag = la.cmp(&lb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        let (x, y, _) = aligned(self, other);
        x.cmp(&y)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (x, y, e) = aligned(self, rhs);
        Dyadic::new(x + y, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &rhs.mant, self.exp + rhs.exp)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::exact_decimal(self))
    }
}
