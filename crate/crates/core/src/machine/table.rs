//! Rule-defined prefix-free machines with exactly known domains.
//!
//! Codewords are allocated canonically: at each length, the lexicographically
//! smallest strings that extend no shorter codeword. Because allocation is
//! always smallest-first, the codewords of length `l` are the consecutive
//! integers `start(l) .. start(l) + c_l` written in `l` bits, where
//! `start(l) = 2 * (start(l-1) + c_(l-1))`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::numeric::Dyadic;

/// Length spectrum `l -> c_l`, the number of halting programs of length `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpectrumRule {
    /// Finitely many `(length, count)` pairs.
    Explicit(BTreeMap<u64, BigUint>),
    /// `c_l = floor(2^(beta*l))` for `l >= start`, zero below.
    Geometric { beta: BigRational, start: u64 },
    /// `c_l = floor(2^l / (l+1)^2)` for `l >= 1`.
    Harmonic,
}

/// Closed-form upper envelope of the spectrum used for tail bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Majorant {
    /// No codewords beyond `max_len`.
    Finite { max_len: u64 },
    /// `c_l <= 2^(beta*l)`.
    Geometric { beta: BigRational },
    /// `c_l <= 2^l / (l+1)^2`.
    Harmonic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputRule {
    /// Output is the 0-based canonical index of the codeword, in binary.
    Index,
    /// Outputs listed in canonical codeword order; codewords past the end of
    /// the list fall back to [`OutputRule::Index`].
    Explicit(Vec<Bits>),
}

/// Default length up to which Kraft's inequality is checked term by term
/// before the closed-form tail takes over.
pub const KRAFT_CHECK_LEN: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableMachine {
    pub(crate) rule: SpectrumRule,
    pub(crate) output: OutputRule,
    pub(crate) l_max_hint: Option<u64>,
}

impl SpectrumRule {
    pub fn count(&self, l: u64) -> BigUint {
        match self {
            SpectrumRule::Explicit(m) => m.get(&l).cloned().unwrap_or_default(),
            SpectrumRule::Geometric { beta, start } => {
                if l < *start || l == 0 {
                    return BigUint::zero();
                }
                // floor(2^(p*l/q)) = floor((2^(p*l))^(1/q)).
                let p = beta.numer().to_u64().unwrap_or(0);
                let q = beta.denom().to_u32().unwrap_or(1);
                (BigUint::one() << (p * l)).nth_root(q)
            }
            SpectrumRule::Harmonic => {
                if l == 0 {
                    return BigUint::zero();
                }
                let d = BigUint::from(l + 1).pow(2);
                (BigUint::one() << l) / d
            }
        }
    }

    pub fn max_length(&self) -> Option<u64> {
        match self {
            SpectrumRule::Explicit(m) => Some(
                m.iter().rev().find(|(_, c)| !c.is_zero()).map(|(l, _)| *l).unwrap_or(0),
            ),
            _ => None,
        }
    }

    pub fn majorant(&self) -> Majorant {
        match self {
            SpectrumRule::Explicit(_) => Majorant::Finite { max_len: self.max_length().unwrap() },
            SpectrumRule::Geometric { beta, .. } => Majorant::Geometric { beta: beta.clone() },
            SpectrumRule::Harmonic => Majorant::Harmonic,
        }
    }

    /// Upper bound on `sum_{l > l_cut} c_l 2^-l`, or `None` when no closed
    /// form is available.
    pub fn kraft_tail_bound(&self, l_cut: u64) -> Option<Dyadic> {
        match self {
            SpectrumRule::Explicit(_) => {
                if l_cut >= self.max_length().unwrap() {
                    Some(Dyadic::zero())
                } else {
                    let s: Dyadic = (l_cut + 1..=self.max_length().unwrap())
                        .map(|l| kraft_term(l, &self.count(l)))
                        .fold(Dyadic::zero(), |a, b| &a + &b);
                    Some(s)
                }
            }
            // sum_{l > L} 1/(l+1)^2 <= 1/(L+1), rounded up to a power of two.
            SpectrumRule::Harmonic => {
                let k = 64 - (l_cut + 1).leading_zeros() as i64 - 1;
                Some(Dyadic::pow2(-k))
            }
            SpectrumRule::Geometric { beta, .. } => {
                // sum_{l > L} x^l = x^(L+1) / (1 - x), x = 2^(beta - 1).
                let one = BigRational::one();
                if beta >= &one {
                    return None;
                }
                let x = crate::numeric::exp2_rational(&(beta - &one), 96);
                let num = crate::numeric::pow(&x, &BigRational::from_integer((l_cut + 1).into()), 96).ok()?;
                let den = &crate::numeric::Interval::one(96) - &x;
                num.div(&den).ok().map(|v| v.hi().clone())
            }
        }
    }
}

fn kraft_term(l: u64, c: &BigUint) -> Dyadic {
    Dyadic::from_biguint(c).mul_pow2(-(l as i64))
}

impl TableMachine {
    pub fn new(rule: SpectrumRule, output: OutputRule, l_max_hint: Option<u64>) -> Result<Self> {
        if let SpectrumRule::Explicit(m) = &rule {
            if m.get(&0).is_some_and(|c| !c.is_zero()) {
                return Err(Error::InvalidMachine("length-0 codeword not allowed".into()));
            }
        }
        if let SpectrumRule::Geometric { beta, .. } = &rule {
            if beta.is_negative() {
                return Err(Error::InvalidMachine("geometric beta must be >= 0".into()));
            }
        }
        let m = TableMachine { rule, output, l_max_hint };
        m.validate()?;
        Ok(m)
    }

    pub fn rule(&self) -> &SpectrumRule {
        &self.rule
    }

    pub fn output_rule(&self) -> &OutputRule {
        &self.output
    }

    pub fn l_max_hint(&self) -> Option<u64> {
        self.l_max_hint.or_else(|| self.rule.max_length())
    }

    pub fn spectrum_count(&self, l: u64) -> BigUint {
        self.rule.count(l)
    }

    pub fn max_length(&self) -> Option<u64> {
        self.rule.max_length()
    }

    pub fn is_finite(&self) -> bool {
        self.max_length().is_some()
    }

    /// Shortest length with a nonzero count, searching up to `limit`.
    pub fn min_length(&self, limit: u64) -> Option<u64> {
        (1..=limit).find(|&l| !self.spectrum_count(l).is_zero())
    }

    /// Exact `sum_{l <= l_max} c_l 2^-l`.
    pub fn kraft_partial(&self, l_max: u64) -> Dyadic {
        (1..=l_max).fold(Dyadic::zero(), |acc, l| &acc + &kraft_term(l, &self.spectrum_count(l)))
    }

    /// Checks `c_l <= 2^l` and Kraft's inequality: exactly up to
    /// [`KRAFT_CHECK_LEN`] (or the hint), then through the closed-form tail.
    pub fn validate(&self) -> Result<()> {
        let check = match self.max_length() {
            Some(m) => m,
            None => self.l_max_hint.unwrap_or(0).max(KRAFT_CHECK_LEN),
        };
        let mut start = BigUint::zero();
        for l in 1..=check {
            start <<= 1u32;
            let c = self.spectrum_count(l);
            if c > (BigUint::one() << l) || &start + &c > (BigUint::one() << l) {
                return Err(Error::KraftViolation { length: l });
            }
            start += c;
        }
        let tail = self
            .rule
            .kraft_tail_bound(check)
            .ok_or_else(|| Error::InvalidMachine("spectrum has no Kraft tail bound".into()))?;
        if &self.kraft_partial(check) + &tail > Dyadic::one() {
            return Err(Error::KraftViolation { length: check + 1 });
        }
        Ok(())
    }

    /// `start(l)`: first codeword value at length `l`, with the total count
    /// of shorter codewords.
    fn start_and_rank_base(&self, l: u64) -> (BigUint, BigUint) {
        let mut start = BigUint::zero();
        let mut before = BigUint::zero();
        for j in 1..l {
            let c = self.spectrum_count(j);
            start = (start + &c) << 1u32;
            before += c;
        }
        (start, before)
    }

    /// Codewords of one length, in lexicographic order.
    pub fn codewords_of_length(&self, l: u64, limit: u64) -> Result<Vec<Bits>> {
        let c = self.spectrum_count(l);
        if c > BigUint::from(limit) {
            return Err(Error::ResourceLimit(format!("{c} codewords of length {l} exceed limit {limit}")));
        }
        let (start, _) = self.start_and_rank_base(l);
        if &start + &c > (BigUint::one() << l) {
            return Err(Error::KraftViolation { length: l });
        }
        let n = c.to_u64().unwrap();
        Ok((0..n).map(|r| Bits::from_biguint(&(&start + r), l as usize)).collect())
    }

    /// All codewords up to `l_max`, in increasing length then lexicographic
    /// order.
    pub fn assign_codewords(&self, l_max: u64) -> Result<Vec<Bits>> {
        self.assign_codewords_limited(l_max, 1 << 24)
    }

    pub fn assign_codewords_limited(&self, l_max: u64, limit: u64) -> Result<Vec<Bits>> {
        let mut out = Vec::new();
        for l in 1..=l_max {
            let remaining = limit.saturating_sub(out.len() as u64);
            out.extend(self.codewords_of_length(l, remaining)?);
        }
        Ok(out)
    }

    /// `(rank within length, global canonical index)` when `p` is a codeword.
    pub fn lookup(&self, p: &Bits) -> Option<(BigUint, BigUint)> {
        let l = p.len() as u64;
        if l == 0 {
            return None;
        }
        let c = self.spectrum_count(l);
        if c.is_zero() {
            return None;
        }
        let (start, before) = self.start_and_rank_base(l);
        let v = p.to_biguint();
        if v >= start && v < &start + &c {
            let rank = v - start;
            let index = &before + &rank;
            Some((rank, index))
        } else {
            None
        }
    }

    pub fn output_for_index(&self, index: &BigUint) -> Bits {
        if let OutputRule::Explicit(list) = &self.output {
            if let Some(out) = index.to_usize().and_then(|i| list.get(i)) {
                return out.clone();
            }
        }
        Bits::binary_of(index)
    }
}
