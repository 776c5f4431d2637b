//! Finite bit strings ordered by (length, lexicographic bits).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

/// A finite binary string. Used both for programs and for machine outputs.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(Vec<bool>);

/// A program is a bit string in some machine's prefix-free domain.
pub type Program = Bits;

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    /// The `width` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, width: usize) -> Self {
        Bits((0..width).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    pub fn from_biguint(value: &BigUint, width: usize) -> Self {
        Bits((0..width).rev().map(|i| value.bit(i as u64)).collect())
    }

    /// Binary representation of `value` without leading zeros ("0" for zero).
    pub fn binary_of(value: &BigUint) -> Self {
        if value.is_zero() {
            return Bits(vec![false]);
        }
        Bits::from_biguint(value, value.bits() as usize)
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::zero();
        for &b in &self.0 {
            v <<= 1u32;
            if b {
                v += 1u32;
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn extend_from(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn prefix(&self, n: usize) -> Bits {
        Bits(self.0[..n.min(self.0.len())].to_vec())
    }

    /// True when `self` is a proper prefix of `other`.
    pub fn is_proper_prefix_of(&self, other: &Bits) -> bool {
        self.len() < other.len() && other.0[..self.len()] == self.0[..]
    }

    /// Hex form with a leading sentinel one bit, so the length survives:
    /// the string `1 ++ bits` read as a binary integer, printed in lowercase
    /// hex. The empty string encodes as `"1"`.
    pub fn to_sentinel_hex(&self) -> String {
        let mut v = BigUint::from(1u32);
        for &b in &self.0 {
            v <<= 1u32;
            if b {
                v += 1u32;
            }
        }
        v.to_str_radix(16)
    }

    pub fn from_sentinel_hex(s: &str) -> Result<Self> {
        let v = BigUint::parse_bytes(s.as_bytes(), 16)
            .filter(|v| !v.is_zero())
            .ok_or_else(|| Error::arg(format!("bad sentinel hex {s:?}")))?;
        let n = v.bits() as usize - 1;
        Ok(Bits::from_biguint(&v, n))
    }
}

impl Ord for Bits {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::arg(format!("not a bit string: {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl serde::Serialize for Bits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Bits {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
