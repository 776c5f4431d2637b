//! Microcanonical ensemble of codeword concatenations.
//!
//! `Theta(L, N)` counts sequences of `N` codewords whose total length lies in
//! `[L, L + delta_L]`. It obeys `Theta(L, N) = sum_l c_l Theta(L - l, N - 1)`
//! and is computed exactly with big integers. From it come the entropy
//! `S(L, N) = log2 Theta(L, N)`, the temperature `1/T = dS/dL` (central
//! difference), and the law `R(p) = Theta(L - |p|, N - 1) / Theta(L, N)` of the
//! first codeword, which is compared with the canonical law
//! `2^(-|p|/T) / Z(T)`.

mod canonical;
mod channel;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::machine::Machine;
use crate::numeric::{log2, Dyadic, Interval};

pub use canonical::{
    additivity_residual, canonical_distribution, canonical_at, delta_l_sensitivity, energy_matched_inverse_temperature,
    micro_canonical_deviation, DeviationReport, Sensitivity,
};
pub use channel::{channel_simulate, ChannelReport, RNG_NAME, SHARD_SIZE};

/// Largest `(N_max + 1) * (L_max + delta_L + 1)` table built.
pub const MAX_CELLS: u64 = 1 << 24;

/// A finite length spectrum `l -> c_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    counts: BTreeMap<u64, BigUint>,
}

impl Spectrum {
    /// Nonzero counts only; rejects length 0, empty spectra and Kraft
    /// violations.
    pub fn new(pairs: impl IntoIterator<Item = (u64, BigUint)>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (l, c) in pairs {
            if c.is_zero() {
                continue;
            }
            if l == 0 {
                return Err(Error::arg("codewords of length 0 are not allowed"));
            }
            *counts.entry(l).or_insert_with(BigUint::zero) += c;
        }
        if counts.is_empty() {
            return Err(Error::arg("empty spectrum"));
        }
        let s = Spectrum { counts };
        if s.kraft() > Dyadic::one() {
            return Err(Error::KraftViolation { length: s.l_max() });
        }
        Ok(s)
    }

    pub fn from_counts(pairs: &[(u64, u64)]) -> Result<Self> {
        Spectrum::new(pairs.iter().map(|&(l, c)| (l, BigUint::from(c))))
    }

    /// Spectrum of a table machine with a finite domain.
    pub fn from_machine(m: &Machine) -> Result<Self> {
        let tm = m.require_table()?;
        let max = tm
            .max_length()
            .ok_or_else(|| Error::arg(format!("machine {} has an infinite domain; ensembles need a finite one", m.name())))?;
        Spectrum::new((1..=max).map(|l| (l, tm.spectrum_count(l))))
    }

    pub fn count(&self, l: u64) -> BigUint {
        self.counts.get(&l).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigUint)> {
        self.counts.iter().map(|(l, c)| (*l, c))
    }

    pub fn l_min(&self) -> u64 {
        *self.counts.keys().next().unwrap()
    }

    pub fn l_max(&self) -> u64 {
        *self.counts.keys().next_back().unwrap()
    }

    pub fn kraft(&self) -> Dyadic {
        self.iter()
            .fold(Dyadic::zero(), |a, (l, c)| &a + &Dyadic::from_biguint(c).mul_pow2(-(l as i64)))
    }
}

/// Exact `Theta` on `1 <= N <= n_max`, `0 <= L <= l_cap`.
#[derive(Clone, Debug)]
pub struct EnsembleTable {
    spectrum: Spectrum,
    n_max: u64,
    l_cap: u64,
    delta_l: u64,
    /// `exact[N][L]`: sequences of total length exactly `L`, for
    /// `L <= l_cap + delta_l`.
    exact: Vec<Vec<BigUint>>,
}

/// Build the density of states by the convolution recurrence.
pub fn build_theta(spectrum: &Spectrum, n_max: u64, l_cap: u64, delta_l: u64) -> Result<EnsembleTable> {
    if n_max < 1 {
        return Err(Error::arg("N_max must be at least 1"));
    }
    if n_max.checked_mul(spectrum.l_min()).is_none_or(|m| m > l_cap) {
        return Err(Error::arg(format!(
            "N_max * l_min = {n_max} * {} exceeds L_max = {l_cap}",
            spectrum.l_min()
        )));
    }
    let width = l_cap
        .checked_add(delta_l)
        .and_then(|w| w.checked_add(1))
        .ok_or_else(|| Error::ResourceLimit("window too wide".into()))?;
    if (n_max + 1).checked_mul(width).is_none_or(|c| c > MAX_CELLS) {
        return Err(Error::ResourceLimit(format!(
            "Theta rectangle {}x{width} exceeds {MAX_CELLS} cells",
            n_max + 1
        )));
    }
    let width = width as usize;
    let mut exact = vec![vec![BigUint::zero(); width]; n_max as usize + 1];
    exact[0][0] = BigUint::from(1u32);
    let terms: Vec<(usize, &BigUint)> = spectrum.iter().map(|(l, c)| (l as usize, c)).collect();
    for n in 1..=n_max as usize {
        let (prev, cur) = exact.split_at_mut(n);
        let (prev, cur) = (&prev[n - 1], &mut cur[0]);
        for (big_l, slot) in cur.iter_mut().enumerate() {
            let mut acc = BigUint::zero();
            for &(l, c) in &terms {
                if l > big_l {
                    break;
                }
                let p = &prev[big_l - l];
                if !p.is_zero() {
                    acc += c * p;
                }
            }
            *slot = acc;
        }
    }
    Ok(EnsembleTable { spectrum: spectrum.clone(), n_max, l_cap, delta_l, exact })
}

impl EnsembleTable {
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn l_cap(&self) -> u64 {
        self.l_cap
    }

    pub fn delta_l(&self) -> u64 {
        self.delta_l
    }

    /// `Theta(L, N)` over the window `[L, L + delta_L]`. Zero for negative
    /// `L`; `Theta(0, 0) = 1`.
    pub fn theta(&self, l: i64, n: u64) -> BigUint {
        if l < 0 || n > self.n_max {
            return BigUint::zero();
        }
        let row = &self.exact[n as usize];
        let lo = l as usize;
        let hi = (lo + self.delta_l as usize).min(row.len() - 1);
        if lo >= row.len() {
            return BigUint::zero();
        }
        row[lo..=hi].iter().sum()
    }

    fn check_range(&self, l: i64, n: u64) -> Result<()> {
        if n < 1 || n > self.n_max || l < 0 || l as u64 > self.l_cap {
            return Err(Error::arg(format!(
                "(L, N) = ({l}, {n}) outside the table 0..={} x 1..={}",
                self.l_cap, self.n_max
            )));
        }
        Ok(())
    }

    /// `S(L, N) = log2 Theta(L, N)`.
    pub fn entropy(&self, l: i64, n: u64, prec: u32) -> Result<Interval> {
        self.check_range(l, n)?;
        let th = self.theta(l, n);
        if th.is_zero() {
            return Err(Error::domain(format!("Theta({l}, {n}) = 0")));
        }
        log2(&Interval::from_biguint(&th, prec + 16), prec + 16).map(|x| x.with_precision(prec))
    }

    /// SHA-256 over every stored count, first 16 hex digits.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("N={} L={} dL={};", self.n_max, self.l_cap, self.delta_l));
        for row in &self.exact {
            for v in row {
                h.update(v.to_str_radix(16));
                h.update(b",");
            }
            h.update(b";");
        }
        hex::encode(h.finalize())[..16].to_string()
    }
}

/// Entropy and temperature of the microcanonical ensemble at `(L, N)`.
#[derive(Clone, Debug)]
pub struct MicroState {
    pub s: Interval,
    /// `1/T = [S(L+1, N) - S(L-1, N)] / 2`.
    pub inv_t: Interval,
    /// `None` when `1/T` is exactly zero (infinite temperature) or its
    /// enclosure straddles zero.
    pub t: Option<Interval>,
    pub infinite_t: bool,
}

pub fn micro_entropy_temperature(table: &EnsembleTable, l: i64, n: u64, prec: u32) -> Result<MicroState> {
    table.check_range(l, n)?;
    if l < 1 || l as u64 + 1 > table.l_cap {
        return Err(Error::domain(format!("L = {l} has no neighbours inside the table")));
    }
    let (a, b, c) = (table.theta(l - 1, n), table.theta(l, n), table.theta(l + 1, n));
    if a.is_zero() || b.is_zero() || c.is_zero() {
        return Err(Error::domain(format!(
            "Theta vanishes next to (L, N) = ({l}, {n}); temperature undefined at the boundary"
        )));
    }
    let wp = prec + 32;
    let s = table.entropy(l, n, wp)?;
    let (infinite_t, inv_t) = if a == c {
        (true, Interval::zero(wp))
    } else {
        let up = log2(&Interval::from_biguint(&c, wp), wp)?;
        let down = log2(&Interval::from_biguint(&a, wp), wp)?;
        (false, (&up - &down).mul_pow2(-1))
    };
    let t = if inv_t.contains_zero() { None } else { Some(inv_t.recip()?.with_precision(prec)) };
    Ok(MicroState { s: s.with_precision(prec), inv_t: inv_t.with_precision(prec), t, infinite_t })
}

/// Exact law of the first codeword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstCodeword {
    /// `c_l Theta(L - l, N - 1) / Theta(L, N)` per length.
    pub mass: BTreeMap<u64, BigRational>,
    /// `R(p)` for each single codeword of length `l`.
    pub per_codeword: BTreeMap<u64, BigRational>,
}

pub fn first_codeword_distribution(table: &EnsembleTable, l: i64, n: u64) -> Result<FirstCodeword> {
    table.check_range(l, n)?;
    if n < 2 {
        return Err(Error::arg("the first-codeword law needs N >= 2"));
    }
    let total = table.theta(l, n);
    if total.is_zero() {
        return Err(Error::domain(format!("Theta({l}, {n}) = 0")));
    }
    let mut mass = BTreeMap::new();
    let mut per_codeword = BTreeMap::new();
    for (len, c) in table.spectrum.iter() {
        let rest = table.theta(l - len as i64, n - 1);
        if rest.is_zero() {
            continue;
        }
        let r = BigRational::new(rest.into(), total.clone().into());
        mass.insert(len, &r * BigRational::from_integer(c.clone().into()));
        per_codeword.insert(len, r);
    }
    Ok(FirstCodeword { mass, per_codeword })
}

/// `E(L, N) = sum_p |p| R(p)`.
pub fn expected_first_length(fc: &FirstCodeword) -> BigRational {
    fc.mass
        .iter()
        .map(|(l, m)| m * BigRational::from_integer((*l).into()))
        .sum()
}

/// `log2 Theta(x, n)` for real `x`, linear between integer neighbours.
pub(crate) fn interpolated_entropy(table: &EnsembleTable, x: &BigRational, n: u64, prec: u32) -> Result<Interval> {
    let fl = x.floor().to_integer().to_i64().ok_or_else(|| Error::domain("length out of range"))?;
    let frac = x - BigRational::from_integer(fl.into());
    let s0 = table.entropy(fl, n, prec)?;
    if frac.is_zero() {
        return Ok(s0);
    }
    let s1 = table.entropy(fl + 1, n, prec)?;
    let f = Interval::from_rational(&frac, prec);
    Ok(&s0 + &(&(&s1 - &s0) * &f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn dyadic2() -> Spectrum {
        Spectrum::from_counts(&[(1, 1), (2, 1)]).unwrap()
    }

    #[test]
    fn theta_examples() {
        let t = build_theta(&dyadic2(), 3, 8, 0).unwrap();
        assert_eq!(t.theta(4, 3), BigUint::from(3u32));
        assert_eq!(t.theta(3, 3), BigUint::from(1u32));
        assert_eq!(t.theta(5, 3), BigUint::from(3u32));
        assert_eq!(t.theta(2, 3), BigUint::zero());
        assert_eq!(t.theta(7, 3), BigUint::zero());
        let s = Spectrum::from_counts(&[(3, 5), (5, 2)]).unwrap();
        let t = build_theta(&s, 2, 10, 0).unwrap();
        assert_eq!(t.theta(3, 1), BigUint::from(5u32));
        let w = build_theta(&s, 2, 10, 2).unwrap();
        assert_eq!(w.theta(3, 1), BigUint::from(7u32));
    }

    #[test]
    fn build_preconditions() {
        assert!(build_theta(&dyadic2(), 5, 4, 0).is_err());
        assert!(matches!(build_theta(&dyadic2(), 1 << 20, 1 << 22, 0), Err(Error::ResourceLimit(_))));
        assert!(Spectrum::from_counts(&[(1, 2), (2, 1)]).is_err());
        assert!(Spectrum::from_counts(&[]).is_err());
    }

    #[test]
    fn micro_examples() {
        let t = build_theta(&dyadic2(), 3, 8, 0).unwrap();
        let m = micro_entropy_temperature(&t, 4, 3, 96).unwrap();
        // log2 3 = 1.5849625007211561815
        assert!((m.s.midpoint_f64() - 3f64.log2()).abs() < 1e-15);
        assert!((m.inv_t.midpoint_f64() - 3f64.log2() / 2.0).abs() < 1e-15);
        assert!((m.t.unwrap().midpoint_f64() - 2.0 / 3f64.log2()).abs() < 1e-14);
        assert!(micro_entropy_temperature(&t, 3, 3, 64).is_err());
        // Theta(3,2) = 2 sits between Theta(2,2) = 1 and Theta(4,2) = 1.
        let m = micro_entropy_temperature(&t, 3, 2, 64).unwrap();
        assert!(m.infinite_t && m.t.is_none());
    }

    #[test]
    fn first_codeword_examples() {
        let t = build_theta(&dyadic2(), 3, 8, 0).unwrap();
        let fc = first_codeword_distribution(&t, 4, 3).unwrap();
        assert_eq!(fc.mass[&1], q(2, 3));
        assert_eq!(fc.mass[&2], q(1, 3));
        assert_eq!(expected_first_length(&fc), q(4, 3));
        let forced = first_codeword_distribution(&t, 3, 3).unwrap();
        assert_eq!(forced.mass.len(), 1);
        assert_eq!(forced.mass[&1], q(1, 1));
        assert!(first_codeword_distribution(&t, 4, 1).is_err());
    }
}
