//! Inverting the partition function of a table machine.

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{spectrum_state, tail_bound};
use crate::error::{Error, Result};
use crate::machine::{Machine, TableMachine};
use crate::numeric::{Dyadic, Interval};

/// Largest spectrum cutoff used when tightening an infinite-spectrum Z.
const MAX_CUTOFF: u64 = 4096;
const KRAFT_CUTOFF: u64 = 512;

#[derive(Clone, Debug)]
pub struct TempSolution {
    /// Temperatures at which `Z` takes the target value lie in here.
    pub t: Interval,
    /// `Z` over the whole of `t`.
    pub z: Interval,
    pub iterations: u32,
}

/// Two-sided enclosure of `Z(T)` for a table machine: exact summation for
/// finite spectra, partial sum plus tail bound otherwise (`T < 1`), with the
/// cutoff doubled until the tail is below `2^-prec`.
pub fn z_certified(tm: &TableMachine, t: &BigRational, prec: u32) -> Result<Interval> {
    let zero = BigRational::from_integer(0.into());
    if let Some(max) = tm.max_length() {
        return Ok(spectrum_state(tm, "", t, &[], max, prec)?.z());
    }
    if t == &BigRational::one() {
        return kraft_enclosure(tm, prec);
    }
    let target = Dyadic::pow2(-(prec as i64));
    let mut cutoff = 64;
    loop {
        let tail = tail_bound(tm, t, &zero, cutoff, prec)?;
        if tail.hi() <= &target || cutoff >= MAX_CUTOFF {
            let part = spectrum_state(tm, "", t, &[], cutoff, prec)?.z();
            return Ok(&part + &tail);
        }
        cutoff *= 2;
    }
}

/// `Z(1)`, the Kraft mass, as an enclosure.
fn kraft_enclosure(tm: &TableMachine, prec: u32) -> Result<Interval> {
    let cut = tm.max_length().unwrap_or(KRAFT_CUTOFF);
    let part = tm.kraft_partial(cut);
    let tail = tm
        .rule()
        .kraft_tail_bound(cut)
        .ok_or_else(|| Error::Unsolvable("no bound on the Kraft tail".into()))?;
    let hi = &part + &tail;
    Interval::new(part.round(prec, crate::numeric::Round::Down), hi.round(prec, crate::numeric::Round::Up), prec)
}

fn below(z: &Interval, q: &BigRational) -> bool {
    &z.hi().to_rational() < q
}

fn above(z: &Interval, q: &BigRational) -> bool {
    &z.lo().to_rational() > q
}

/// Find `T` in `(0, 1)` with `Z(T) = q` by bisection, to a width of
/// `2^-ceil(prec/2)`. `q` must lie strictly between 0 and `Z(1-)`.
pub fn solve_temperature(machine: &Machine, q: &BigRational, prec: u32) -> Result<TempSolution> {
    let tm = machine.require_table()?;
    if prec < 8 {
        return Err(Error::arg(format!("precision must be at least 8 bits, got {prec}")));
    }
    if !q.is_positive() {
        return Err(Error::Unsolvable(format!("target {q} is not positive")));
    }
    let z1 = kraft_enclosure(tm, prec + 32)?;
    if !above(&z1, q) {
        return Err(Error::Unsolvable(format!(
            "target {q} is not certifiably below Z(1-) in {z1}"
        )));
    }
    let half = prec.div_ceil(2) as i64;
    let stop = Dyadic::pow2(-half);
    let (mut lo, mut hi) = (Dyadic::zero(), Dyadic::one());
    let mut iterations = 0;
    let zt = |d: &Dyadic| z_certified(tm, &d.to_rational(), prec);
    while &hi - &lo > stop {
        iterations += 1;
        let mid = (&lo + &hi).mul_pow2(-1);
        let z = zt(&mid)?;
        if z.is_point() && &z.lo().to_rational() == q {
            return Ok(TempSolution { t: Interval::point(mid, prec), z, iterations });
        }
        if below(&z, q) {
            lo = mid;
        } else if above(&z, q) {
            hi = mid;
        } else {
            // Z(mid) straddles q: certify a small bracket around mid instead.
            let eps = Dyadic::pow2(-half - 1);
            let (a, b) = (&mid - &eps, &mid + &eps);
            let (za, zb) = (zt(&a)?, zt(&b)?);
            if below(&za, q) && above(&zb, q) {
                let z = Interval::new(za.lo().clone(), zb.hi().clone(), prec)?;
                return Ok(TempSolution { t: Interval::new(a, b, prec)?, z, iterations });
            }
            return Err(Error::Unsolvable(format!("cannot separate Z(T) from {q} near T = {mid}")));
        }
    }
    let z_lo = if lo.is_zero() { Dyadic::zero() } else { zt(&lo)?.lo().clone() };
    let z_hi = if hi == Dyadic::one() { z1.hi().clone() } else { zt(&hi)?.hi().clone() };
    Ok(TempSolution { t: Interval::new(lo, hi, prec)?, z: Interval::new(z_lo, z_hi, prec)?, iterations })
}
