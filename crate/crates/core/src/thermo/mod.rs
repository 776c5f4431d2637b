//! Partition function and its derived quantities.
//!
//! For a set of halting programs `q_1..q_n` at temperature `T`:
//!
//! * `Z_n = sum 2^(-|q|/T)`
//! * `F_n = -T log2 Z_n`
//! * `E_n = W1_n / Z_n` with `W1_n = sum |q| 2^(-|q|/T)`
//! * `S_n = E_n / T + log2 Z_n`
//! * `C_n = (ln 2 / T^2) (W2_n / Z_n - (W1_n / Z_n)^2)` with `W2_n = sum |q|^2 2^(-|q|/T)`
//! * `W(Q, T)_n = sum |q|^Q 2^(-|q|/T)`
//!
//! Everything is an outward-rounded [`Interval`]. Units use `k = 1/ln 2`,
//! which is why logarithms are base two.

mod probe;
mod solve;
mod sweep;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enumerate::HaltRecord;
use crate::error::{Error, Result};
use crate::machine::{Majorant, TableMachine};
use crate::numeric::{exp2_rational, ln2, log2, pow, pow2_frac, Interval};

pub use probe::{divergence_probe, shannon_partial, ProbeReport, ProbeRow, ShannonReport, Weight, Weighting};
pub use solve::{solve_temperature, z_certified, TempSolution};
pub use sweep::{interval_json, sweep, sweep_csv, thermo_row, Source, SweepConfig, SweepRow, ThermoRow, CSV_HEADER};

/// Extra bits carried by accumulators beyond the requested precision.
const ACC_GUARD: u32 = 32;

#[derive(Clone, Debug)]
struct LengthTerms {
    w: Interval,
    lw: Interval,
    l2w: Interval,
    lqw: Vec<Interval>,
}

/// Running sums `Z_n`, `W1_n`, `W2_n` and `W(Q)_n` over consumed programs.
#[derive(Clone, Debug)]
pub struct SeriesState {
    machine_id: String,
    t: BigRational,
    qs: Vec<BigRational>,
    prec: u32,
    n: BigUint,
    z: Interval,
    w1: Interval,
    w2: Interval,
    wq: Vec<Interval>,
    cache: HashMap<u64, LengthTerms>,
}

impl SeriesState {
    pub fn new(machine_id: &str, t: BigRational, qs: Vec<BigRational>, prec: u32) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::domain(format!("temperature must be positive, got {t}")));
        }
        if qs.iter().any(|q| q.is_negative()) {
            return Err(Error::arg("moment orders must be nonnegative"));
        }
        if prec < 8 {
            return Err(Error::arg(format!("precision must be at least 8 bits, got {prec}")));
        }
        let wp = prec + ACC_GUARD;
        Ok(SeriesState {
            machine_id: machine_id.to_string(),
            t,
            prec,
            n: BigUint::zero(),
            z: Interval::zero(wp),
            w1: Interval::zero(wp),
            w2: Interval::zero(wp),
            wq: vec![Interval::zero(wp); qs.len()],
            qs,
            cache: HashMap::new(),
        })
    }

    fn wp(&self) -> u32 {
        self.prec + ACC_GUARD
    }

    fn terms(&mut self, l: u64) -> Result<LengthTerms> {
        if let Some(t) = self.cache.get(&l) {
            return Ok(t.clone());
        }
        let wp = self.wp();
        let w = pow2_frac(l, &self.t, wp)?;
        let li = Interval::from_int(l, wp);
        let lw = &li * &w;
        let l2w = &li * &lw;
        let lqw = self
            .qs
            .iter()
            .map(|q| Ok(&length_power(l, q, wp)? * &w))
            .collect::<Result<Vec<_>>>()?;
        let t = LengthTerms { w, lw, l2w, lqw };
        self.cache.insert(l, t.clone());
        Ok(t)
    }

    /// Add the next enumerated program; its index must be `n + 1`.
    pub fn accumulate(&mut self, rec: &HaltRecord) -> Result<()> {
        let expected = (&self.n + 1u32).to_u64().unwrap_or(u64::MAX);
        if rec.index != expected {
            return Err(Error::IndexGap { expected, got: rec.index });
        }
        self.add_length(rec.program.len() as u64, &BigUint::one())
    }

    /// Add `count` programs of length `l` at once.
    pub fn add_length(&mut self, l: u64, count: &BigUint) -> Result<()> {
        if count.is_zero() {
            return Ok(());
        }
        let t = self.terms(l)?;
        let wp = self.wp();
        let k = Interval::from_biguint(count, wp);
        self.z = &self.z + &(&t.w * &k);
        self.w1 = &self.w1 + &(&t.lw * &k);
        self.w2 = &self.w2 + &(&t.l2w * &k);
        for (acc, term) in self.wq.iter_mut().zip(&t.lqw) {
            *acc = &*acc + &(term * &k);
        }
        self.n += count;
        Ok(())
    }

    pub fn machine_id(&self) -> &str {
        &self.machine_id
    }

    pub fn temperature(&self) -> &BigRational {
        &self.t
    }

    pub fn moment_orders(&self) -> &[BigRational] {
        &self.qs
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn z(&self) -> Interval {
        self.z.with_precision(self.prec)
    }

    pub fn w1(&self) -> Interval {
        self.w1.with_precision(self.prec)
    }

    pub fn w2(&self) -> Interval {
        self.w2.with_precision(self.prec)
    }

    /// `W(Q)_n` for the `i`-th moment order.
    pub fn wq(&self, i: usize) -> Interval {
        self.wq[i].with_precision(self.prec)
    }

    pub fn sums(&self) -> Sums {
        Sums {
            z: self.z.clone(),
            w1: self.w1.clone(),
            w2: self.w2.clone(),
            wq: self.wq.clone(),
        }
    }

    /// F, E, S, C of the partial sums.
    pub fn quantities(&self) -> Result<Quantities> {
        self.sums().quantities(&self.t, self.prec)
    }
}

/// `l^q` for an integer length and rational order.
fn length_power(l: u64, q: &BigRational, prec: u32) -> Result<Interval> {
    if q.is_zero() {
        return Ok(Interval::one(prec));
    }
    pow(&Interval::from_int(l, prec), q, prec)
}

/// Accumulator values, before or after adding tails.
#[derive(Clone, Debug)]
pub struct Sums {
    pub z: Interval,
    pub w1: Interval,
    pub w2: Interval,
    pub wq: Vec<Interval>,
}

#[derive(Clone, Debug)]
pub struct Quantities {
    pub z: Interval,
    pub f: Interval,
    pub e: Interval,
    pub s: Interval,
    pub c: Interval,
}

impl Sums {
    pub fn quantities(&self, t: &BigRational, prec: u32) -> Result<Quantities> {
        let wp = prec + ACC_GUARD;
        let f = free_energy(&self.z, t, wp)?;
        let e = energy(&self.w1, &self.z)?;
        let s = entropy(&e, &self.z, t, wp)?;
        let c = specific_heat(&self.w2, &self.w1, &self.z, t, wp)?;
        let r = |x: Interval| x.with_precision(prec);
        Ok(Quantities { z: r(self.z.clone()), f: r(f), e: r(e), s: r(s), c: r(c) })
    }

    /// Add `[0, tail]` bounds to every sum.
    pub fn with_tails(&self, tails: &Sums) -> Sums {
        Sums {
            z: &self.z + &tails.z,
            w1: &self.w1 + &tails.w1,
            w2: &self.w2 + &tails.w2,
            wq: self.wq.iter().zip(&tails.wq).map(|(a, b)| a + b).collect(),
        }
    }
}

fn check_z(z: &Interval) -> Result<()> {
    if z.is_strictly_positive() {
        Ok(())
    } else {
        Err(Error::domain("Z interval must be strictly positive"))
    }
}

/// `-T log2 Z`.
pub fn free_energy(z: &Interval, t: &BigRational, prec: u32) -> Result<Interval> {
    check_z(z)?;
    let wp = prec.max(z.precision());
    let l = log2(z, wp)?;
    Ok(-&(&l * &Interval::from_rational(t, wp)))
}

/// `W1 / Z`.
pub fn energy(w1: &Interval, z: &Interval) -> Result<Interval> {
    check_z(z)?;
    w1.div(z)
}

/// `E / T + log2 Z`.
pub fn entropy(e: &Interval, z: &Interval, t: &BigRational, prec: u32) -> Result<Interval> {
    check_z(z)?;
    let wp = prec.max(z.precision());
    let inv_t = Interval::from_rational(&t.recip(), wp);
    Ok(&(e * &inv_t) + &log2(z, wp)?)
}

/// `(ln 2 / T^2) (W2/Z - (W1/Z)^2)`.
pub fn specific_heat(w2: &Interval, w1: &Interval, z: &Interval, t: &BigRational, prec: u32) -> Result<Interval> {
    check_z(z)?;
    let wp = prec.max(z.precision());
    let e = w1.div(z)?;
    let var = &w2.div(z)? - &e.sqr();
    let k = &ln2(wp) * &Interval::from_rational(&(t * t).recip(), wp);
    Ok(&k * &var)
}

/// `[0, b]` containing `sum_{l > l_cut} c_l l^q 2^(-l/T)`.
///
/// Finite spectra are summed directly and work at any temperature. Infinite
/// spectra need `T < 1`; the tail is dominated by a geometric series through
/// the ratio bound `((L+2)/(L+1))^q 2^(beta - 1/T)` of the spectrum's
/// majorant (`c_l <= 2^(beta l)`, or `c_l <= 2^l/(l+1)^2` with `beta = 1`).
pub fn tail_bound(tm: &TableMachine, t: &BigRational, q: &BigRational, l_cut: u64, prec: u32) -> Result<Interval> {
    if !t.is_positive() {
        return Err(Error::domain(format!("temperature must be positive, got {t}")));
    }
    if q.is_negative() {
        return Err(Error::arg("moment order must be nonnegative"));
    }
    let wp = prec + ACC_GUARD;
    let beta = match tm.rule().majorant() {
        Majorant::Finite { max_len } => {
            let mut acc = Interval::zero(wp);
            for l in l_cut + 1..=max_len {
                let c = tm.spectrum_count(l);
                if c.is_zero() {
                    continue;
                }
                let term = &(&length_power(l, q, wp)? * &pow2_frac(l, t, wp)?) * &Interval::from_biguint(&c, wp);
                acc = &acc + &term;
            }
            return Ok(Interval::upto(acc.hi().clone(), prec));
        }
        Majorant::Geometric { beta } => beta,
        Majorant::Harmonic => BigRational::one(),
    };
    if t >= &BigRational::one() {
        return Err(Error::DivergentTail(format!("no tail bound at T = {t} >= 1 for an infinite spectrum")));
    }
    let l1 = l_cut + 1;
    let growth = BigRational::new((l1 + 1).into(), l1.into());
    let decay = &beta - t.recip();
    let rho = &length_power_rational(&growth, q, wp)? * &exp2_rational(&decay, wp);
    if rho.hi() >= &crate::numeric::Dyadic::one() {
        return Err(Error::DivergentTail(format!(
            "majorant ratio is not below 1 at cutoff {l_cut}, T = {t}, Q = {q}"
        )));
    }
    // First omitted majorant term at length L+1.
    let exponent = BigRational::from_integer(l1.into()) * &decay;
    let mut first = &exp2_rational(&exponent, wp) * &length_power(l1, q, wp)?;
    if matches!(tm.rule().majorant(), Majorant::Harmonic) {
        first = first.div(&Interval::from_int((l1 + 1) * (l1 + 1), wp))?;
    }
    let bound = first.div(&(&Interval::one(wp) - &rho))?;
    Ok(Interval::upto(bound.hi().clone(), prec))
}

fn length_power_rational(x: &BigRational, q: &BigRational, prec: u32) -> Result<Interval> {
    if q.is_zero() {
        return Ok(Interval::one(prec));
    }
    pow(&Interval::from_rational(x, prec), q, prec)
}

/// Partial sums over the spectrum of a table machine for lengths `1..=cutoff`.
pub fn spectrum_state(tm: &TableMachine, id: &str, t: &BigRational, qs: &[BigRational], cutoff: u64, prec: u32) -> Result<SeriesState> {
    let mut st = SeriesState::new(id, t.clone(), qs.to_vec(), prec)?;
    let last = tm.max_length().map_or(cutoff, |m| m.min(cutoff));
    for l in 1..=last {
        let c = tm.spectrum_count(l);
        st.add_length(l, &c)?;
    }
    Ok(st)
}

/// Tail bounds for `Z`, `W1`, `W2` and each `W(Q)` beyond `cutoff`.
pub fn tail_sums(tm: &TableMachine, t: &BigRational, qs: &[BigRational], cutoff: u64, prec: u32) -> Result<Sums> {
    let wp = prec + ACC_GUARD;
    let tb = |q: &BigRational| tail_bound(tm, t, q, cutoff, wp);
    Ok(Sums {
        z: tb(&BigRational::zero())?,
        w1: tb(&BigRational::one())?,
        w2: tb(&BigRational::from_integer(2.into()))?,
        wq: qs.iter().map(tb).collect::<Result<_>>()?,
    })
}

/// Certified enclosures of the limits `Z, W1, W2, W(Q)` for a table
/// machine: partial sums to `cutoff` plus tail bounds.
pub fn two_sided(tm: &TableMachine, id: &str, t: &BigRational, qs: &[BigRational], cutoff: u64, prec: u32) -> Result<(SeriesState, Sums)> {
    let st = spectrum_state(tm, id, t, qs, cutoff, prec)?;
    let tails = tail_sums(tm, t, qs, cutoff, prec)?;
    let sums = st.sums().with_tails(&tails);
    Ok((st, sums))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Machine;
    use crate::numeric::Dyadic;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn dy(x: f64) -> Dyadic {
        Dyadic::from_f64(x).unwrap()
    }

    fn dyadic2_state(t: BigRational) -> SeriesState {
        let m = Machine::builtin("dyadic2").unwrap();
        let recs = crate::enumerate::dovetail(&m, 2, Default::default()).unwrap();
        let mut st = SeriesState::new(m.id(), t, vec![q(1, 1)], 128).unwrap();
        for r in &recs {
            st.accumulate(r).unwrap();
        }
        st
    }

    #[test]
    fn accumulate_examples() {
        let st = dyadic2_state(q(1, 2));
        assert!(st.z().is_point() && st.z().lo() == &dy(0.3125));
        assert!(st.wq(0).is_point() && st.wq(0).lo() == &dy(0.375));
        let e = SeriesState::new("x", q(1, 2), vec![], 64).unwrap();
        assert!(e.z().is_point() && e.z().lo().is_zero());
    }

    #[test]
    fn index_gap_is_rejected() {
        let m = Machine::builtin("dyadic2").unwrap();
        let recs = crate::enumerate::dovetail(&m, 2, Default::default()).unwrap();
        let mut st = SeriesState::new(m.id(), q(1, 2), vec![], 64).unwrap();
        assert!(matches!(st.accumulate(&recs[1]), Err(Error::IndexGap { .. })));
    }

    #[test]
    fn free_energy_examples() {
        let p = |x: f64| Interval::point(dy(x), 128);
        let f = free_energy(&p(0.25), &q(1, 1), 128).unwrap();
        assert!(f.is_point() && f.lo() == &dy(2.0));
        let f = free_energy(&p(0.5), &q(1, 2), 128).unwrap();
        assert!(f.is_point() && f.lo() == &dy(0.5));
        assert!(free_energy(&Interval::zero(64), &q(1, 1), 64).is_err());
    }

    #[test]
    fn energy_examples() {
        let st = dyadic2_state(q(1, 1));
        let e = energy(&st.w1(), &st.z()).unwrap();
        assert!(e.contains_rational(&q(4, 3)));
        let st = dyadic2_state(q(1, 2));
        let e = energy(&st.w1(), &st.z()).unwrap();
        assert!(e.contains_rational(&q(6, 5)));
        let mut one = SeriesState::new("x", q(2, 3), vec![], 64).unwrap();
        one.add_length(7, &BigUint::one()).unwrap();
        let e = energy(&one.w1(), &one.z()).unwrap();
        assert!(e.contains(&dy(7.0)) && e.width_at_most_pow2(-55));
    }

    #[test]
    fn single_program_has_no_entropy_or_heat() {
        let mut one = SeriesState::new("x", q(1, 3), vec![], 128).unwrap();
        one.add_length(5, &BigUint::one()).unwrap();
        let qn = one.quantities().unwrap();
        assert!(qn.s.contains(&Dyadic::zero()) && qn.s.width_at_most_pow2(-110));
        assert!(qn.c.contains(&Dyadic::zero()) && qn.c.width_at_most_pow2(-110));
    }

    #[test]
    fn tail_examples() {
        let d = Machine::builtin("dyadic2").unwrap();
        let d = d.as_table().unwrap();
        for cut in [2, 3, 10] {
            let tb = tail_bound(d, &q(3, 4), &q(0, 1), cut, 64).unwrap();
            assert!(tb.is_point() && tb.lo().is_zero());
        }
        // Finite tails are allowed at any temperature.
        let tb = tail_bound(d, &q(5, 1), &q(1, 1), 1, 64).unwrap();
        assert!(tb.hi() >= &dy(2.0 * 2f64.powf(-0.4)));

        let h = Machine::builtin("harmonic").unwrap();
        let h = h.as_table().unwrap();
        let tb = tail_bound(h, &q(1, 2), &q(0, 1), 20, 64).unwrap();
        assert!(tb.hi() <= &Dyadic::pow2(-20));
        assert!(matches!(tail_bound(h, &q(1, 1), &q(1, 1), 20, 64), Err(Error::DivergentTail(_))));
        assert!(matches!(tail_bound(h, &q(3, 2), &q(0, 1), 20, 64), Err(Error::DivergentTail(_))));
    }
}
