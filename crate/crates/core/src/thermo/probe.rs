//! Divergence probes and partial Shannon entropies.
//!
//! A probe cannot prove divergence. It reports monotone partial sums and the
//! first cutoff at which they certifiably pass a threshold.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::sweep::interval_json;
use super::SeriesState;
use crate::complexity::SearchTable;
use crate::enumerate::{Enumerator, Schedule};
use crate::error::Result;
use crate::machine::{Machine, MachineKind, OutputRule};
use crate::numeric::{log2, Dyadic, Interval};

/// Weight `f(l)` in `sum f(|p|) 2^(-|p|/T)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Weight {
    One,
    Len,
    LenSq,
    LenPow(BigRational),
}

impl Weight {
    pub fn order(&self) -> BigRational {
        match self {
            Weight::One => BigRational::zero(),
            Weight::Len => BigRational::one(),
            Weight::LenSq => BigRational::from_integer(2.into()),
            Weight::LenPow(q) => q.clone(),
        }
    }

    pub fn parse(s: &str) -> Result<Weight> {
        Ok(match s {
            "1" | "one" => Weight::One,
            "l" | "len" => Weight::Len,
            "l2" | "len2" | "l^2" => Weight::LenSq,
            other => {
                let q = other.strip_prefix("l^").unwrap_or(other);
                Weight::LenPow(crate::numeric::parse_rational(q)?)
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct ProbeRow {
    /// Length cutoff (table machines) or dovetail round (step machines).
    pub cutoff: u64,
    pub n: BigUint,
    /// `sum f(|p|) 2^(-|p|/T)` over programs so far.
    pub sum: Interval,
    pub z: Interval,
    /// `sum / z`; for `f(l) = l` this is the partial energy `E_n`.
    pub normalized: Option<Interval>,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub t: BigRational,
    pub weight: Weight,
    pub rows: Vec<ProbeRow>,
    /// The domain is finite and fully summed: the partial sums have stopped.
    pub saturated: bool,
}

impl ProbeReport {
    /// First cutoff whose partial sum certifiably exceeds `threshold`.
    pub fn first_exceeding(&self, threshold: &BigRational) -> Option<u64> {
        self.rows.iter().find(|r| &r.sum.lo().to_rational() > threshold).map(|r| r.cutoff)
    }

    /// First cutoff whose normalized sum certifiably exceeds `threshold`.
    pub fn first_normalized_exceeding(&self, threshold: &BigRational) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.normalized.as_ref().is_some_and(|x| &x.lo().to_rational() > threshold))
            .map(|r| r.cutoff)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "T": crate::numeric::format_rational(&self.t),
            "weight_order": crate::numeric::format_rational(&self.weight.order()),
            "saturated": self.saturated,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "cutoff": r.cutoff,
                "n": r.n.to_string(),
                "sum": interval_json(&r.sum),
                "Z": interval_json(&r.z),
                "normalized": r.normalized.as_ref().map(interval_json),
            })).collect::<Vec<_>>(),
        })
    }
}

fn row(st: &SeriesState, cutoff: u64) -> ProbeRow {
    let sum = st.wq(0);
    let z = st.z();
    let normalized = if z.is_strictly_positive() { sum.div(&z).ok() } else { None };
    ProbeRow { cutoff, n: st.n().clone(), sum, z, normalized }
}

/// Partial sums of `f(|p|) 2^(-|p|/T)` for cutoffs `1..=depth`: spectrum
/// lengths for table machines, dovetail rounds for step machines.
pub fn divergence_probe(machine: &Machine, t: &BigRational, weight: Weight, depth: u64, prec: u32) -> Result<ProbeReport> {
    let mut st = SeriesState::new(machine.id(), t.clone(), vec![weight.order()], prec)?;
    let mut rows = Vec::new();
    let saturated = match machine.kind() {
        MachineKind::Table(tm) => {
            for l in 1..=depth {
                st.add_length(l, &tm.spectrum_count(l))?;
                rows.push(row(&st, l));
            }
            tm.max_length().is_some_and(|m| m <= depth)
        }
        MachineKind::Step => {
            let mut en = Enumerator::new(machine, Schedule::default())?;
            for r in 1..=depth {
                for rec in en.step_round()? {
                    st.accumulate(rec)?;
                }
                rows.push(row(&st, r));
            }
            false
        }
    };
    Ok(ProbeReport { t: t.clone(), weight, rows, saturated })
}

/// How the mass of an output is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `P(s) = sum_{U(p) = s} 2^-|p|`.
    Probability,
    /// `2^-H(s)`.
    Complexity,
}

#[derive(Clone, Debug)]
pub struct ShannonReport {
    pub cutoff: u64,
    pub outputs: BigUint,
    /// `-sum m(s) log2 m(s)` over outputs discovered up to the cutoff.
    pub value: Interval,
}

/// `-sum m(s) log2 m(s)` over outputs of programs up to length `cutoff`.
///
/// Table machines with the index output rule have one program per output,
/// so the sum is `sum_l c_l l 2^-l`, exact. Other machines are searched
/// with `fuel` and outputs grouped.
pub fn shannon_partial(machine: &Machine, weighting: Weighting, cutoff: u64, fuel: u64, prec: u32) -> Result<ShannonReport> {
    if cutoff < 1 {
        return Err(crate::error::Error::arg("cutoff must be at least 1"));
    }
    if let MachineKind::Table(tm) = machine.kind() {
        if matches!(tm.output_rule(), OutputRule::Index) {
            let mut acc = Dyadic::zero();
            let mut outputs = BigUint::zero();
            for l in 1..=cutoff {
                let c = tm.spectrum_count(l);
                acc = &acc + &Dyadic::from_biguint(&(&c * l)).mul_pow2(-(l as i64));
                outputs += c;
            }
            return Ok(ShannonReport { cutoff, outputs, value: Interval::point(acc, prec) });
        }
    }
    let table = SearchTable::build(machine, cutoff, fuel, crate::complexity::DEFAULT_BUDGET)?;
    let wp = prec + 32;
    let mut acc = Interval::zero(wp);
    for info in table.outputs.values() {
        let m = match weighting {
            Weighting::Probability => Interval::point(info.probability.clone(), wp),
            Weighting::Complexity => Interval::point(Dyadic::pow2(-(info.min_length as i64)), wp),
        };
        let term = -&(&m * &log2(&m, wp)?);
        acc = &acc + &term;
    }
    Ok(ShannonReport { cutoff, outputs: BigUint::from(table.outputs.len()), value: acc.with_precision(prec) })
}
