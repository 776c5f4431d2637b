//! Temperature sweeps.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{spectrum_state, tail_sums, SeriesState};
use crate::enumerate::HaltRecord;
use crate::error::{Error, Result};
use crate::machine::Machine;
use crate::numeric::render::render_interval;
use crate::numeric::{format_rational, Interval};

pub const CSV_HEADER: &str = "T,n,Z_lo,Z_hi,F_lo,F_hi,E_lo,E_hi,S_lo,S_hi,C_lo,C_hi,tail_bounded";

/// Where the programs summed at each temperature come from.
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    /// Table machine spectrum up to a length cutoff.
    Spectrum { cutoff: u64 },
    /// Enumerated halting records, in index order.
    Records(&'a [HaltRecord]),
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub grid: Vec<BigRational>,
    /// Extra moment orders `Q` reported as `W(Q, T)`.
    pub qs: Vec<BigRational>,
    pub prec: u32,
}

#[derive(Clone, Debug)]
pub struct ThermoRow {
    pub t: BigRational,
    /// Number of programs summed.
    pub n: BigUint,
    /// Spectrum cutoff, when the source is a spectrum.
    pub cutoff: Option<u64>,
    pub z: Interval,
    pub f: Interval,
    pub e: Interval,
    pub s: Interval,
    pub c: Interval,
    pub w: Vec<(BigRational, Interval)>,
    /// Intervals enclose the limits, not just the partial sums.
    pub tail_bounded: bool,
}

#[derive(Debug)]
pub struct SweepRow {
    pub t: BigRational,
    pub result: Result<ThermoRow>,
}

fn records_state(machine: &Machine, recs: &[HaltRecord], t: &BigRational, qs: &[BigRational], prec: u32) -> Result<SeriesState> {
    let mut st = SeriesState::new(machine.id(), t.clone(), qs.to_vec(), prec)?;
    for r in recs {
        st.accumulate(r)?;
    }
    Ok(st)
}

/// One row of a sweep.
pub fn thermo_row(machine: &Machine, source: Source<'_>, t: &BigRational, qs: &[BigRational], prec: u32) -> Result<ThermoRow> {
    let (st, sums, tail_bounded, cutoff) = match source {
        Source::Spectrum { cutoff } => {
            let tm = machine.require_table()?;
            let st = spectrum_state(tm, machine.id(), t, qs, cutoff, prec)?;
            let tails = if tm.is_finite() || t < &BigRational::one() {
                match tail_sums(tm, t, qs, cutoff, prec) {
                    Ok(tails) => Some(tails),
                    Err(Error::DivergentTail(_)) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            match tails {
                Some(tails) => {
                    let sums = st.sums().with_tails(&tails);
                    (st, sums, true, Some(cutoff))
                }
                None => {
                    let sums = st.sums();
                    (st, sums, false, Some(cutoff))
                }
            }
        }
        Source::Records(recs) => {
            let st = records_state(machine, recs, t, qs, prec)?;
            let complete = match machine.as_table() {
                Some(tm) if tm.is_finite() => {
                    let total: BigUint = (1..=tm.max_length().unwrap()).map(|l| tm.spectrum_count(l)).sum();
                    &total == st.n()
                }
                _ => false,
            };
            let sums = st.sums();
            (st, sums, complete, None)
        }
    };
    let q = sums.quantities(t, prec)?;
    let w = qs
        .iter()
        .cloned()
        .zip(sums.wq.iter().map(|x| x.with_precision(prec)))
        .collect();
    Ok(ThermoRow {
        t: t.clone(),
        n: st.n().clone(),
        cutoff,
        z: q.z,
        f: q.f,
        e: q.e,
        s: q.s,
        c: q.c,
        w,
        tail_bounded,
    })
}

/// Evaluate every temperature of the grid in parallel. A failing row is
/// reported in place and does not stop the others.
pub fn sweep(machine: &Machine, source: Source<'_>, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.grid.is_empty() {
        return Err(Error::arg("empty temperature grid"));
    }
    if let Some(t) = cfg.grid.iter().find(|t| !t.is_positive()) {
        return Err(Error::domain(format!("temperature must be positive, got {t}")));
    }
    if matches!(source, Source::Spectrum { .. }) {
        machine.require_table()?;
    }
    Ok(cfg
        .grid
        .par_iter()
        .map(|t| SweepRow { t: t.clone(), result: thermo_row(machine, source, t, &cfg.qs, cfg.prec) })
        .collect())
}

fn cells(x: &Interval) -> String {
    let (lo, hi) = render_interval(x);
    format!("{lo},{hi}")
}

/// CSV with [`CSV_HEADER`]; failed rows keep their `T` and leave the rest
/// empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let t = format_rational(&row.t);
        match &row.result {
            Ok(r) => out.push_str(&format!(
                "{t},{},{},{},{},{},{},{}\n",
                r.n,
                cells(&r.z),
                cells(&r.f),
                cells(&r.e),
                cells(&r.s),
                cells(&r.c),
                r.tail_bounded
            )),
            Err(_) => out.push_str(&format!("{t},,,,,,,,,,,,\n")),
        }
    }
    out
}

pub fn interval_json(x: &Interval) -> Value {
    let (lo, hi) = render_interval(x);
    json!({ "lo": lo, "hi": hi })
}

impl ThermoRow {
    pub fn to_json(&self) -> Value {
        json!({
            "T": format_rational(&self.t),
            "n": self.n.to_string(),
            "cutoff": self.cutoff,
            "Z": interval_json(&self.z),
            "F": interval_json(&self.f),
            "E": interval_json(&self.e),
            "S": interval_json(&self.s),
            "C": interval_json(&self.c),
            "W": self.w.iter().map(|(q, x)| json!({ "Q": format_rational(q), "value": interval_json(x) })).collect::<Vec<_>>(),
            "tail_bounded": self.tail_bounded,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Dyadic;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn dyadic2_grid() {
        let m = Machine::builtin("dyadic2").unwrap();
        let cfg = SweepConfig { grid: vec![q(1, 4), q(1, 2), q(1, 1)], qs: vec![], prec: 128 };
        let rows = sweep(&m, Source::Spectrum { cutoff: 2 }, &cfg).unwrap();
        let z: Vec<Interval> = rows.iter().map(|r| r.result.as_ref().unwrap().z.clone()).collect();
        for (zi, v) in z.iter().zip([0.06640625, 0.3125, 0.75]) {
            assert!(zi.is_point() && zi.lo() == &Dyadic::from_f64(v).unwrap());
        }
        assert!(z[0].hi() < z[1].lo() && z[1].hi() < z[2].lo());
        assert!(rows.iter().all(|r| r.result.as_ref().unwrap().tail_bounded));
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("0.25,2,0.06640625,0.06640625,"));
    }

    #[test]
    fn harmonic_rows_flag_divergent_temperatures() {
        let m = Machine::builtin("harmonic").unwrap();
        let cfg = SweepConfig { grid: vec![q(1, 2), q(1, 1), q(3, 2)], qs: vec![q(1, 1)], prec: 96 };
        let rows = sweep(&m, Source::Spectrum { cutoff: 30 }, &cfg).unwrap();
        let flags: Vec<bool> = rows.iter().map(|r| r.result.as_ref().unwrap().tail_bounded).collect();
        assert_eq!(flags, [true, false, false]);
        let r0 = rows[0].result.as_ref().unwrap();
        assert!(r0.z.width_at_most_pow2(-28));
    }

    #[test]
    fn bad_rows_do_not_abort() {
        let m = Machine::builtin("sdvm").unwrap();
        let recs: Vec<HaltRecord> = Vec::new();
        let cfg = SweepConfig { grid: vec![q(1, 2), q(1, 4)], qs: vec![], prec: 64 };
        let rows = sweep(&m, Source::Records(&recs), &cfg).unwrap();
        assert!(rows.iter().all(|r| r.result.is_err()));
        assert!(sweep_csv(&rows).lines().nth(1).unwrap().starts_with("0.5,,"));
        assert!(sweep(&m, Source::Spectrum { cutoff: 4 }, &cfg).is_err());
        let bad = SweepConfig { grid: vec![q(0, 1)], qs: vec![], prec: 64 };
        assert!(sweep(&m, Source::Records(&recs), &bad).is_err());
    }
}
