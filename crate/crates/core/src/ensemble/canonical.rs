//! Canonical law `c_l 2^(-l/T) / Z(T)` and its comparison with the exact
//! microcanonical first-codeword law.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::{
    build_theta, expected_first_length, first_codeword_distribution, interpolated_entropy, micro_entropy_temperature,
    EnsembleTable, Spectrum,
};
use crate::error::{Error, Result};
use crate::machine::Machine;
use crate::numeric::{exp2, format_rational, pow2_frac, Dyadic, Interval};
use crate::thermo::z_certified;

/// Per-length canonical masses at inverse temperature `inv_t` (any real,
/// including zero and negative values).
pub fn canonical_distribution(spectrum: &Spectrum, inv_t: &Interval, prec: u32) -> Result<BTreeMap<u64, Interval>> {
    let wp = prec + 32;
    let b = inv_t.with_precision(wp);
    let weights: Vec<(u64, Interval)> = spectrum
        .iter()
        .map(|(l, c)| {
            let arg = -&(&b * &Interval::from_int(l, wp));
            (l, exp2(&arg, wp).scale(c))
        })
        .collect();
    let z = weights.iter().fold(Interval::zero(wp), |a, (_, w)| &a + w);
    weights
        .into_iter()
        .map(|(l, w)| Ok((l, w.div(&z)?.with_precision(prec))))
        .collect()
}

/// Per-length canonical masses of a table machine at temperature `t`, for
/// lengths up to `max_len`. `Z` comes from [`z_certified`], so infinite
/// spectra need `T < 1`.
pub fn canonical_at(machine: &Machine, t: &BigRational, max_len: u64, prec: u32) -> Result<BTreeMap<u64, Interval>> {
    let tm = machine.require_table()?;
    if !t.is_positive() {
        return Err(Error::domain(format!("temperature must be positive, got {t}")));
    }
    if !tm.is_finite() && t >= &BigRational::one() {
        return Err(Error::DivergentTail(format!("Z({t}) is not finite for an infinite spectrum")));
    }
    let wp = prec + 32;
    let z = z_certified(tm, t, wp)?;
    let top = tm.max_length().map_or(max_len, |m| m.min(max_len));
    let mut out = BTreeMap::new();
    for l in 1..=top {
        let c = tm.spectrum_count(l);
        if c.is_zero() {
            continue;
        }
        out.insert(l, pow2_frac(l, t, wp)?.scale(&c).div(&z)?.with_precision(prec));
    }
    Ok(out)
}

fn mean_length(spectrum: &Spectrum, beta: &Dyadic, prec: u32) -> Result<Interval> {
    let masses = canonical_distribution(spectrum, &Interval::point(beta.clone(), prec), prec)?;
    Ok(masses
        .iter()
        .fold(Interval::zero(prec), |a, (l, m)| &a + &(m * &Interval::from_int(*l, prec))))
}

/// Inverse temperature `beta` with canonical mean length `E = target`.
///
/// `E(beta)` falls strictly from `l_max` to `l_min`, so `target` must lie
/// strictly between them. Negative `beta` (negative temperature) answers
/// targets above the uniform mean.
pub fn energy_matched_inverse_temperature(spectrum: &Spectrum, target: &BigRational, prec: u32) -> Result<Interval> {
    let (lmin, lmax) = (spectrum.l_min(), spectrum.l_max());
    let in_range = target > &BigRational::from_integer(lmin.into()) && target < &BigRational::from_integer(lmax.into());
    if !in_range {
        return Err(Error::Unsolvable(format!(
            "mean length {} is not strictly between l_min = {lmin} and l_max = {lmax}",
            format_rational(target)
        )));
    }
    let wp = prec + 16;
    let above = |b: &Dyadic| -> Result<bool> { Ok(mean_length(spectrum, b, wp)?.lo().to_rational() > *target) };
    let below = |b: &Dyadic| -> Result<bool> { Ok(mean_length(spectrum, b, wp)?.hi().to_rational() < *target) };
    let mut lo = -Dyadic::one();
    let mut hi = Dyadic::one();
    while !above(&lo)? {
        lo = lo.mul_pow2(1);
        if lo.abs() > Dyadic::pow2(40) {
            return Err(Error::Unsolvable("no bracket for the energy-matched temperature".into()));
        }
    }
    while !below(&hi)? {
        hi = hi.mul_pow2(1);
        if hi > Dyadic::pow2(40) {
            return Err(Error::Unsolvable("no bracket for the energy-matched temperature".into()));
        }
    }
    let stop = Dyadic::pow2(-(prec.div_ceil(2) as i64));
    // Lower end: last point certified to lie below the root.
    let (mut a, mut b) = (lo.clone(), hi.clone());
    while &b - &a > stop {
        let m = (&a + &b).mul_pow2(-1);
        if above(&m)? {
            a = m;
        } else {
            b = m;
        }
    }
    let root_lo = a;
    let (mut a, mut b) = (root_lo.clone(), hi);
    while &b - &a > stop {
        let m = (&a + &b).mul_pow2(-1);
        if below(&m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Interval::new(root_lo, b, prec)
}

fn abs(x: &Interval) -> Interval {
    if !x.lo().is_negative() {
        x.clone()
    } else if !x.hi().is_positive() {
        -x
    } else {
        let m = x.lo().abs().max(x.hi().abs());
        Interval::new(Dyadic::zero(), m, x.precision()).expect("ordered")
    }
}

fn max_interval(a: &Interval, b: &Interval) -> Interval {
    Interval::new(a.lo().clone().max(b.lo().clone()), a.hi().clone().max(b.hi().clone()), a.precision().max(b.precision()))
        .expect("ordered")
}

fn max_deviation(micro: &BTreeMap<u64, BigRational>, canon: &BTreeMap<u64, Interval>, prec: u32) -> Result<Interval> {
    let mut dev = Interval::zero(prec);
    for (l, c) in canon {
        let r = micro.get(l).cloned().unwrap_or_else(BigRational::zero);
        dev = max_interval(&dev, &abs(&(&Interval::from_rational(&r, prec) - c)));
    }
    for l in micro.keys() {
        if !canon.contains_key(l) {
            return Err(Error::domain(format!("length {l} missing from the canonical law")));
        }
    }
    Ok(dev)
}

/// Comparison of the microcanonical first-codeword law at `(L, N)` with
/// the canonical law.
#[derive(Clone, Debug)]
pub struct DeviationReport {
    pub l: u64,
    pub n: u64,
    pub delta_l: u64,
    pub theta: num_bigint::BigUint,
    pub s: Interval,
    /// Microcanonical `1/T(L, N)`.
    pub inv_t: Interval,
    pub t: Option<Interval>,
    pub infinite_t: bool,
    /// Exact per-length masses.
    pub micro: BTreeMap<u64, BigRational>,
    pub per_codeword: BTreeMap<u64, BigRational>,
    /// Canonical masses at `T(L, N)`.
    pub canonical: BTreeMap<u64, Interval>,
    pub max_deviation: Interval,
    /// `beta` with `E(1/beta) = L/N`.
    pub matched_inv_t: Interval,
    pub matched_canonical: BTreeMap<u64, Interval>,
    pub matched_deviation: Interval,
    /// `E(L, N) = sum_p |p| R(p)`.
    pub e: BigRational,
    /// `E(L, N) = L/N`; guaranteed by symmetry when `delta_L = 0`.
    pub e_equals_l_over_n: bool,
    /// `F(L, N) = E - T S(E, 1)`; absent at infinite temperature or when
    /// `Theta(., 1)` vanishes next to `E`.
    pub f: Option<Interval>,
}

/// Build the micro-vs-canonical comparison at `(L, N)`.
pub fn micro_canonical_deviation(table: &EnsembleTable, l: u64, n: u64, prec: u32) -> Result<DeviationReport> {
    let sp = table.spectrum();
    let ratio = BigRational::new(l.into(), n.max(1).into());
    let (lmin, lmax) = (sp.l_min(), sp.l_max());
    if ratio <= BigRational::from_integer(lmin.into()) || ratio >= BigRational::from_integer(lmax.into()) {
        return Err(Error::Unsolvable(format!(
            "L/N = {} must lie strictly between l_min = {lmin} and l_max = {lmax}",
            format_rational(&ratio)
        )));
    }
    let li = l as i64;
    let micro = micro_entropy_temperature(table, li, n, prec)?;
    let fc = first_codeword_distribution(table, li, n)?;
    let canonical = canonical_distribution(sp, &micro.inv_t, prec)?;
    let max_dev = max_deviation(&fc.mass, &canonical, prec)?;
    let matched_inv_t = energy_matched_inverse_temperature(sp, &ratio, prec)?;
    let matched_canonical = canonical_distribution(sp, &matched_inv_t, prec)?;
    let matched_deviation = max_deviation(&fc.mass, &matched_canonical, prec)?;
    let e = expected_first_length(&fc);
    let f = match &micro.t {
        Some(t) => match interpolated_entropy(table, &e, 1, prec) {
            Ok(s1) => Some(&Interval::from_rational(&e, prec) - &(t * &s1)),
            Err(Error::Domain(_)) => None,
            Err(err) => return Err(err),
        },
        None => None,
    };
    Ok(DeviationReport {
        l,
        n,
        delta_l: table.delta_l(),
        theta: table.theta(li, n),
        s: micro.s,
        inv_t: micro.inv_t,
        t: micro.t,
        infinite_t: micro.infinite_t,
        e_equals_l_over_n: e == ratio,
        e,
        micro: fc.mass,
        per_codeword: fc.per_codeword,
        canonical,
        max_deviation: max_dev,
        matched_inv_t,
        matched_canonical,
        matched_deviation,
        f,
    })
}

fn rational_map(m: &BTreeMap<u64, BigRational>) -> Value {
    Value::Object(m.iter().map(|(l, r)| (l.to_string(), json!(format_rational(r)))).collect())
}

fn interval_map(m: &BTreeMap<u64, Interval>) -> Value {
    use crate::thermo::interval_json;
    Value::Object(m.iter().map(|(l, x)| (l.to_string(), interval_json(x))).collect())
}

impl DeviationReport {
    pub fn to_json(&self) -> Value {
        use crate::thermo::interval_json;
        json!({
            "L": self.l,
            "N": self.n,
            "delta_L": self.delta_l,
            "theta": self.theta.to_string(),
            "S": interval_json(&self.s),
            "inv_T": interval_json(&self.inv_t),
            "T": self.t.as_ref().map(interval_json),
            "infinite_T": self.infinite_t,
            "R": rational_map(&self.micro),
            "R_per_codeword": rational_map(&self.per_codeword),
            "canonical": interval_map(&self.canonical),
            "max_deviation": interval_json(&self.max_deviation),
            "energy_matched": {
                "inv_T": interval_json(&self.matched_inv_t),
                "canonical": interval_map(&self.matched_canonical),
                "max_deviation": interval_json(&self.matched_deviation),
            },
            "E": format_rational(&self.e),
            "E_equals_L_over_N": self.e_equals_l_over_n,
            "F": self.f.as_ref().map(interval_json),
        })
    }
}

/// `|S(L, N) - S(E, 1) - S(L - E, N - 1)| / N` with `E = E(L, N)`, the
/// entropies at non-integer lengths interpolated linearly in `log2 Theta`.
pub fn additivity_residual(table: &EnsembleTable, l: u64, n: u64, prec: u32) -> Result<Interval> {
    let fc = first_codeword_distribution(table, l as i64, n)?;
    let e = expected_first_length(&fc);
    let whole = table.entropy(l as i64, n, prec)?;
    let first = interpolated_entropy(table, &e, 1, prec)?;
    let rest = interpolated_entropy(table, &(BigRational::from_integer(l.into()) - &e), n - 1, prec)?;
    let r = abs(&(&(&whole - &first) - &rest));
    r.div(&Interval::from_int(n, prec))
}

/// `S(L, N) / N` for each window width, and the largest relative spread
/// between them.
#[derive(Clone, Debug)]
pub struct Sensitivity {
    pub rows: Vec<(u64, Interval)>,
    pub relative_spread: f64,
}

pub fn delta_l_sensitivity(spectrum: &Spectrum, l: u64, n: u64, deltas: &[u64], prec: u32) -> Result<Sensitivity> {
    if deltas.is_empty() {
        return Err(Error::arg("no window widths given"));
    }
    let mut rows = Vec::new();
    for &d in deltas {
        let t = build_theta(spectrum, n, l, d)?;
        let s = t.entropy(l as i64, n, prec)?;
        rows.push((d, s.div(&Interval::from_int(n, prec))?));
    }
    let mids: Vec<f64> = rows.iter().map(|(_, s)| s.midpoint_f64()).collect();
    let max = mids.iter().cloned().fold(f64::MIN, f64::max);
    let min = mids.iter().cloned().fold(f64::MAX, f64::min);
    let relative_spread = if min > 0.0 { (max - min) / min } else { f64::INFINITY };
    Ok(Sensitivity { rows, relative_spread })
}
