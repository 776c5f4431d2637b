//! Program-size complexity `H_M(s)` and algorithmic probability `P_M(s)`
//! relative to a concrete machine `M`.
//!
//! Table machines are answered from the codeword assignment, which is exact.
//! Step machines are searched exhaustively over all complete programs up to a
//! length horizon with a fixed fuel; a minimum found that way is exact when
//! no shorter program ran out of fuel, and conditional on fuel otherwise.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{Bits, Program};
use crate::error::{Error, Result};
use crate::machine::{sdvm, Machine, MachineKind, OutputRule, RunResult, TableMachine};
use crate::numeric::Dyadic;

/// Default horizon cap, `2^24` programs.
pub const DEFAULT_BUDGET: u64 = 1 << 24;
pub const DEFAULT_L_MAX: u64 = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputInfo {
    pub min_length: u64,
    /// Lexicographically first program of minimum length.
    pub witness: Program,
    /// Exact `sum 2^-|p|` over discovered programs with this output.
    #[serde(serialize_with = "ser_dyadic")]
    pub probability: Dyadic,
    pub programs: u64,
}

fn ser_dyadic<S: serde::Serializer>(d: &Dyadic, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::numeric::render::exact_decimal(d))
}

/// Every output reached by programs up to `l_max` under `fuel`.
#[derive(Clone, Debug)]
pub struct SearchTable {
    pub l_max: u64,
    pub fuel: u64,
    pub outputs: BTreeMap<Bits, OutputInfo>,
    pub programs_run: u64,
    /// Shortest length at which some program ran out of fuel.
    pub shortest_exhausted: Option<u64>,
    /// The machine's whole domain lies within the horizon.
    pub domain_exhausted: bool,
}

fn check_budget(machine: &Machine, l_max: u64, budget: u64) -> Result<u64> {
    if l_max < 1 {
        return Err(Error::arg("l_max must be at least 1"));
    }
    let total: BigUint = (1..=l_max).map(|l| machine.count_programs(l)).sum();
    let over_pow = matches!(machine.kind(), MachineKind::Step) && (l_max >= 64 || (1u64 << l_max) > budget);
    match total.to_u64() {
        Some(t) if t <= budget && !over_pow => Ok(t),
        _ => Err(Error::ResourceLimit(format!(
            "search to length {l_max} exceeds the budget of {budget} programs"
        ))),
    }
}

impl SearchTable {
    pub fn build(machine: &Machine, l_max: u64, fuel: u64, budget: u64) -> Result<Self> {
        if fuel < 1 {
            return Err(Error::arg("fuel must be at least 1"));
        }
        check_budget(machine, l_max, budget)?;
        let mut outputs: BTreeMap<Bits, OutputInfo> = BTreeMap::new();
        let mut programs_run = 0;
        let mut shortest_exhausted = None;
        for l in 1..=l_max {
            let progs = machine.programs_of_length(l, budget)?;
            let results: Vec<RunResult> = progs.par_iter().map(|p| machine.run(p, fuel)).collect::<Result<_>>()?;
            programs_run += progs.len() as u64;
            let w = Dyadic::pow2(-(l as i64));
            for (p, r) in progs.into_iter().zip(results) {
                match r {
                    RunResult::Halted { output, .. } => {
                        outputs
                            .entry(output)
                            .and_modify(|o| {
                                o.probability = &o.probability + &w;
                                o.programs += 1;
                            })
                            .or_insert_with(|| OutputInfo {
                                min_length: l,
                                witness: p,
                                probability: w.clone(),
                                programs: 1,
                            });
                    }
                    RunResult::Exhausted { .. } => {
                        shortest_exhausted.get_or_insert(l);
                    }
                    RunResult::Malformed => {
                        return Err(Error::InvalidMachine(format!("enumerated program {p} is malformed")))
                    }
                }
            }
        }
        let domain_exhausted = machine.max_length().is_some_and(|m| m <= l_max);
        Ok(SearchTable { l_max, fuel, outputs, programs_run, shortest_exhausted, domain_exhausted })
    }

    pub fn complexity(&self, s: &Bits) -> Verdict {
        match self.outputs.get(s) {
            Some(o) => Verdict::Exact {
                length: o.min_length,
                witness: o.witness.clone(),
                unconditional: self.shortest_exhausted.is_none_or(|e| e >= o.min_length),
            },
            None => Verdict::LowerBound {
                at_least: self.l_max + 1,
                horizon: self.l_max,
                fuel: self.fuel,
                unreachable: self.domain_exhausted,
            },
        }
    }

    pub fn probability(&self, s: &Bits) -> Dyadic {
        self.outputs.get(s).map_or_else(Dyadic::zero, |o| o.probability.clone())
    }

    /// `sum_s P(s)` over discovered outputs.
    pub fn total_probability(&self) -> Dyadic {
        self.outputs.values().fold(Dyadic::zero(), |a, o| &a + &o.probability)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// `H(s) = length`; for step machines `unconditional` is false when some
    /// shorter program ran out of fuel.
    Exact { length: u64, witness: Program, unconditional: bool },
    /// No program up to `horizon` produced `s` under `fuel`. `unreachable`
    /// means the whole (finite) domain was searched.
    LowerBound { at_least: u64, horizon: u64, fuel: u64, unreachable: bool },
}

impl Verdict {
    pub fn exact_length(&self) -> Option<u64> {
        match self {
            Verdict::Exact { length, .. } => Some(*length),
            Verdict::LowerBound { .. } => None,
        }
    }

    pub fn lower(&self) -> u64 {
        match self {
            Verdict::Exact { length, .. } => *length,
            Verdict::LowerBound { at_least, .. } => *at_least,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexityResult {
    pub machine: String,
    pub s: Bits,
    pub verdict: Verdict,
}

/// Global canonical indices of codewords whose output is `s`, in increasing
/// order (at most one from the index rule plus matches in an explicit list).
fn table_producers(tm: &TableMachine, s: &Bits) -> Vec<BigUint> {
    let mut idx = Vec::new();
    let mut listed = 0usize;
    if let OutputRule::Explicit(list) = tm.output_rule() {
        listed = list.len();
        idx.extend(list.iter().enumerate().filter(|(_, o)| *o == s).map(|(i, _)| BigUint::from(i)));
    }
    // The index rule writes i in binary without leading zeros.
    let canonical = !s.is_empty() && (s.len() == 1 || s.as_slice()[0]);
    if canonical {
        let v = s.to_biguint();
        if v >= BigUint::from(listed) {
            idx.push(v);
        }
    }
    idx
}

/// Length of the codeword with global index `i`, if it is at most `l_max`.
fn codeword_length(tm: &TableMachine, i: &BigUint, l_max: u64) -> Option<u64> {
    let mut before = BigUint::zero();
    for l in 1..=l_max {
        before += tm.spectrum_count(l);
        if i < &before {
            return Some(l);
        }
    }
    None
}

fn codeword_at(tm: &TableMachine, i: &BigUint, l: u64) -> Program {
    let mut start = BigUint::zero();
    let mut before = BigUint::zero();
    for j in 1..l {
        let c = tm.spectrum_count(j);
        start = (start + &c) << 1u32;
        before += c;
    }
    Bits::from_biguint(&(start + (i - before)), l as usize)
}

/// `H_M(s)` over programs of length `<= l_max` with the given fuel.
pub fn program_size_complexity(machine: &Machine, s: &Bits, l_max: u64, fuel: u64, budget: u64) -> Result<ComplexityResult> {
    if l_max < 1 {
        return Err(Error::arg("l_max must be at least 1"));
    }
    if fuel < 1 {
        return Err(Error::arg("fuel must be at least 1"));
    }
    let verdict = match machine.kind() {
        MachineKind::Table(tm) => {
            let best = table_producers(tm, s)
                .into_iter()
                .filter_map(|i| codeword_length(tm, &i, l_max).map(|l| (l, i)))
                .min();
            match best {
                Some((length, i)) => Verdict::Exact { length, witness: codeword_at(tm, &i, length), unconditional: true },
                None => Verdict::LowerBound {
                    at_least: l_max + 1,
                    horizon: l_max,
                    fuel,
                    unreachable: tm.max_length().is_some_and(|m| m <= l_max),
                },
            }
        }
        MachineKind::Step => SearchTable::build(machine, l_max, fuel, budget)?.complexity(s),
    };
    Ok(ComplexityResult { machine: machine.id().to_string(), s: s.clone(), verdict })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbabilityResult {
    #[serde(serialize_with = "ser_dyadic")]
    pub value: Dyadic,
    /// The value is `P(s)` itself, not just a lower bound.
    pub exact: bool,
}

/// Lower bound `sum 2^-|p|` over discovered programs printing `s`.
pub fn algorithmic_probability(machine: &Machine, s: &Bits, l_max: u64, fuel: u64, budget: u64) -> Result<ProbabilityResult> {
    if l_max < 1 {
        return Err(Error::arg("l_max must be at least 1"));
    }
    match machine.kind() {
        MachineKind::Table(tm) => {
            let producers = table_producers(tm, s);
            let mut value = Dyadic::zero();
            let mut all = true;
            for i in &producers {
                match codeword_length(tm, i, l_max) {
                    Some(l) => value = &value + &Dyadic::pow2(-(l as i64)),
                    None => all = false,
                }
            }
            Ok(ProbabilityResult { value, exact: all })
        }
        MachineKind::Step => {
            let t = SearchTable::build(machine, l_max, fuel, budget)?;
            Ok(ProbabilityResult { value: t.probability(s), exact: false })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    pub verdict: Verdict,
    /// Lower end of `H(alpha_n)/n`.
    #[serde(serialize_with = "ser_rational")]
    pub ratio_lo: BigRational,
    /// Upper end, from a witness or from the literal program of the step VM.
    #[serde(serialize_with = "ser_opt_rational")]
    pub ratio_hi: Option<BigRational>,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::numeric::format_rational(r))
}

fn ser_opt_rational<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser_rational(r, s),
        None => s.serialize_none(),
    }
}

/// `H(alpha_n)/n` for each prefix length in `n_grid`.
pub fn compression_profile(
    machine: &Machine,
    alpha: &Bits,
    n_grid: &[usize],
    l_max: u64,
    fuel: u64,
    budget: u64,
) -> Result<Vec<ProfileRow>> {
    if let Some(n) = n_grid.iter().find(|&&n| n == 0 || n > alpha.len()) {
        return Err(Error::arg(format!("prefix length {n} outside 1..={}", alpha.len())));
    }
    let table = match machine.kind() {
        MachineKind::Step => Some(SearchTable::build(machine, l_max, fuel, budget)?),
        MachineKind::Table(_) => None,
    };
    n_grid
        .iter()
        .map(|&n| {
            let s = alpha.prefix(n);
            let verdict = match &table {
                Some(t) => t.complexity(&s),
                None => program_size_complexity(machine, &s, l_max, fuel, budget)?.verdict,
            };
            let nn = BigRational::from_integer(n.into());
            let ratio_lo = BigRational::from_integer(verdict.lower().into()) / &nn;
            let upper = match (&verdict, machine.kind()) {
                (Verdict::Exact { length, .. }, _) => Some(*length),
                (_, MachineKind::Step) if fuel > n as u64 => Some(sdvm::literal_program(&s).len() as u64),
                _ => None,
            };
            let ratio_hi = upper.map(|u| BigRational::from_integer(u.into()) / &nn);
            Ok(ProfileRow { n, verdict, ratio_lo, ratio_hi })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn dyadic2_complexity() {
        let m = Machine::builtin("dyadic2").unwrap();
        let r = program_size_complexity(&m, &b("1"), 14, 10, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.verdict.exact_length(), Some(2));
        let r = program_size_complexity(&m, &b("0110"), 2, 10, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::LowerBound { at_least: 3, horizon: 2, fuel: 10, unreachable: true }
        );
        let p = algorithmic_probability(&m, &b("0"), 4, 10, DEFAULT_BUDGET).unwrap();
        assert_eq!(p, ProbabilityResult { value: Dyadic::pow2(-1), exact: true });
    }

    #[test]
    fn two_programs_one_output() {
        let m = Machine::from_json(
            r#"{"kind":"table","rule":{"type":"explicit","counts":[[2,2]]},
                "output_rule":"explicit","outputs":["1","1"]}"#,
        )
        .unwrap();
        let p = algorithmic_probability(&m, &b("1"), 2, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.value, Dyadic::pow2(-1));
        let t = SearchTable::build(&m, 2, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.probability(&b("1")), Dyadic::pow2(-1));
        assert_eq!(t.outputs[&b("1")].witness, b("00"));
    }

    #[test]
    fn table_path_matches_search() {
        let m = Machine::builtin("harmonic").unwrap();
        let t = SearchTable::build(&m, 16, 1, DEFAULT_BUDGET).unwrap();
        for (s, info) in &t.outputs {
            let r = program_size_complexity(&m, s, 16, 1, DEFAULT_BUDGET).unwrap();
            assert_eq!(
                r.verdict,
                Verdict::Exact { length: info.min_length, witness: info.witness.clone(), unconditional: true }
            );
        }
    }

    #[test]
    fn budget_is_enforced() {
        let m = Machine::builtin("sdvm").unwrap();
        assert!(matches!(
            program_size_complexity(&m, &b("1"), 20, 10, 1 << 10),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn sdvm_literal_and_repeat() {
        let m = Machine::builtin("sdvm").unwrap();
        let t = SearchTable::build(&m, 14, 1 << 12, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.complexity(&Bits::new()).exact_length(), Some(3));
        let h = t.complexity(&b("0000000000")).lower();
        assert!(h <= 2 + 7 + 3 + 1);
        assert!(t.total_probability() <= Dyadic::one());
    }
}
