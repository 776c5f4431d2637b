//! Prefix-free machines.
//!
//! Two substrates: [`TableMachine`]s, whose domain is fixed by a length
//! spectrum and a canonical codeword assignment (exact oracles for every
//! downstream quantity), and the step-executed [`sdvm`] whose domain is
//! only known through running programs under fuel.
//!
//! Every machine has an identity hash derived from its JSON spec; reports
//! are labeled with it because nothing here is a universal machine and all
//! numbers depend on the machine.

pub mod sdvm;
mod spec;
mod table;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::bits::{Bits, Program};
use crate::error::{Error, Result};

pub use spec::{builtin, builtin_names, MachineSpec, OutputRuleSpec, RuleSpec};
pub use table::{Majorant, OutputRule, SpectrumRule, TableMachine, KRAFT_CHECK_LEN};

/// Default cap on program length handled anywhere in the crate.
pub const MAX_PROGRAM_BITS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunResult {
    Halted { output: Bits, steps: u64 },
    Exhausted { fuel: u64 },
    Malformed,
}

impl RunResult {
    pub fn is_halted(&self) -> bool {
        matches!(self, RunResult::Halted { .. })
    }

    pub fn output(&self) -> Option<&Bits> {
        match self {
            RunResult::Halted { output, .. } => Some(output),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MachineKind {
    Table(TableMachine),
    Step,
}

/// A named prefix-free machine together with the spec it was built from.
#[derive(Clone, Debug)]
pub struct Machine {
    name: String,
    kind: MachineKind,
    spec: MachineSpec,
    id: String,
}

impl Machine {
    pub fn from_spec(spec: MachineSpec) -> Result<Self> {
        let id = spec.identity();
        let name = spec.name().to_string();
        let kind = spec.build_kind()?;
        Ok(Machine { name, kind, spec, id })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Machine::from_spec(serde_json::from_str(s)?)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        Machine::from_spec(builtin(name)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Short hex identity of the spec.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn spec(&self) -> &MachineSpec {
        &self.spec
    }

    pub fn kind(&self) -> &MachineKind {
        &self.kind
    }

    pub fn as_table(&self) -> Option<&TableMachine> {
        match &self.kind {
            MachineKind::Table(t) => Some(t),
            MachineKind::Step => None,
        }
    }

    pub fn require_table(&self) -> Result<&TableMachine> {
        self.as_table()
            .ok_or_else(|| Error::arg(format!("machine {} is not a table machine", self.name)))
    }

    /// Run `p` with at most `fuel` steps. Table machines halt in one step on
    /// their codewords; anything else is malformed.
    pub fn run(&self, p: &Program, fuel: u64) -> Result<RunResult> {
        if fuel < 1 {
            return Err(Error::arg("fuel must be at least 1"));
        }
        if p.len() > MAX_PROGRAM_BITS {
            return Ok(RunResult::Malformed);
        }
        Ok(match &self.kind {
            MachineKind::Table(t) => match t.lookup(p) {
                Some((_, index)) => RunResult::Halted { output: t.output_for_index(&index), steps: 1 },
                None => RunResult::Malformed,
            },
            MachineKind::Step => match sdvm::parse(p) {
                sdvm::Parse::Complete(parsed) => match sdvm::execute(&parsed, fuel) {
                    sdvm::Exec::Halted { output, steps } => RunResult::Halted { output, steps },
                    sdvm::Exec::Exhausted => RunResult::Exhausted { fuel },
                },
                _ => RunResult::Malformed,
            },
        })
    }

    /// Number of syntactically complete programs of length `l`.
    pub fn count_programs(&self, l: u64) -> BigUint {
        match &self.kind {
            MachineKind::Table(t) => t.spectrum_count(l),
            MachineKind::Step => BigUint::from(sdvm::count_complete(l)),
        }
    }

    /// Syntactically complete programs of length `l` in lexicographic order,
    /// refusing more than `limit` of them.
    pub fn programs_of_length(&self, l: u64, limit: u64) -> Result<Vec<Program>> {
        let n = self.count_programs(l);
        if n > BigUint::from(limit) {
            return Err(Error::ResourceLimit(format!(
                "{n} programs of length {l} exceed the limit of {limit}"
            )));
        }
        match &self.kind {
            MachineKind::Table(t) => t.codewords_of_length(l, limit),
            MachineKind::Step => {
                if l > 64 {
                    return Err(Error::ResourceLimit("program enumeration beyond 64 bits".into()));
                }
                Ok(sdvm::complete_programs(l))
            }
        }
    }

    /// Longest program length, when the domain is finite.
    pub fn max_length(&self) -> Option<u64> {
        self.as_table().and_then(|t| t.max_length())
    }

    pub fn program_count_upto(&self, l_max: u64) -> Option<u64> {
        (1..=l_max).map(|l| self.count_programs(l)).sum::<BigUint>().to_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn dyadic2_run() {
        let m = Machine::builtin("dyadic2").unwrap();
        assert_eq!(m.run(&b("0"), 10).unwrap(), RunResult::Halted { output: b("0"), steps: 1 });
        assert_eq!(m.run(&b("10"), 10).unwrap(), RunResult::Halted { output: b("1"), steps: 1 });
        assert_eq!(m.run(&b("11"), 10).unwrap(), RunResult::Malformed);
        assert_eq!(m.run(&b("1"), 10).unwrap(), RunResult::Malformed);
        assert!(m.run(&b("0"), 0).is_err());
    }

    #[test]
    fn sdvm_run_statuses() {
        let m = Machine::builtin("sdvm").unwrap();
        assert_eq!(m.run(&b("001"), 1).unwrap(), RunResult::Halted { output: Bits::new(), steps: 1 });
        assert_eq!(m.run(&b("11"), 5).unwrap(), RunResult::Malformed);
        let looping = sdvm::exec_program(&[0b011, 0b101]);
        assert_eq!(m.run(&looping, 50).unwrap(), RunResult::Exhausted { fuel: 50 });
    }

    #[test]
    fn monotone_fuel() {
        let m = Machine::builtin("sdvm").unwrap();
        for p in (1..=11).flat_map(|l| m.programs_of_length(l, 1 << 20).unwrap()) {
            let mut first: Option<RunResult> = None;
            for fuel in [1u64, 2, 4, 8, 16, 64, 256] {
                let r = m.run(&p, fuel).unwrap();
                if let RunResult::Halted { steps, .. } = &r {
                    assert!(*steps <= fuel);
                }
                match &first {
                    Some(h) => assert_eq!(&r, h, "{p}"),
                    None if r.is_halted() => first = Some(r),
                    None => {}
                }
            }
        }
    }

    #[test]
    fn identity_is_stable_and_distinct() {
        let a = Machine::builtin("dyadic2").unwrap();
        let b = Machine::builtin("dyadic2").unwrap();
        let h = Machine::builtin("harmonic").unwrap();
        assert_eq!(a.id(), b.id());
        assert_ne!(a.id(), h.id());
        assert_eq!(a.id().len(), 16);
    }
}
