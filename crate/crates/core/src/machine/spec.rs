//! JSON machine specs and the built-in machines.
//!
//! ```json
//! {"kind": "table", "name": "dyadic2",
//!  "rule": {"type": "explicit", "counts": [[1, 1], [2, 1]]},
//!  "l_max_hint": 2, "output_rule": "index"}
//! {"kind": "table", "rule": {"type": "geometric", "beta": "1/2", "start": 4}}
//! {"kind": "table", "rule": {"type": "harmonic"}}
//! {"kind": "step", "vm": "sdvm-v1"}
//! ```
//!
//! With `"output_rule": "explicit"`, `outputs` lists bit strings in canonical
//! codeword order.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sdvm;
use super::table::{OutputRule, SpectrumRule, TableMachine};
use super::MachineKind;
use crate::bits::Bits;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Table,
    Step,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RuleSpec {
    Explicit { counts: Vec<(u64, u64)> },
    Geometric {
        beta: String,
        #[serde(default = "one")]
        start: u64,
    },
    Harmonic,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputRuleSpec {
    #[default]
    Index,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub kind: KindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max_hint: Option<u64>,
    #[serde(default)]
    pub output_rule: OutputRuleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<Bits>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vm: Option<String>,
}

impl MachineSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn name(&self) -> &str {
        match (&self.name, self.kind) {
            (Some(n), _) => n,
            (None, KindSpec::Table) => "table",
            (None, KindSpec::Step) => "step",
        }
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON form.
    pub fn identity(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    pub(crate) fn build_kind(&self) -> Result<MachineKind> {
        match self.kind {
            KindSpec::Step => {
                let vm = self.vm.as_deref().unwrap_or(sdvm::VERSION);
                if vm != sdvm::VERSION {
                    return Err(Error::InvalidMachine(format!("unknown vm {vm:?}")));
                }
                if self.rule.is_some() || self.outputs.is_some() {
                    return Err(Error::InvalidMachine("step machines take no rule or outputs".into()));
                }
                Ok(MachineKind::Step)
            }
            KindSpec::Table => {
                let rule = match &self.rule {
                    None => return Err(Error::InvalidMachine("table machine needs a rule".into())),
                    Some(RuleSpec::Harmonic) => SpectrumRule::Harmonic,
                    Some(RuleSpec::Geometric { beta, start }) => {
                        let beta: BigRational = beta
                            .trim()
                            .parse()
                            .map_err(|_| Error::InvalidMachine(format!("bad beta {beta:?}")))?;
                        SpectrumRule::Geometric { beta, start: *start }
                    }
                    Some(RuleSpec::Explicit { counts }) => {
                        let mut m = BTreeMap::new();
                        for &(l, c) in counts {
                            if m.insert(l, BigUint::from(c)).is_some() {
                                return Err(Error::InvalidMachine(format!("length {l} listed twice")));
                            }
                        }
                        SpectrumRule::Explicit(m)
                    }
                };
                let output = match (self.output_rule, &self.outputs) {
                    (OutputRuleSpec::Index, None) => OutputRule::Index,
                    (OutputRuleSpec::Explicit, Some(list)) => OutputRule::Explicit(list.clone()),
                    (OutputRuleSpec::Index, Some(_)) => {
                        return Err(Error::InvalidMachine("outputs given with output_rule \"index\"".into()))
                    }
                    (OutputRuleSpec::Explicit, None) => {
                        return Err(Error::InvalidMachine("output_rule \"explicit\" needs outputs".into()))
                    }
                };
                Ok(MachineKind::Table(TableMachine::new(rule, output, self.l_max_hint)?))
            }
        }
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["dyadic2", "harmonic", "geometric", "sdvm"]
}

fn table(name: &str, rule: RuleSpec, l_max_hint: Option<u64>) -> MachineSpec {
    MachineSpec {
        kind: KindSpec::Table,
        name: Some(name.into()),
        rule: Some(rule),
        l_max_hint,
        output_rule: OutputRuleSpec::Index,
        outputs: None,
        vm: None,
    }
}

/// Built-in machine specs by name.
///
/// * `dyadic2`: domain {0, 10}.
/// * `harmonic`: `c_l = floor(2^l/(l+1)^2)`.
/// * `geometric`: `c_l = floor(2^(l/2))` from length 4 on (Kraft mass about 0.80).
/// * `sdvm`: the step machine of [`super::sdvm`].
pub fn builtin(name: &str) -> Result<MachineSpec> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "dyadic2" => table("dyadic2", RuleSpec::Explicit { counts: vec![(1, 1), (2, 1)] }, Some(2)),
        "harmonic" => table("harmonic", RuleSpec::Harmonic, None),
        "geometric" => table("geometric", RuleSpec::Geometric { beta: "1/2".into(), start: 4 }, None),
        "sdvm" => MachineSpec {
            kind: KindSpec::Step,
            name: Some("sdvm".into()),
            rule: None,
            l_max_hint: None,
            output_rule: OutputRuleSpec::Index,
            outputs: None,
            vm: Some(sdvm::VERSION.into()),
        },
        other => return Err(Error::InvalidMachine(format!("no built-in machine named {other:?}"))),
    })
}
