//! SDVM: a small self-delimiting virtual machine.
//!
//! # Program format (version 1)
//!
//! Every program starts with a two-bit mode followed by the Elias-gamma code
//! `gamma(n + 1)` of a length `n`. `gamma(m)` for `m >= 1` is `k` zeros
//! followed by the `k + 1` bit binary form of `m`, where `k = floor(log2 m)`,
//! so `|gamma(m)| = 2 floor(log2 m) + 1`.
//!
//! | mode | rest of program                      | behaviour                              |
//! |------|--------------------------------------|----------------------------------------|
//! | `00` | `gamma(n+1)`, `n` payload bits       | LITERAL: output the payload            |
//! | `01` | `gamma(n+1)`, `gamma(k)`, `k` bits   | REPEAT: output the pattern cycled to `n` bits |
//! | `10` | `gamma(n+1)`, `n` body bits          | EXEC: run the body as code             |
//! | `11` | (none)                               | reserved; never a complete program     |
//!
//! The header fixes where the program ends, so for any bit stream at most
//! one prefix is a complete program: the halting domain is prefix-free by
//! construction.
//!
//! LITERAL and REPEAT cost `n + 1` steps. An EXEC body is read as 3-bit
//! instructions (trailing 1-2 bits are ignored) acting on an output buffer
//! and one counter `c`, starting at 0:
//!
//! | code  | name   | effect                                             | steps    |
//! |-------|--------|----------------------------------------------------|----------|
//! | `000` | EMIT0  | append 0                                           | 1        |
//! | `001` | EMIT1  | append 1                                           | 1        |
//! | `010` | DOUBLE | output := output ++ output                         | 1 + len  |
//! | `011` | INC    | c += 1                                             | 1        |
//! | `100` | DEC    | c := max(c - 1, 0)                                 | 1        |
//! | `101` | LOOP   | if c > 0 { c -= 1; jump to first instruction }     | 1        |
//! | `110` | SKIPZ  | if c == 0 skip the next instruction                | 1        |
//! | `111` | HALT   | halt                                               | 1        |
//!
//! Running off the end of the body halts. A run that would need more steps
//! than its fuel is EXHAUSTED. `INC LOOP` is the shortest body that never
//! halts.
//!
//! The literal mode gives `H(s) <= |s| + 2 log2 |s| + LITERAL_OVERHEAD` for
//! `|s| >= 1`, since `2 + |gamma(n+1)| = 2 floor(log2(n+1)) + 3
//! <= 2 log2 n + 5`.

use crate::bits::Bits;

/// The constant `c` in `H(s) <= |s| + 2 log2|s| + c` for literal programs.
pub const LITERAL_OVERHEAD: u64 = 5;

/// The constant `c` in `H(0^n) <= 2 log2 n + c` for REPEAT programs with a
/// one-bit pattern: `2 + |gamma(n+1)| + |gamma(1)| + 1 <= 2 log2 n + 7`.
pub const REPEAT_OVERHEAD: u64 = 7;

pub const VERSION: &str = "sdvm-v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Parsed {
    Literal(Bits),
    Repeat { n: u64, pattern: Bits },
    Exec(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Parse {
    Complete(Parsed),
    /// `p` is a proper prefix of some complete program, or can never be
    /// completed (reserved mode).
    Incomplete,
    /// A complete program ends strictly before the end of `p`.
    Overlong,
}

struct Reader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl Reader<'_> {
    fn bit(&mut self) -> Option<bool> {
        let b = self.bits.get(self.pos).copied();
        self.pos += 1;
        b
    }

    fn take(&mut self, n: u64) -> Option<Vec<bool>> {
        let n = usize::try_from(n).ok()?;
        let end = self.pos.checked_add(n)?;
        let v = self.bits.get(self.pos..end)?.to_vec();
        self.pos = end;
        Some(v)
    }

    fn gamma(&mut self) -> Option<u64> {
        let mut k = 0u32;
        while !self.bit()? {
            k += 1;
            if k >= 63 {
                return None;
            }
        }
        let mut v = 1u64;
        for _ in 0..k {
            v = (v << 1) | self.bit()? as u64;
        }
        Some(v)
    }
}

pub(crate) fn gamma_len(m: u64) -> u64 {
    2 * (63 - m.leading_zeros() as u64) + 1
}

fn push_gamma(out: &mut Vec<bool>, m: u64) {
    let k = 63 - m.leading_zeros();
    out.extend(std::iter::repeat_n(false, k as usize));
    out.extend((0..=k).rev().map(|i| (m >> i) & 1 == 1));
}

pub(crate) fn parse(p: &Bits) -> Parse {
    let mut r = Reader { bits: p.as_slice(), pos: 0 };
    let body = (|| {
        let mode = (r.bit()?, r.bit()?);
        if mode == (true, true) {
            return None;
        }
        let n = r.gamma()? - 1;
        Some(match mode {
            (false, false) => Parsed::Literal(Bits::from_bools(r.take(n)?)),
            (false, true) => {
                let k = r.gamma()?;
                Parsed::Repeat { n, pattern: Bits::from_bools(r.take(k)?) }
            }
            _ => {
                let body = r.take(n)?;
                Parsed::Exec(
                    body.chunks_exact(3)
                        .map(|c| (c[0] as u8) << 2 | (c[1] as u8) << 1 | c[2] as u8)
                        .collect(),
                )
            }
        })
    })();
    match body {
        None => Parse::Incomplete,
        Some(_) if r.pos < p.len() => Parse::Overlong,
        Some(parsed) => Parse::Complete(parsed),
    }
}

/// Outcome of executing a parsed program.
pub(crate) enum Exec {
    Halted { output: Bits, steps: u64 },
    Exhausted,
}

pub(crate) fn execute(prog: &Parsed, fuel: u64) -> Exec {
    match prog {
        Parsed::Literal(s) => fixed_cost(s.clone(), s.len() as u64 + 1, fuel),
        Parsed::Repeat { n, pattern } => {
            let steps = n + 1;
            if steps > fuel {
                return Exec::Exhausted;
            }
            let out = (0..*n as usize).map(|i| pattern.as_slice()[i % pattern.len()]).collect();
            Exec::Halted { output: Bits::from_bools(out), steps }
        }
        Parsed::Exec(code) => run_code(code, fuel),
    }
}

fn fixed_cost(output: Bits, steps: u64, fuel: u64) -> Exec {
    if steps > fuel {
        Exec::Exhausted
    } else {
        Exec::Halted { output, steps }
    }
}

fn run_code(code: &[u8], fuel: u64) -> Exec {
    let mut out: Vec<bool> = Vec::new();
    let mut c: u64 = 0;
    let mut ip = 0usize;
    let mut steps: u64 = 0;
    while ip < code.len() {
        let cost = if code[ip] == 0b010 { 1 + out.len() as u64 } else { 1 };
        steps += cost;
        if steps > fuel {
            return Exec::Exhausted;
        }
        ip += 1;
        match code[ip - 1] {
            0b000 => out.push(false),
            0b001 => out.push(true),
            0b010 => out.extend_from_within(..),
            0b011 => c += 1,
            0b100 => c = c.saturating_sub(1),
            0b101 => {
                if c > 0 {
                    c -= 1;
                    ip = 0;
                }
            }
            0b110 => {
                if c == 0 {
                    ip += 1;
                }
            }
            _ => break,
        }
    }
    Exec::Halted { output: Bits::from_bools(out), steps }
}

/// All complete programs of exactly `l` bits, in lexicographic order.
/// Requires `l <= 64`.
pub(crate) fn complete_programs(l: u64) -> Vec<Bits> {
    assert!(l <= 64, "program enumeration limited to 64 bits");
    let mut values: Vec<u64> = Vec::new();
    let mut emit_all = |prefix: &[bool], free: u64| {
        let base = prefix.iter().fold(0u64, |v, &b| (v << 1) | b as u64);
        let base = base << free;
        for x in 0..1u64 << free {
            values.push(base | x);
        }
    };
    for n in 0u64.. {
        let head = 2 + gamma_len(n + 1);
        if head > l {
            break;
        }
        let mut prefix = Vec::new();
        push_gamma(&mut prefix, n + 1);
        // LITERAL and EXEC: head + n bits.
        if head + n == l {
            for mode in [[false, false], [true, false]] {
                let mut p = mode.to_vec();
                p.extend(&prefix);
                emit_all(&p, n);
            }
        }
        // REPEAT: head + |gamma(k)| + k bits.
        for k in 1..=l {
            let total = head + gamma_len(k) + k;
            if total > l {
                break;
            }
            if total == l {
                let mut p = vec![false, true];
                p.extend(&prefix);
                push_gamma(&mut p, k);
                emit_all(&p, k);
            }
        }
    }
    values.sort_unstable();
    values.into_iter().map(|v| Bits::from_u64(v, l as usize)).collect()
}

/// Number of complete programs of exactly `l` bits (any `l`).
pub(crate) fn count_complete(l: u64) -> u128 {
    let mut total: u128 = 0;
    let pow = |e: u64| if e >= 127 { u128::MAX } else { 1u128 << e };
    for n in 0u64.. {
        let head = 2 + gamma_len(n + 1);
        if head > l {
            break;
        }
        if head + n == l {
            total = total.saturating_add(2 * pow(n));
        }
        for k in 1..=l {
            let t = head + gamma_len(k) + k;
            if t > l {
                break;
            }
            if t == l {
                total = total.saturating_add(pow(k));
            }
        }
    }
    total
}

/// The literal program printing `s`.
pub fn literal_program(s: &Bits) -> Bits {
    let mut v = vec![false, false];
    push_gamma(&mut v, s.len() as u64 + 1);
    v.extend_from_slice(s.as_slice());
    Bits::from_bools(v)
}

/// The REPEAT program printing `pattern` cycled to `n` bits.
pub fn repeat_program(n: u64, pattern: &Bits) -> Bits {
    let mut v = vec![false, true];
    push_gamma(&mut v, n + 1);
    push_gamma(&mut v, pattern.len() as u64);
    v.extend_from_slice(pattern.as_slice());
    Bits::from_bools(v)
}

/// An EXEC program from 3-bit opcodes.
pub fn exec_program(code: &[u8]) -> Bits {
    let mut v = vec![true, false];
    push_gamma(&mut v, 3 * code.len() as u64 + 1);
    for &op in code {
        v.extend([(op >> 2) & 1 == 1, (op >> 1) & 1 == 1, op & 1 == 1]);
    }
    Bits::from_bools(v)
}
