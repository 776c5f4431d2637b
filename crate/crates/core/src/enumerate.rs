//! Dovetailed enumeration of a machine's halting programs.
//!
//! Round `r` runs every complete program of length `<= r` that has not yet
//! halted, with `B(r) = min(2^r, cap)` steps. Records are ordered by
//! (round, length, lexicographic bits) and indexed from 1. Halting is
//! monotone in fuel, so each program is emitted exactly once.
//!
//! Checkpoints are append-only text:
//!
//! ```text
//! # algotherm-checkpoint v1 machine=<id> cap=<cap> max_programs=<m>
//! round,length,bits,steps,output_hex
//! 1,1,0,1,2
//! #done,1
//! ```
//!
//! `output_hex` is the hex form of `1 ++ output` (so leading zeros and the
//! empty output survive). Lines after the last `#done` marker belong to an
//! interrupted round and are dropped on load.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{Bits, Program};
use crate::error::{Error, Result};
use crate::machine::{Machine, RunResult};
use crate::numeric::Dyadic;

pub const DEFAULT_FUEL_CAP: u64 = 4096;
pub const DEFAULT_MAX_PROGRAMS: u64 = 1 << 22;
const HEADER_TAG: &str = "# algotherm-checkpoint v1";
const COLUMNS: &str = "round,length,bits,steps,output_hex";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HaltRecord {
    pub index: u64,
    pub program: Program,
    pub output: Bits,
    pub steps: u64,
    /// Dovetail round in which the program first halted.
    pub round: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule {
    /// Upper limit on the per-round step budget.
    pub cap: u64,
    /// Most programs a single round may run.
    pub max_programs: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { cap: DEFAULT_FUEL_CAP, max_programs: DEFAULT_MAX_PROGRAMS }
    }
}

impl Schedule {
    pub fn budget(&self, round: u64) -> u64 {
        if round >= 63 {
            self.cap
        } else {
            (1u64 << round).min(self.cap)
        }
    }

    pub fn describe(&self) -> String {
        format!("B(r)=min(2^r,{}) max_programs={}", self.cap, self.max_programs)
    }
}

/// Resumable dovetailer over one machine.
#[derive(Clone, Debug)]
pub struct Enumerator<'m> {
    machine: &'m Machine,
    schedule: Schedule,
    records: Vec<HaltRecord>,
    rounds_done: u64,
    /// Complete programs of length `<= rounds_done` that have not halted.
    pending: Vec<Program>,
}

impl<'m> Enumerator<'m> {
    pub fn new(machine: &'m Machine, schedule: Schedule) -> Result<Self> {
        if schedule.cap < 1 {
            return Err(Error::arg("fuel cap must be at least 1"));
        }
        Ok(Enumerator {
            machine,
            schedule,
            records: Vec::new(),
            rounds_done: 0,
            pending: Vec::new(),
        })
    }

    pub fn records(&self) -> &[HaltRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<HaltRecord> {
        self.records
    }

    pub fn rounds_done(&self) -> u64 {
        self.rounds_done
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    /// Run the next round and return the records it produced.
    pub fn step_round(&mut self) -> Result<&[HaltRecord]> {
        let r = self.rounds_done + 1;
        let fresh = self.machine.count_programs(r);
        let total = fresh.to_u64().and_then(|f| f.checked_add(self.pending.len() as u64));
        match total {
            Some(t) if t <= self.schedule.max_programs => {}
            _ => {
                return Err(Error::ResourceLimit(format!(
                    "round {r} needs {} + {fresh} programs, limit {}",
                    self.pending.len(),
                    self.schedule.max_programs
                )))
            }
        }
        let mut batch = std::mem::take(&mut self.pending);
        batch.extend(self.machine.programs_of_length(r, self.schedule.max_programs)?);
        batch.sort();
        let fuel = self.schedule.budget(r);
        let machine = self.machine;
        let results: Vec<RunResult> =
            batch.par_iter().map(|p| machine.run(p, fuel)).collect::<Result<_>>()?;
        let first_new = self.records.len();
        for (p, res) in batch.into_iter().zip(results) {
            match res {
                RunResult::Halted { output, steps } => {
                    let index = self.records.len() as u64 + 1;
                    self.records.push(HaltRecord { index, program: p, output, steps, round: r });
                }
                RunResult::Exhausted { .. } => self.pending.push(p),
                RunResult::Malformed => {
                    return Err(Error::InvalidMachine(format!("enumerated program {p} is malformed")))
                }
            }
        }
        self.rounds_done = r;
        Ok(&self.records[first_new..])
    }

    pub fn run_to(&mut self, rounds: u64) -> Result<()> {
        while self.rounds_done < rounds {
            self.step_round()?;
        }
        Ok(())
    }

    fn header(&self) -> String {
        format!(
            "{HEADER_TAG} machine={} cap={} max_programs={}",
            self.machine.id(),
            self.schedule.cap,
            self.schedule.max_programs
        )
    }

    /// Run to `rounds`, resuming from and appending to the checkpoint at
    /// `path`. Each completed round is flushed before the next starts.
    pub fn run_with_checkpoint(machine: &'m Machine, schedule: Schedule, rounds: u64, path: &Path) -> Result<Self> {
        let mut en = Enumerator::new(machine, schedule)?;
        let mut file = if path.exists() {
            let valid_len = en.load_checkpoint(path)?;
            let mut f = OpenOptions::new().read(true).write(true).open(path)?;
            f.set_len(valid_len)?;
            f.seek(SeekFrom::End(0))?;
            f
        } else {
            let mut f = File::create(path)?;
            writeln!(f, "{}", en.header())?;
            writeln!(f, "{COLUMNS}")?;
            f.sync_data()?;
            f
        };
        while en.rounds_done < rounds {
            let mut text = String::new();
            for rec in en.step_round()? {
                text.push_str(&format_record(rec));
                text.push('\n');
            }
            text.push_str(&format!("#done,{}\n", en.rounds_done));
            file.write_all(text.as_bytes())?;
            file.sync_data()?;
        }
        Ok(en)
    }

    /// Replay a checkpoint into this fresh enumerator. Returns the byte length
    /// of the file's valid part (through the last round marker).
    fn load_checkpoint(&mut self, path: &Path) -> Result<u64> {
        let bad = |line: usize, msg: &str| Error::Checkpoint(format!("{}:{line}: {msg}", path.display()));
        let reader = BufReader::new(File::open(path)?);
        let mut valid_len = 0u64;
        let mut offset = 0u64;
        let mut round_buf: Vec<HaltRecord> = Vec::new();
        for (i, line) in reader.split(b'\n').enumerate() {
            let raw = line?;
            offset += raw.len() as u64 + 1;
            let line = String::from_utf8(raw).map_err(|_| bad(i + 1, "not utf-8"))?;
            let line = line.trim_end_matches('\r');
            match i {
                0 => {
                    if line != self.header() {
                        return Err(bad(1, "header does not match this machine and schedule"));
                    }
                    continue;
                }
                1 => {
                    if line != COLUMNS {
                        return Err(bad(2, "unexpected column line"));
                    }
                    valid_len = offset;
                    continue;
                }
                _ => {}
            }
            if let Some(r) = line.strip_prefix("#done,") {
                let r: u64 = r.parse().map_err(|_| bad(i + 1, "bad round marker"))?;
                if r != self.rounds_done + 1 {
                    return Err(bad(i + 1, "round markers out of order"));
                }
                self.replay_round(r, std::mem::take(&mut round_buf))
                    .map_err(|e| bad(i + 1, &e.to_string()))?;
                valid_len = offset;
                continue;
            }
            match parse_record(line) {
                Some(rec) => round_buf.push(rec),
                // A torn final line from an interrupted round.
                None => break,
            }
        }
        self.rebuild_pending()?;
        Ok(valid_len.min(std::fs::metadata(path)?.len()))
    }

    /// Append the stored records of round `r` after checking their order.
    fn replay_round(&mut self, r: u64, stored: Vec<HaltRecord>) -> Result<()> {
        for w in stored.windows(2) {
            if w[0].program >= w[1].program {
                return Err(Error::Checkpoint(format!("round {r} records out of order")));
            }
        }
        for mut rec in stored {
            if rec.round != r || rec.program.len() as u64 > r {
                return Err(Error::Checkpoint(format!("record {} does not belong to round {r}", rec.program)));
            }
            rec.index = self.records.len() as u64 + 1;
            self.records.push(rec);
        }
        self.rounds_done = r;
        Ok(())
    }

    /// Rebuild the not-yet-halted set after loading records.
    fn rebuild_pending(&mut self) -> Result<()> {
        let halted: HashSet<&Program> = self.records.iter().map(|r| &r.program).collect();
        let mut pending = Vec::new();
        for l in 1..=self.rounds_done {
            for p in self.machine.programs_of_length(l, self.schedule.max_programs)? {
                if !halted.contains(&p) {
                    pending.push(p);
                }
            }
        }
        if halted.len() != self.records.len() {
            return Err(Error::Checkpoint("duplicate program in checkpoint".into()));
        }
        self.pending = pending;
        Ok(())
    }
}

fn format_record(rec: &HaltRecord) -> String {
    format!(
        "{},{},{},{},{}",
        rec.round,
        rec.program.len(),
        rec.program,
        rec.steps,
        rec.output.to_sentinel_hex()
    )
}

fn parse_record(line: &str) -> Option<HaltRecord> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 5 {
        return None;
    }
    let round = f[0].parse().ok()?;
    let length: usize = f[1].parse().ok()?;
    let program: Bits = f[2].parse().ok()?;
    if program.len() != length {
        return None;
    }
    let steps = f[3].parse().ok()?;
    let output = Bits::from_sentinel_hex(f[4]).ok()?;
    Some(HaltRecord { index: 0, program, output, steps, round })
}

/// Dovetail `machine` for `rounds` rounds.
pub fn dovetail(machine: &Machine, rounds: u64, schedule: Schedule) -> Result<Vec<HaltRecord>> {
    if rounds < 1 {
        return Err(Error::arg("rounds must be at least 1"));
    }
    let mut en = Enumerator::new(machine, schedule)?;
    en.run_to(rounds)?;
    Ok(en.into_records())
}

/// `Ok` when no program is a proper prefix of another, else the first
/// violating pair `(prefix, extension)` in lexicographic order.
pub fn verify_prefix_free<'a, I>(programs: I) -> std::result::Result<(), (Bits, Bits)>
where
    I: IntoIterator<Item = &'a Bits>,
{
    let mut v: Vec<&Bits> = programs.into_iter().collect();
    v.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
    v.dedup();
    // In lexicographic order every extension of p directly follows p.
    for w in v.windows(2) {
        if w[0].is_proper_prefix_of(w[1]) {
            return Err((w[0].clone(), w[1].clone()));
        }
    }
    Ok(())
}

pub fn verify_records_prefix_free(records: &[HaltRecord]) -> std::result::Result<(), (Bits, Bits)> {
    verify_prefix_free(records.iter().map(|r| &r.program))
}

/// Running Kraft sums `sum_{i <= n} 2^-|p_i|`, exact.
pub fn kraft_partial_sums(records: &[HaltRecord]) -> Vec<Dyadic> {
    let mut acc = Dyadic::zero();
    records
        .iter()
        .map(|r| {
            acc = &acc + &Dyadic::pow2(-(r.program.len() as i64));
            acc.clone()
        })
        .collect()
}
