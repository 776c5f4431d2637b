//! Monte Carlo of the fair-coin channel: flip coins, parse `N` codewords,
//! keep the sample when the total length falls in `[L, L + delta_L]`, and
//! tally the first codeword's length.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::machine::Machine;

/// Samples per shard. Shard `k` draws from stream `k` of the seeded
/// generator, so results do not depend on the thread count.
pub const SHARD_SIZE: u64 = 1 << 16;
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), set_stream(shard)";

/// Binary trie over the codewords; `leaf[i]` is the codeword length ending
/// at node `i`.
struct Trie {
    next: Vec<[u32; 2]>,
    leaf: Vec<u32>,
}

impl Trie {
    fn new(words: &[Bits]) -> Trie {
        let mut t = Trie { next: vec![[0, 0]], leaf: vec![0] };
        for w in words {
            let mut at = 0usize;
            for &b in w.as_slice() {
                let slot = t.next[at][b as usize];
                at = if slot == 0 {
                    t.next.push([0, 0]);
                    t.leaf.push(0);
                    let id = t.next.len() - 1;
                    t.next[at][b as usize] = id as u32;
                    id
                } else {
                    slot as usize
                };
            }
            t.leaf[at] = w.len() as u32;
        }
        t
    }
}

struct Coins {
    rng: ChaCha8Rng,
    buf: u64,
    left: u32,
}

impl Coins {
    fn flip(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        b
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Tally {
    parsed: u64,
    accepted: u64,
    first: BTreeMap<u64, u64>,
    prefix_10: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.parsed += other.parsed;
        self.accepted += other.accepted;
        self.prefix_10 += other.prefix_10;
        for (l, c) in other.first {
            *self.first.entry(l).or_default() += c;
        }
        self
    }
}

fn run_shard(trie: &Trie, seed: u64, shard: u64, count: u64, n: u64, lo: u64, hi: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut coins = Coins { rng, buf: 0, left: 0 };
    let mut t = Tally::default();
    'sample: for _ in 0..count {
        let mut total = 0u64;
        let mut first = 0u64;
        let mut flips = 0u32;
        let mut head = 0u8;
        for k in 0..n {
            let mut at = 0usize;
            loop {
                let b = coins.flip();
                if flips < 2 {
                    head = head << 1 | b as u8;
                    flips += 1;
                }
                at = trie.next[at][b as usize] as usize;
                if at == 0 {
                    // Fell off the tree: the string has no codeword here.
                    if flips >= 2 && head == 0b10 {
                        t.prefix_10 += 1;
                    }
                    continue 'sample;
                }
                if trie.leaf[at] != 0 {
                    break;
                }
            }
            let len = trie.leaf[at] as u64;
            if k == 0 {
                first = len;
            }
            total += len;
        }
        // Every codeword is at least one bit; draw a second flip if the
        // first codeword was a single bit and N = 1.
        while flips < 2 {
            head = head << 1 | coins.flip() as u8;
            flips += 1;
        }
        if head == 0b10 {
            t.prefix_10 += 1;
        }
        t.parsed += 1;
        if total >= lo && total <= hi {
            t.accepted += 1;
            *t.first.entry(first).or_default() += 1;
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelReport {
    pub machine: String,
    pub seed: u64,
    pub n: u64,
    pub l: u64,
    pub delta_l: u64,
    pub samples: u64,
    /// Samples whose first `N` codewords parsed.
    pub parsed: u64,
    /// Parsed samples with total length in the window.
    pub accepted: u64,
    /// First-codeword length tallies among accepted samples.
    pub first: BTreeMap<u64, u64>,
    /// Channel strings beginning `10`.
    pub prefix_10: u64,
    pub warning: Option<String>,
}

impl ChannelReport {
    /// `accepted / parsed`.
    pub fn acceptance(&self) -> f64 {
        if self.parsed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.parsed as f64
        }
    }

    pub fn parse_rate(&self) -> f64 {
        self.parsed as f64 / self.samples as f64
    }

    /// Empirical mass of length `l` and its binomial standard deviation.
    pub fn empirical(&self, l: u64) -> Option<(f64, f64)> {
        if self.accepted == 0 {
            return None;
        }
        let p = self.first.get(&l).copied().unwrap_or(0) as f64 / self.accepted as f64;
        Some((p, (p * (1.0 - p) / self.accepted as f64).sqrt()))
    }

    pub fn prefix_10_fraction(&self) -> f64 {
        self.prefix_10 as f64 / self.samples as f64
    }

    pub fn to_json(&self) -> Value {
        let lengths: BTreeMap<String, Value> = self
            .first
            .keys()
            .map(|&l| {
                let (p, s) = self.empirical(l).unwrap();
                (l.to_string(), json!({ "count": self.first[&l], "fraction": p, "sigma": s }))
            })
            .collect();
        let p10 = self.prefix_10_fraction();
        json!({
            "generator": RNG_NAME,
            "shard_size": SHARD_SIZE,
            "seed": self.seed,
            "machine": self.machine,
            "N": self.n,
            "L": self.l,
            "delta_L": self.delta_l,
            "samples": self.samples,
            "parsed": self.parsed,
            "parse_rate": self.parse_rate(),
            "accepted": self.accepted,
            "acceptance": self.acceptance(),
            "first_length": lengths,
            "prefix_10": {
                "count": self.prefix_10,
                "fraction": p10,
                "sigma": (p10 * (1.0 - p10) / self.samples as f64).sqrt(),
            },
            "warning": self.warning,
        })
    }
}

/// Seeded fair-coin channel over a finite table machine.
pub fn channel_simulate(machine: &Machine, n: u64, l: u64, delta_l: u64, samples: u64, seed: u64) -> Result<ChannelReport> {
    let tm = machine.require_table()?;
    let max = tm
        .max_length()
        .ok_or_else(|| Error::arg(format!("machine {} has an infinite domain; the channel needs a finite one", machine.name())))?;
    if samples < 1 || n < 1 {
        return Err(Error::arg("samples and N must be at least 1"));
    }
    let words = tm.assign_codewords_limited(max, 1 << 20)?;
    let trie = Trie::new(&words);
    let hi = l.saturating_add(delta_l);
    let shards = samples.div_ceil(SHARD_SIZE);
    let tally = (0..shards)
        .into_par_iter()
        .map(|k| {
            let count = SHARD_SIZE.min(samples - k * SHARD_SIZE);
            run_shard(&trie, seed, k, count, n, l, hi)
        })
        .reduce(Tally::default, Tally::merge);
    let warning = (tally.accepted == 0).then(|| {
        format!("no sample accepted: total length in [{l}, {hi}] over {n} codewords is too improbable at {samples} samples")
    });
    Ok(ChannelReport {
        machine: machine.id().to_string(),
        seed,
        n,
        l,
        delta_l,
        samples,
        parsed: tally.parsed,
        accepted: tally.accepted,
        first: tally.first,
        prefix_10: tally.prefix_10,
        warning,
    })
}
