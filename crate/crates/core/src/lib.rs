//! Executable thermodynamics of prefix-free machines.
//!
//! The crate enumerates halting programs of concrete prefix-free machines,
//! evaluates the partition function and its derived quantities (free energy,
//! energy, entropy, specific heat, length moments) as outward-rounded dyadic
//! intervals, and builds the microcanonical ensemble of codeword
//! concatenations exactly by dynamic programming and statistically by a
//! seeded fair-coin channel.
//!
//! Module map:
//!
//! * [`machine`]: table machines with known length spectra and the
//!   self-delimiting step VM (`sdvm`).
//! * [`enumerate`]: dovetailed enumeration of halting programs with
//!   checkpoint/resume.
//! * [`numeric`]: dyadic interval arithmetic.
//! * [`thermo`]: Z, F, E, S, C and W(Q, T), tails, sweeps, inversion of Z and
//!   divergence probes.
//! * [`complexity`]: program-size complexity and algorithmic probability
//!   relative to a concrete machine.
//! * [`ensemble`]: density of states, microcanonical quantities, canonical
//!   comparison and channel simulation.

pub mod bits;
pub mod complexity;
pub mod ensemble;
pub mod enumerate;
pub mod error;
pub mod machine;
pub mod numeric;
pub mod thermo;

pub use bits::{Bits, Program};
pub use error::{Error, ErrorKind, Result};
pub use machine::{Machine, RunResult};
pub use numeric::{Dyadic, Interval};
