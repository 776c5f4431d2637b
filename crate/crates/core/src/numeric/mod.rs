//! Arbitrary-precision dyadic interval arithmetic with outward rounding.
//!
//! A [`Dyadic`] is an exact `m * 2^e`. An [`Interval`] carries a working
//! precision `P` (significant bits); each operation rounds its lower end
//! down and its upper end up to `P` bits, so containment of the exact value
//! survives any composition of operations. Lower endpoints are what make a
//! left-computable real operational: they only ever move up as more terms of
//! a series are added.
//!
//! Per-operation width growth at precision `P`, for results of magnitude `v`:
//! add/sub/mul/div add at most `2^(1-P) |v|` to the width propagated from the
//! inputs; `exp2`, `ln`, `log2` and `pow` add at most `2^(2-P) |v|` (series
//! remainders are pushed below `2^(-P-40)` before the final rounding).

mod dyadic;
mod interval;
mod rational;
pub mod render;
mod transcendental;

pub use dyadic::{Dyadic, Round};
pub use interval::Interval;
pub use rational::{dyadic_to_rational_string, format_rational, parse_rational};
pub use transcendental::{exp2, exp2_rational, ln, ln2, log2, pow, pow2_frac};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;
