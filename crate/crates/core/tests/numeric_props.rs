use algotherm::numeric::{exp2, exp2_rational, ln, log2, pow, Dyadic, Interval};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn rat() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..500).prop_map(|(n, d)| q(n, d))
}

fn pos_rat() -> impl Strategy<Value = BigRational> {
    (1i64..100_000, 1i64..500).prop_map(|(n, d)| q(n, d))
}

/// `log2 x` to `bits` fractional bits by repeated squaring in fixed point,
/// truncating at each step. Returns `floor`-like estimate with error below
/// `2^(4 - bits)`.
fn log2_oracle(x: &BigRational, bits: u32) -> BigRational {
    let mut int_part: i64 = 0;
    let mut y = x.clone();
    let two = BigRational::from_integer(2.into());
    while y >= two {
        y /= &two;
        int_part += 1;
    }
    while y < BigRational::one() {
        y *= &two;
        int_part -= 1;
    }
    let w = bits + 16;
    let scale = BigUint::one() << w;
    // Fixed point y in [1, 2) with w fractional bits.
    let mut f: BigUint = (y * BigRational::from_integer(BigInt::from(scale.clone()))).to_integer().try_into().unwrap();
    let two_fixed = &scale << 1u32;
    let mut frac = BigUint::zero();
    for _ in 0..bits {
        f = (&f * &f) >> w;
        frac <<= 1u32;
        if f >= two_fixed {
            f >>= 1u32;
            frac += 1u32;
        }
    }
    BigRational::from_integer(int_part.into())
        + BigRational::new(BigInt::from(frac), BigInt::from(BigUint::one() << bits))
}

fn near(x: &Interval, v: &BigRational, slack_pow2: i64) -> bool {
    let slack = Dyadic::pow2(slack_pow2).to_rational();
    x.lo().to_rational() <= v + &slack && x.hi().to_rational() >= v - &slack
}

proptest! {
    #[test]
    fn arithmetic_contains_exact(a in rat(), b in rat(), p in 16u32..200) {
        let (ia, ib) = (Interval::from_rational(&a, p), Interval::from_rational(&b, p));
        prop_assert!(ia.contains_rational(&a));
        prop_assert!((&ia + &ib).contains_rational(&(&a + &b)));
        prop_assert!((&ia - &ib).contains_rational(&(&a - &b)));
        prop_assert!((&ia * &ib).contains_rational(&(&a * &b)));
        if !b.is_zero() {
            prop_assert!(ia.div(&ib).unwrap().contains_rational(&(&a / &b)));
        }
    }

    /// `lo^d <= 2^n <= hi^d` exactly for `2^(n/d)`.
    #[test]
    fn exp2_contains_exact(n in -200i64..200, d in 1u32..9, p in 16u32..160) {
        let x = exp2_rational(&q(n, d as i64), p);
        let target = if n >= 0 {
            BigRational::from_integer(BigInt::one() << n as u64)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-n) as u64)
        };
        prop_assert!(x.lo().to_rational().pow(d as i32) <= target);
        prop_assert!(x.hi().to_rational().pow(d as i32) >= target);
        prop_assert!(x.width() <= &x.hi().abs() * &Dyadic::pow2(2 - p as i64));
    }

    #[test]
    fn log2_contains_oracle(x in pos_rat(), p in 16u32..120) {
        let v = log2(&Interval::from_rational(&x, p), p).unwrap();
        let oracle = log2_oracle(&x, 4 * p);
        prop_assert!(near(&v, &oracle, 4 - 4 * p as i64), "{} vs {}", v, oracle);
        let mag = v.hi().abs().max(Dyadic::one());
        prop_assert!(v.width() <= &mag * &Dyadic::pow2(3 - p as i64));
    }

    #[test]
    fn ln_matches_log2(x in pos_rat(), p in 32u32..120) {
        let l = ln(&Interval::from_rational(&x, p), p).unwrap();
        let l2 = log2(&Interval::from_rational(&x, p), p).unwrap();
        let back = &l2 * &algotherm::numeric::ln2(p);
        prop_assert!(l.intersects(&back));
    }

    #[test]
    fn widening_never_shrinks(a in rat(), w1 in 0i64..50, w2 in 0i64..50) {
        let p = 96;
        let inner = Interval::from_rational(&(&a / BigRational::from_integer(500.into())), p);
        let outer = Interval::new(
            inner.lo() - &Dyadic::new(w1.into(), -10),
            inner.hi() + &Dyadic::new(w2.into(), -10),
            p,
        ).unwrap();
        prop_assert!(exp2(&outer, p).contains_interval(&exp2(&inner, p)));
        prop_assert!((&outer * &outer).contains_interval(&(&inner * &inner)));
        let shift = Interval::from_int(3, p);
        let (pi, po) = (&inner.sqr() + &shift, &outer.sqr() + &shift);
        prop_assert!(log2(&po, p).unwrap().contains_interval(&log2(&pi, p).unwrap()));
    }
}

#[test]
fn doubling_precision_halves_width() {
    let corpus: Vec<Box<dyn Fn(u32) -> Interval>> = vec![
        Box::new(|p| exp2_rational(&q(1, 3), p)),
        Box::new(|p| log2(&Interval::from_int(3, p), p).unwrap()),
        Box::new(|p| ln(&Interval::from_rational(&q(5, 7), p), p).unwrap()),
        Box::new(|p| pow(&Interval::from_rational(&q(3, 2), p), &q(2, 3), p).unwrap()),
        Box::new(|p| Interval::one(p).div(&Interval::from_int(3, p)).unwrap()),
        Box::new(|p| {
            let z = &exp2_rational(&q(-1, 3), p) + &exp2_rational(&q(-2, 3), p);
            log2(&z, p).unwrap()
        }),
    ];
    for (i, f) in corpus.iter().enumerate() {
        for p in [32u32, 64, 128, 256] {
            let (a, b) = (f(p).width(), f(2 * p).width());
            assert!(a.is_positive(), "expression {i} is exact at {p}");
            assert!(b.mul_pow2(1) <= a, "expression {i}: width {b} at {} vs {a} at {p}", 2 * p);
        }
    }
}

#[test]
fn log2_oracle_self_check() {
    let v = log2_oracle(&q(3, 1), 64);
    assert!((v - q(1584962500721156181, 1_000_000_000_000_000_000)).abs() < q(1, 1 << 40));
}
