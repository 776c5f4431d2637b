use algotherm::enumerate::{dovetail, Schedule};
use algotherm::machine::builtin_names;
use algotherm::numeric::Dyadic;
use algotherm::thermo::{
    solve_temperature, spectrum_state, sweep, tail_bound, thermo_row, z_certified, SeriesState, Source, SweepConfig,
};
use algotherm::{Error, Machine};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn z_and_e_increase_with_temperature() {
    let grid: Vec<BigRational> = (1..=12).map(|k| q(k, 8)).collect();
    for name in builtin_names() {
        let m = Machine::builtin(name).unwrap();
        let recs = dovetail(&m, 12, Schedule::default()).unwrap();
        let rows = sweep(&m, Source::Records(&recs), &SweepConfig { grid: grid.clone(), qs: vec![], prec: 96 }).unwrap();
        let rows: Vec<_> = rows.into_iter().map(|r| r.result.unwrap()).collect();
        for w in rows.windows(2) {
            assert!(w[0].z.hi() < w[1].z.lo(), "{name}: Z not increasing at T={}", w[1].t);
            assert!(w[0].e.hi() < w[1].e.lo(), "{name}: E not increasing at T={}", w[1].t);
        }
        for r in &rows {
            assert!(!r.c.hi().is_negative(), "{name}: C < 0 at T={}", r.t);
        }
    }
}

#[test]
fn partial_z_lower_ends_never_drop() {
    let m = Machine::builtin("sdvm").unwrap();
    let recs = dovetail(&m, 13, Schedule::default()).unwrap();
    for t in [q(1, 3), q(1, 1), q(5, 2)] {
        let mut st = SeriesState::new(m.id(), t.clone(), vec![], 64).unwrap();
        let mut last = Dyadic::zero();
        for r in &recs {
            st.accumulate(r).unwrap();
            let lo = st.z().lo().clone();
            assert!(lo >= last);
            last = lo;
        }
    }
}

#[test]
fn record_gaps_are_refused() {
    let m = Machine::builtin("dyadic2").unwrap();
    let recs = dovetail(&m, 3, Schedule::default()).unwrap();
    let mut st = SeriesState::new(m.id(), q(1, 2), vec![], 64).unwrap();
    assert!(matches!(st.accumulate(&recs[1]), Err(Error::IndexGap { expected: 1, got: 2 })));
    assert!(SeriesState::new(m.id(), q(0, 1), vec![], 64).is_err());
}

/// Exact `sum c_l 2^(-l/T)` up to `cut` for `T = 1/k`.
fn z_exact(m: &Machine, k: u64, cut: u64) -> BigRational {
    let tm = m.require_table().unwrap();
    (1..=cut)
        .map(|l| BigRational::new(BigInt::from(tm.spectrum_count(l)), BigInt::one() << (k * l)))
        .sum()
}

#[test]
fn two_sided_contains_deeper_oracle() {
    for name in ["harmonic", "geometric"] {
        let m = Machine::builtin(name).unwrap();
        for k in [2u64, 3, 4] {
            for cut in [10u64, 20, 30] {
                let row = thermo_row(&m, Source::Spectrum { cutoff: cut }, &q(1, k as i64), &[q(1, 1)], 128).unwrap();
                assert!(row.tail_bounded);
                let oracle = z_exact(&m, k, 4 * cut);
                assert!(row.z.contains_rational(&oracle), "{name} T=1/{k} cut={cut}");
            }
        }
    }
}

#[test]
fn tail_refuses_at_or_above_one() {
    let m = Machine::builtin("harmonic").unwrap();
    let tm = m.require_table().unwrap();
    for t in [q(1, 1), q(3, 2)] {
        assert!(matches!(tail_bound(tm, &t, &BigRational::zero(), 20, 64), Err(Error::DivergentTail(_))));
    }
    let d = Machine::builtin("dyadic2").unwrap();
    let b = tail_bound(d.require_table().unwrap(), &q(3, 1), &BigRational::zero(), 1, 64).unwrap();
    // Only the length-2 term is left: 2^(-2/3) = 0.62996...
    assert!(b.hi().to_f64() >= 0.62996 && b.lo().to_f64() <= 0.62997);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_inverts_z(num in 1i64..700, den in 1000i64..1001) {
        let m = Machine::builtin("dyadic2").unwrap();
        let target = q(num, den);
        let s = solve_temperature(&m, &target, 96).unwrap();
        prop_assert!(s.z.contains_rational(&target));
        let mid = (s.t.lo() + s.t.hi()).mul_pow2(-1);
        let z = z_certified(m.require_table().unwrap(), &mid.to_rational(), 96).unwrap();
        prop_assert!(s.z.intersects(&z));
    }

    #[test]
    fn identities_hold_on_random_grids(tn in 1i64..40, td in 8i64..41) {
        let t = q(tn, td);
        for name in ["dyadic2", "harmonic", "geometric"] {
            let m = Machine::builtin(name).unwrap();
            let st = spectrum_state(m.require_table().unwrap(), m.id(), &t, &[], 30, 128).unwrap();
            let qn = st.quantities().unwrap();
            let tt = algotherm::Interval::from_rational(&t, 160);
            let resid = &qn.f - &(&qn.e - &(&tt * &qn.s));
            prop_assert!(resid.contains_zero());
            let s2 = &(qn.e.div(&tt).unwrap()) + &algotherm::numeric::log2(&qn.z, 160).unwrap();
            prop_assert!(s2.intersects(&qn.s));
        }
    }
}
