use algotherm::ensemble::{
    additivity_residual, build_theta, channel_simulate, delta_l_sensitivity, first_codeword_distribution,
    micro_entropy_temperature, Spectrum,
};
use algotherm::{Error, Machine};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn spectrum() -> impl Strategy<Value = Spectrum> {
    (0u64..2, 0u64..3, 0u64..5, 0u64..9, 0u64..17)
        .prop_filter("kraft", |(a, b, c, d, e)| 16 * a + 8 * b + 4 * c + 2 * d + e <= 32 && a + b + c + d + e > 0)
        .prop_map(|(a, b, c, d, e)| Spectrum::from_counts(&[(1, a), (2, b), (3, c), (4, d), (5, e)]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_and_window(sp in spectrum(), dl in 0u64..4) {
        let n_max = 5;
        let cap = 30;
        let exact = build_theta(&sp, n_max, cap, 0).unwrap();
        let wide = build_theta(&sp, n_max, cap, dl).unwrap();
        for l in 0..=cap as i64 {
            prop_assert_eq!(exact.theta(l, 1), sp.count(l as u64));
            for n in 2..=n_max {
                let rec: BigUint = sp.iter().map(|(len, c)| c * exact.theta(l - len as i64, n - 1)).sum();
                prop_assert_eq!(exact.theta(l, n), rec);
                let win: BigUint = (0..=dl as i64).map(|d| exact.theta(l + d, n)).sum();
                if (l as u64) + dl <= cap {
                    prop_assert_eq!(wide.theta(l, n), win);
                }
                if (l as u64) < n * sp.l_min() || (l as u64) > n * sp.l_max() {
                    prop_assert!(exact.theta(l, n).is_zero());
                }
            }
        }
    }

    #[test]
    fn first_codeword_law_is_normalized(sp in spectrum(), n in 2u64..6, l in 2u64..25) {
        let t = build_theta(&sp, 6, 30, 0).unwrap();
        match first_codeword_distribution(&t, l as i64, n) {
            Ok(fc) => {
                let total: BigRational = fc.mass.values().sum();
                prop_assert!(total.is_one());
                for (len, r) in &fc.per_codeword {
                    // Every codeword of a length carries the same R(p).
                    let c = BigRational::from_integer(sp.count(*len).into());
                    prop_assert_eq!(&(r * c), &fc.mass[len]);
                    let direct = BigRational::new(
                        t.theta(l as i64 - *len as i64, n - 1).into(),
                        t.theta(l as i64, n).into(),
                    );
                    prop_assert_eq!(r, &direct);
                }
            }
            Err(e) => prop_assert!(t.theta(l as i64, n).is_zero() && matches!(e, Error::Domain(_))),
        }
    }
}

#[test]
fn additivity_residual_falls_along_a_line() {
    // Three-level spectrum on the line L/N = 2.
    let sp = Spectrum::from_counts(&[(1, 1), (2, 1), (3, 2)]).unwrap();
    let t = build_theta(&sp, 160, 330, 0).unwrap();
    let r: Vec<f64> = [10u64, 20, 40, 80, 160]
        .iter()
        .map(|&n| additivity_residual(&t, 2 * n, n, 64).unwrap().midpoint_f64())
        .collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
}

#[test]
fn window_width_barely_moves_entropy_per_codeword() {
    let sp = Spectrum::from_counts(&[(1, 1), (2, 1)]).unwrap();
    let s = delta_l_sensitivity(&sp, 4 * 399 / 3, 399, &[0, 1, 2], 64).unwrap();
    assert!(s.relative_spread < 0.01, "{}", s.relative_spread);
    let wide = Spectrum::from_counts(&[(1, 1), (2, 1), (3, 2)]).unwrap();
    let s = delta_l_sensitivity(&wide, 240, 120, &[0, 1, 2], 64).unwrap();
    assert!(s.relative_spread < 0.01, "{}", s.relative_spread);
}

#[test]
fn window_spread_decays_like_one_over_n() {
    // The window adds at most log2(3) bits to S, so the spread per codeword
    // halves when N doubles along a fixed L/N line.
    let sp = Spectrum::from_counts(&[(1, 1), (2, 1)]).unwrap();
    let spread = |n: u64| delta_l_sensitivity(&sp, 4 * n / 3, n, &[0, 1, 2], 64).unwrap().relative_spread;
    let (a, b, c) = (spread(99), spread(198), spread(396));
    for (x, y) in [(a, b), (b, c)] {
        assert!((x / y - 2.0).abs() < 0.05, "{x} {y}");
    }
}

#[test]
fn window_spread_within_one_percent_at_n_100() {
    // Literal claim at the smallest N it names, on the ensemble example point.
    let sp = Spectrum::from_counts(&[(1, 1), (2, 1)]).unwrap();
    let s = delta_l_sensitivity(&sp, 140, 100, &[0, 1, 2], 64).unwrap();
    assert!(s.relative_spread < 0.01, "spread {} at N=100, L=140", s.relative_spread);
}

#[test]
fn monte_carlo_tracks_exact_law() {
    // Four-level finite spectrum. The channel weighs a tuple by 2^-(total
    // length), so it is uniform over tuples only for an exact-length window.
    let m = Machine::from_json(r#"{"kind":"table","rule":{"type":"explicit","counts":[[1,1],[2,1],[3,1],[4,2]]}}"#)
        .unwrap();
    let sp = Spectrum::from_machine(&m).unwrap();
    let (n, l, dl) = (4u64, 8u64, 0u64);
    let table = build_theta(&sp, n, 20, dl).unwrap();
    let fc = first_codeword_distribution(&table, l as i64, n).unwrap();
    let r = channel_simulate(&m, n, l, dl, 1_000_000, 2024).unwrap();
    assert!(r.accepted >= 100_000, "{}", r.accepted);
    for (len, mass) in &fc.mass {
        let exact = num_traits::ToPrimitive::to_f64(mass).unwrap();
        let (p, s) = r.empirical(*len).unwrap();
        assert!((p - exact).abs() <= 4.0 * s, "length {len}: {p} vs {exact} (sigma {s})");
    }
    let p10 = r.prefix_10_fraction();
    let s10 = (0.25f64 * 0.75 / r.samples as f64).sqrt();
    assert!((p10 - 0.25).abs() <= 3.0 * s10, "{p10}");
}

#[test]
fn full_window_accepts_every_parse() {
    let m = Machine::builtin("dyadic2").unwrap();
    let r = channel_simulate(&m, 5, 5, 5, 50_000, 3).unwrap();
    assert_eq!(r.acceptance(), 1.0);
    let j1 = serde_json::to_string(&r.to_json()).unwrap();
    let j2 = serde_json::to_string(&channel_simulate(&m, 5, 5, 5, 50_000, 3).unwrap().to_json()).unwrap();
    assert_eq!(j1, j2);
}

#[test]
fn temperature_edges() {
    let sp = Spectrum::from_counts(&[(1, 1), (2, 1)]).unwrap();
    let t = build_theta(&sp, 10, 30, 0).unwrap();
    assert!(matches!(micro_entropy_temperature(&t, 10, 10, 64), Err(Error::Domain(_))));
    assert!(matches!(micro_entropy_temperature(&t, 20, 10, 64), Err(Error::Domain(_))));
    let mid = micro_entropy_temperature(&t, 15, 10, 64).unwrap();
    assert!(mid.infinite_t);
    let cold = micro_entropy_temperature(&t, 12, 10, 64).unwrap();
    assert!(cold.inv_t.lo() > &algotherm::Dyadic::zero());
    let hot = micro_entropy_temperature(&t, 18, 10, 64).unwrap();
    assert!(hot.inv_t.hi() < &algotherm::Dyadic::zero());
}
