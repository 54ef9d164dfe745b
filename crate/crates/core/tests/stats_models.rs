mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ltwist::bsd::periods;
use ltwist::curve::{an_table, presets, Provider};
use ltwist::lfunc::l_derivative;
use ltwist::models::{class_number, granville_count, gross_zagier_height, heegner_sum_model, GranvilleBox, HeegnerParams, Quadrants};
use ltwist::stats::{cumulative_distribution, fit_k, fit_power_exponent, predicted_ratio, tail_slope, RatioRow};
use ltwist::twist::{is_fundamental, twisted_coefficients, Parity, TwistRecord, Vanishing};

fn record(d: i64, value: f64, vanishing: Vanishing) -> TwistRecord {
    let normalised = value / (d.unsigned_abs() as f64).ln();
    TwistRecord { d, parity: Parity::Odd, order: 1, value, error: 1e-6, normalised, vanishing, terms: 10 }
}

proptest! {
    #[test]
    fn distribution_ignores_record_order(values in prop::collection::vec((0.0f64..5.0, any::<bool>()), 1..60), seed in any::<u64>()) {
        let recs: Vec<TwistRecord> = values
            .iter()
            .enumerate()
            .map(|(i, &(v, zero))| record(13 + 4 * i as i64, if zero { 0.0 } else { v }, if zero { Vanishing::Yes } else { Vanishing::No }))
            .collect();
        let mut shuffled = recs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        for normalise in [false, true] {
            prop_assert_eq!(cumulative_distribution(&recs, normalise).unwrap(), cumulative_distribution(&shuffled, normalise).unwrap());
        }
    }

    #[test]
    fn fit_k_round_trip(k in -3.0f64..1.0, pick in prop::collection::vec(0usize..17, 2..17)) {
        let short = presets::congruent().short_model().unwrap();
        let primes = [5u64, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97, 929, 937, 941, 953, 977, 997];
        let mut ps: Vec<u64> = pick.iter().map(|&i| primes[i]).collect();
        ps.sort_unstable();
        ps.dedup();
        prop_assume!(ps.len() >= 2);
        let rows: Vec<RatioRow> = ps
            .iter()
            .map(|&p| {
                let ap = ltwist::curve::ap_good(&short, p).unwrap();
                let c = predicted_ratio(p, ap, k);
                RatioRow { p, ap, residues: 0, nonresidues: 1, observed: Some(c), predicted: c }
            })
            .collect();
        let fit = fit_k(&rows).unwrap();
        prop_assert!((fit.estimate - k).abs() < 1e-9);
    }

    #[test]
    fn power_fit_recovers_noise_free_exponent(a in 0.2f64..1.3, c in 0.5f64..5.0) {
        let counts: Vec<(f64, f64)> = (0..10).map(|i| 1e3 * 2f64.powi(i)).map(|x| (x, c * x.powf(a))).collect();
        let fit = fit_power_exponent(&counts).unwrap();
        prop_assert!((fit.overall.estimate - a).abs() < 1e-9 && (fit.upper.estimate - a).abs() < 1e-9);
    }

    #[test]
    fn gross_zagier_is_linear_in_the_derivative(l1p in 0.0f64..50.0, s in 0.0f64..10.0) {
        let one = gross_zagier_height(-7, 0.8, 0.25, l1p, None).unwrap();
        let scaled = gross_zagier_height(-7, 0.8, 0.25, s * l1p, None).unwrap();
        prop_assert!((scaled - s * one).abs() <= 1e-12 * (1.0 + scaled.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn granville_matches_divisor_oracle(a in -8i64..8, b in -8i64..8, dlo in 1u64..20, dspan in 0u64..150, lo in 0u64..30, span in 0u64..45, all in any::<bool>()) {
        let bx = GranvilleBox {
            a,
            b,
            d_range: (dlo, dlo + dspan),
            x_range: (lo, lo + span),
            quadrants: if all { Quadrants::All } else { Quadrants::Positive },
            fundamental_only: false,
        };
        prop_assume!(bx.pairs() <= 10_000);
        prop_assert_eq!(granville_count(&bx, 10_000).unwrap(), common::granville_oracle(&bx));
    }
}

#[test]
fn tail_slope_standard_error_covers_planted_exponent() {
    let trials = 200;
    let mut covered = 0;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = if seed % 2 == 0 { 1.5 } else { 0.5 };
        let xs: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>().powf(1.0 / a)).collect();
        let fit = tail_slope(&xs, 0.1).unwrap();
        if (fit.estimate - a).abs() <= 2.0 * fit.std_error {
            covered += 1;
        }
    }
    assert!(covered as f64 >= 0.95 * trials as f64, "{covered}/{trials}");
}

#[test]
fn heegner_mean_within_three_standard_errors() {
    for h in [2, 10, 100] {
        let s = heegner_sum_model(HeegnerParams { h, trials: 10_000, seed: 77 }).unwrap();
        let se = (s.variance / s.trials as f64).sqrt();
        assert!((s.mean - h as f64).abs() <= 3.0 * se, "h = {h}: {} +- {se}", s.mean);
    }
}

#[test]
fn class_number_one_discriminants() {
    let ones: Vec<i64> = (3..=1000).map(|n| -n).filter(|&d| is_fundamental(d) && class_number(d).unwrap() == 1).collect();
    assert_eq!(ones, vec![-3, -4, -7, -8, -11, -19, -43, -67, -163]);
}

#[test]
fn gross_zagier_height_for_an_eleven_twist() {
    let c = presets::x0_11();
    let table = an_table(&c, 2000, Provider::Eta).unwrap();
    let l1 = l_derivative(&table, 11.0, 0, 1e-12).unwrap().value;
    let s = c.short_model().unwrap();
    let lattice = periods(num(s.a), num(s.b)).unwrap().area;
    let d = -7;
    let n = 11.0 * 49.0;
    let view = twisted_coefficients(&table, &c, d, 2000).unwrap();
    let coarse = l_derivative(&view, n, 1, 1e-6).unwrap().value;
    let fine = l_derivative(&view, n, 1, 1e-12).unwrap().value;
    let h = gross_zagier_height(d, lattice, l1, fine, Some(11)).unwrap();
    let h_coarse = gross_zagier_height(d, lattice, l1, coarse, Some(11)).unwrap();
    assert!(h > 0.0);
    assert!((h - h_coarse).abs() < 1e-5 * h, "{h} {h_coarse}");
}

fn num(r: num_rational::Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
