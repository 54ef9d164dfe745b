use std::sync::OnceLock;

use proptest::prelude::*;

use ltwist::curve::{an_table, presets, CoefficientTable, Provider};
use ltwist::lfunc::{infer_sign_with, l_derivative, l_derivative_with_terms, terms_needed, weight_g};
use ltwist::twist::{enumerate_fundamental, scan, twist_parity, twisted_coefficients, Parity, ScanOptions, Signs, Vanishing};
use ltwist::Error;

const X: u64 = 5000;

fn table() -> &'static CoefficientTable {
    static T: OnceLock<CoefficientTable> = OnceLock::new();
    T.get_or_init(|| an_table(&presets::x0_11(), 250_000, Provider::Eta).unwrap())
}

fn twists() -> Vec<(i64, Parity)> {
    let c = presets::x0_11();
    enumerate_fundamental(X, Signs::Both).into_iter().filter_map(|d| twist_parity(&c, d).ok().map(|p| (d, p))).collect()
}

fn sign_with(d: i64, deltas: &[f64]) -> i8 {
    let c = presets::x0_11();
    let view = twisted_coefficients(table(), &c, d, table().len()).unwrap();
    let n = 11.0 * (d as f64).powi(2);
    let mut last = None;
    for target in [1e-6, 1e-9, 1e-12] {
        match infer_sign_with(&view, n, deltas, target) {
            Err(e @ Error::AmbiguousSign { .. }) => last = Some(e),
            other => return other.unwrap(),
        }
    }
    panic!("{last:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn doubling_the_series_stays_within_the_bound(i in 0usize..1000) {
        let c = presets::x0_11();
        let all = twists();
        let (d, parity) = all[i * all.len() / 1000];
        let n = 11.0 * (d as f64).powi(2);
        let r = parity.order();
        let m = terms_needed(n, r, 1e-4);
        let view = twisted_coefficients(table(), &c, d, 2 * m).unwrap();
        let short = l_derivative_with_terms(&view, n, r, m).unwrap();
        let long = l_derivative_with_terms(&view, n, r, 2 * m).unwrap();
        prop_assert!((short.value - long.value).abs() <= short.error, "d = {}: {} vs {} (bound {})", d, short.value, long.value, short.error);
    }

    #[test]
    fn sign_does_not_depend_on_the_deltas(i in 0usize..1000) {
        let all = twists();
        let (d, parity) = all[i * all.len() / 1000];
        let a = sign_with(d, &[1.05, 1.2]);
        let b = sign_with(d, &[1.1, 1.3]);
        prop_assert_eq!(a, b);
        prop_assert_eq!(a, parity.sign());
    }
}

#[test]
fn second_derivative_positive_on_even_vanishing_twists() {
    let c = presets::x0_11();
    let opts = ScanOptions { parity: Some(Parity::Even), ..Default::default() };
    let report = scan(&c, X, &opts).unwrap();
    let vanishing: Vec<i64> = report.records.iter().filter(|r| r.vanishing == Vanishing::Yes).map(|r| r.d).collect();
    assert!(vanishing.len() >= 20, "{}", vanishing.len());
    for d in vanishing {
        let n = 11.0 * (d as f64).powi(2);
        let view = twisted_coefficients(table(), &c, d, table().len()).unwrap();
        let v = l_derivative(&view, n, 2, 1e-4).unwrap();
        assert!(v.value - v.error > 0.0, "d = {d}: L''/2 = {} +- {}", v.value, v.error);
    }
}

#[test]
fn weight_functions_positive_and_decreasing() {
    for r in 0..=4 {
        let mut prev = f64::INFINITY;
        for k in 1..60 {
            let g = weight_g(r, k as f64 * 0.37).unwrap();
            assert!(g > 0.0 && g < prev, "r = {r}, x = {}", k as f64 * 0.37);
            prev = g;
        }
    }
}
