//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ltwist::models::{GranvilleBox, Quadrants};

/// `a_n` for `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` by testing
/// every pair `(x, y)` mod `p`.
pub fn direct_coefficients(ainvs: [i64; 5], bad: &[(u64, i64)], m: usize) -> Vec<f64> {
    let [a1, a2, a3, a4, a6] = ainvs;
    let ap = |p: u64| -> i64 {
        if let Some(&(_, a)) = bad.iter().find(|(q, _)| *q == p) {
            return a;
        }
        let p = p as i64;
        let mut count = 1;
        for x in 0..p {
            for y in 0..p {
                if (y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6).rem_euclid(p) == 0 {
                    count += 1;
                }
            }
        }
        p + 1 - count
    };
    let mut a = vec![0.0; m + 1];
    a[1] = 1.0;
    let mut prime_powers: Vec<(usize, f64)> = Vec::new();
    let mut is_composite = vec![false; m + 1];
    for p in 2..=m {
        if is_composite[p] {
            continue;
        }
        for k in (p * p..=m).step_by(p) {
            is_composite[k] = true;
        }
        let t = ap(p as u64) as f64;
        let good = !bad.iter().any(|(q, _)| *q == p as u64);
        let (mut prev, mut cur, mut q) = (1.0, t, p);
        loop {
            prime_powers.push((q, cur));
            if q > m / p {
                break;
            }
            let next = t * cur - if good { p as f64 * prev } else { 0.0 };
            prev = cur;
            cur = next;
            q *= p;
        }
    }
    for &(q, v) in &prime_powers {
        a[q] = v;
    }
    for n in 2..=m {
        if a[n] != 0.0 || prime_powers.iter().any(|&(q, _)| q == n) {
            continue;
        }
        let p = (2..=n).find(|p| n % p == 0).unwrap();
        let mut q = 1;
        while n % (q * p) == 0 {
            q *= p;
        }
        if q != n {
            a[n] = a[q] * a[n / q];
        }
    }
    a
}

pub fn squarefree(n: u64) -> bool {
    (2..).take_while(|k| k * k <= n).all(|k| n % (k * k) != 0)
}

/// Tuples found by trying every admissible `d` as a divisor of the value.
pub fn granville_oracle(bx: &GranvilleBox) -> u64 {
    let (lo, hi) = (bx.x_range.0 as i64, bx.x_range.1 as i64);
    let axis: Vec<i64> = match bx.quadrants {
        Quadrants::Positive => (lo..=hi).collect(),
        Quadrants::All => (-hi..=hi).filter(|x| x.abs() >= lo).collect(),
    };
    let mut count = 0;
    for &u in &axis {
        for &v in &axis {
            let r = v as i128 * ((u * u * u) as i128 + (bx.a * u * v * v) as i128 + (bx.b * v * v * v) as i128);
            for d in bx.d_range.0..=bx.d_range.1 {
                for s in [1i128, -1] {
                    let sd = s * d as i128;
                    if d == 0 || !squarefree(d) || r % sd != 0 || r / sd <= 0 {
                        continue;
                    }
                    let q = r / sd;
                    let w = (q as f64).sqrt().round() as i128;
                    if (w - 1..=w + 1).any(|w| w >= 0 && w * w == q) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

