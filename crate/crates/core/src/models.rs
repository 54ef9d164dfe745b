//! Discretisation heuristics: class numbers, the Heegner unit-vector model,
//! the Gross–Zagier height, Granville's tuple count and rank-count growth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::arith;
use crate::error::{Error, Result};
use crate::twist::is_fundamental;

/// Class number of the imaginary quadratic order of discriminant `d` by
/// counting reduced forms `(a, b, c)`: `|b| <= a <= c`, with `b >= 0`
/// whenever `|b| = a` or `a = c`.
pub fn class_number(d: i64) -> Result<u64> {
    if d >= 0 || !is_fundamental(d) {
        return Err(Error::InvalidArgument(format!("class number needs a negative fundamental discriminant, got {d}")));
    }
    let n = -d;
    let mut h = 0;
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            h += 1;
        }
        a += 1;
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeegnerParams {
    pub h: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeegnerStats {
    pub h: usize,
    pub trials: usize,
    /// Mean of the squared length of the sum.
    pub mean: f64,
    pub variance: f64,
}

/// Squared length of the sum of `h` independent uniform unit vectors in `R^h`,
/// averaged over trials. Trial `i` draws from its own ChaCha stream, so the
/// result does not depend on the worker count.
pub fn heegner_sum_model(params: HeegnerParams) -> Result<HeegnerStats> {
    let HeegnerParams { h, trials, seed } = params;
    if h == 0 || trials == 0 {
        return Err(Error::InvalidArgument("h and trials must be positive".into()));
    }
    let lengths: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut sum = vec![0.0f64; h];
            let mut v = vec![0.0f64; h];
            for _ in 0..h {
                let mut norm2 = 0.0;
                for x in v.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                    norm2 += *x * *x;
                }
                let inv = norm2.sqrt().recip();
                for (s, x) in sum.iter_mut().zip(&v) {
                    *s += x * inv;
                }
            }
            sum.iter().map(|s| s * s).sum::<f64>()
        })
        .collect();
    let n = trials as f64;
    let mean = lengths.iter().sum::<f64>() / n;
    let variance = if trials > 1 { lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(HeegnerStats { h, trials, mean, variance })
}

/// `sqrt|d| L(E,1) L'(E_d,1) / (4 Omega_vol)`. When `conductor` is given, `d`
/// must be a negative fundamental discriminant that is a square mod `4N`.
pub fn gross_zagier_height(d: i64, omega_vol: f64, l1: f64, l1p: f64, conductor: Option<u64>) -> Result<f64> {
    if !(omega_vol > 0.0) {
        return Err(Error::InvalidArgument(format!("lattice area must be positive, got {omega_vol}")));
    }
    if let Some(n) = conductor {
        if d >= 0 || !is_fundamental(d) {
            return Err(Error::InvalidArgument(format!("{d} is not a negative fundamental discriminant")));
        }
        let m = 4 * n as i64;
        let r = d.rem_euclid(m);
        if !(0..m).any(|b| (b * b) % m == r) {
            return Err(Error::InvalidArgument(format!("{d} is not a square mod {m}")));
        }
    }
    Ok((d.unsigned_abs() as f64).sqrt() * l1 * l1p / (4.0 * omega_vol))
}

/// Which sign quadrants of `(u, v)` to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrants {
    Positive,
    All,
}

/// Search box for `d w^2 = v (u^3 + A u v^2 + B v^3)`. Ranges are inclusive
/// and bound `|d|`, `|u|` and `|v|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GranvilleBox {
    pub a: i64,
    pub b: i64,
    pub d_range: (u64, u64),
    pub x_range: (u64, u64),
    pub quadrants: Quadrants,
    /// Count only `d` that are fundamental discriminants.
    pub fundamental_only: bool,
}

pub const DEFAULT_GRANVILLE_BUDGET: u64 = 50_000_000;

impl GranvilleBox {
    pub fn pairs(&self) -> u64 {
        let (lo, hi) = self.x_range;
        let side = if hi >= lo { hi - lo + 1 } else { 0 };
        let per_axis = match self.quadrants {
            Quadrants::Positive => side,
            Quadrants::All => 2 * side - u64::from(lo == 0),
        };
        per_axis * per_axis
    }

    fn axis(&self) -> Vec<i64> {
        let (lo, hi) = self.x_range;
        let mut out: Vec<i64> = (lo..=hi).map(|x| x as i64).collect();
        if self.quadrants == Quadrants::All {
            out.extend((lo.max(1)..=hi).map(|x| -(x as i64)));
        }
        out
    }

    fn value(&self, u: i64, v: i64) -> i128 {
        let (u, v) = (u as i128, v as i128);
        v * (u * u * u + self.a as i128 * u * v * v + self.b as i128 * v * v * v)
    }

    fn accepts(&self, d: i128) -> bool {
        let m = d.unsigned_abs();
        m >= self.d_range.0 as u128 && m <= self.d_range.1 as u128 && (!self.fundamental_only || is_fundamental(d as i64))
    }
}

/// Exhaustive count of tuples `(d, u, v, w)` in the box: each nonzero value
/// of the right-hand side is split as square-free part times a square.
pub fn granville_count(bx: &GranvilleBox, budget: u64) -> Result<u64> {
    let pairs = bx.pairs();
    if pairs > budget {
        return Err(Error::Budget(format!("{pairs} (u, v) pairs requested, budget is {budget}")));
    }
    let axis = bx.axis();
    Ok(axis
        .par_iter()
        .map(|&u| {
            axis.iter()
                .filter(|&&v| {
                    let r = bx.value(u, v);
                    r != 0 && bx.accepts(arith::squarefree_decomposition(r).0)
                })
                .count() as u64
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// `X^{3/4}` for even twists of rank at least 2.
    EvenRank2,
    /// `X^{1 - 3 theta / 2}`.
    Theta(f64),
    /// Granville's bound `X^{1/2 + 1/(2r)}`.
    Granville(u32),
}

/// Growth of the number of twists with `|d| < X` of the scheme's rank,
/// with log factors and constants dropped.
pub fn rank_count_prediction(x: f64, scheme: Scheme) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::InvalidArgument(format!("X must be at least 1, got {x}")));
    }
    let e = match scheme {
        Scheme::EvenRank2 => 0.75,
        Scheme::Theta(t) if (0.0..=0.5).contains(&t) => 1.0 - 1.5 * t,
        Scheme::Theta(t) => return Err(Error::InvalidArgument(format!("theta = {t} outside [0, 1/2]"))),
        Scheme::Granville(0) => return Err(Error::InvalidArgument("rank must be at least 1".into())),
        Scheme::Granville(r) => 0.5 + 0.5 / r as f64,
    };
    Ok(x.powf(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_class_numbers() {
        assert_eq!(class_number(-3).unwrap(), 1);
        assert_eq!(class_number(-4).unwrap(), 1);
        assert_eq!(class_number(-23).unwrap(), 3);
        assert_eq!(class_number(-47).unwrap(), 5);
        assert_eq!(class_number(-84).unwrap(), 4);
        assert!(class_number(5).is_err());
        assert!(class_number(-12 * 4).is_err());
    }

    #[test]
    fn single_vector_has_unit_length() {
        let s = heegner_sum_model(HeegnerParams { h: 1, trials: 50, seed: 3 }).unwrap();
        assert!((s.mean - 1.0).abs() < 1e-15 && s.variance < 1e-28);
    }

    #[test]
    fn heegner_seed_determinism() {
        let p = HeegnerParams { h: 7, trials: 100, seed: 11 };
        assert_eq!(heegner_sum_model(p).unwrap(), heegner_sum_model(p).unwrap());
        assert_ne!(heegner_sum_model(p).unwrap(), heegner_sum_model(HeegnerParams { seed: 12, ..p }).unwrap());
    }

    #[test]
    fn gross_zagier_arithmetic() {
        assert_eq!(gross_zagier_height(-4, 1.0, 2.0, 3.0, None).unwrap(), 3.0);
        assert_eq!(gross_zagier_height(-7, 1.0, 2.0, 0.0, Some(11)).unwrap(), 0.0);
        assert!(gross_zagier_height(-7, 0.0, 2.0, 3.0, None).is_err());
        assert!(gross_zagier_height(-3, 1.0, 2.0, 3.0, Some(11)).is_err());
    }

    #[test]
    fn granville_hand_box() {
        let bx = GranvilleBox { a: 0, b: -1, d_range: (1, 10), x_range: (1, 2), quadrants: Quadrants::Positive, fundamental_only: false };
        assert_eq!(granville_count(&bx, 100).unwrap(), 1);
        let empty = GranvilleBox { x_range: (3, 2), ..bx };
        assert_eq!(granville_count(&empty, 100).unwrap(), 0);
        let all = GranvilleBox { quadrants: Quadrants::All, ..bx };
        assert_eq!(all.pairs(), 16);
        assert!(matches!(granville_count(&all, 10), Err(Error::Budget(_))));
    }

    #[test]
    fn predictions() {
        let t = rank_count_prediction(1e6, Scheme::Theta(1.0 / 6.0)).unwrap();
        assert!((t / 10f64.powf(4.5) - 1.0).abs() < 1e-12);
        let g = rank_count_prediction(1e6, Scheme::Granville(3)).unwrap();
        assert!((g / 1e4 - 1.0).abs() < 1e-12);
        assert_eq!(rank_count_prediction(1.0, Scheme::EvenRank2).unwrap(), 1.0);
        assert!(rank_count_prediction(1e6, Scheme::Theta(0.6)).is_err());
    }
}
