//! The weight functions
//!
//! ```text
//! G_0(x) = exp(-x)
//! G_r(x) = 1/(r-1)! * int_1^inf (log t)^(r-1) exp(-x t) dt / t      (r >= 1)
//! ```
//!
//! Below the crossover `x0` they are evaluated as the residue of
//! `Gamma(s) s^-r x^-s` at `s = 0` plus the entire part
//! `sum_k (-1)^(k+r) x^k / (k! k^r)`. Above it, `G_1` comes from the continued
//! fraction of `E_1` and higher orders from quadrature of
//! `exp(-x)/(r-1)! * int_0^inf log1p(u/x)^(r-1) exp(-u) / (x+u) du`.
//!
//! Inner loops use [`WeightTable`], piecewise Chebyshev fits of
//! `h_r(x) = exp(x) G_r(x)` on unit intervals.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numeric;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Number of Taylor coefficients of `Gamma(1+s)` kept.
pub const GAMMA_DEPTH: usize = 12;

/// Largest order with a precomputed table.
pub const MAX_ORDER: usize = 8;

/// Parameters of the direct evaluator.
#[derive(Debug, Clone)]
pub struct WeightFnParams {
    pub gamma: f64,
    /// Taylor coefficients `g_j` of `Gamma(1+s) = sum g_j s^j`; equivalently
    /// the Laurent coefficients of `Gamma(s)` shifted by one.
    pub gamma_taylor: [f64; GAMMA_DEPTH],
    /// Series/quadrature switch point for orders 0 and 1; see
    /// [`WeightFnParams::crossover_for`].
    pub crossover: f64,
    pub rel_tol: f64,
}

impl WeightFnParams {
    /// The entire part of the series cancels more heavily as `r` grows, so
    /// the switch point moves left for higher orders.
    pub fn crossover_for(&self, r: usize) -> f64 {
        match r {
            0 | 1 => self.crossover,
            2..=4 => self.crossover / 2.0,
            _ => self.crossover / 4.0,
        }
    }
}

/// `zeta(k)` for integer `k >= 2` by Euler–Maclaurin summation.
pub fn zeta(k: u32) -> f64 {
    let k = k as f64;
    let n = 20.0f64;
    let mut s: f64 = (1..20).map(|i| (i as f64).powf(-k)).sum();
    s += n.powf(1.0 - k) / (k - 1.0) + 0.5 * n.powf(-k);
    // Bernoulli corrections B_{2j}/(2j)! * k(k+1)...(k+2j-2) n^(-k-2j+1).
    const B: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
    let mut rising = k;
    let mut fact = 2.0;
    for (j, b) in B.iter().enumerate() {
        let m = 2.0 * (j as f64 + 1.0);
        s += b / fact * rising * n.powf(-k - m + 1.0);
        rising *= (k + m - 1.0) * (k + m);
        fact *= (m + 1.0) * (m + 2.0);
    }
    s
}

impl Default for WeightFnParams {
    fn default() -> Self {
        // log Gamma(1+s) = -gamma s + sum_{k>=2} (-1)^k zeta(k) s^k / k.
        let mut l = [0.0; GAMMA_DEPTH];
        l[1] = -EULER_GAMMA;
        for (k, lk) in l.iter_mut().enumerate().skip(2) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *lk = sign * zeta(k as u32) / k as f64;
        }
        // Exponentiate the series: n g_n = sum_k k l_k g_{n-k}.
        let mut g = [0.0; GAMMA_DEPTH];
        g[0] = 1.0;
        for n in 1..GAMMA_DEPTH {
            g[n] = (1..=n).map(|k| k as f64 * l[k] * g[n - k]).sum::<f64>() / n as f64;
        }
        WeightFnParams { gamma: EULER_GAMMA, gamma_taylor: g, crossover: 4.0, rel_tol: 1e-13 }
    }
}

pub fn params() -> &'static WeightFnParams {
    static P: OnceLock<WeightFnParams> = OnceLock::new();
    P.get_or_init(WeightFnParams::default)
}

/// Residue plus entire-part expansion, accurate for small `x`.
pub fn weight_series(r: usize, x: f64) -> f64 {
    let g = &params().gamma_taylor;
    let lx = -x.ln();
    let mut residue = 0.0;
    let mut pow = 1.0;
    for i in 0..=r {
        residue += g[r - i] * pow;
        pow *= lx / (i + 1) as f64;
    }
    let mut sum = numeric::CompensatedSum::default();
    let mut xk = 1.0;
    for k in 1..200usize {
        xk *= x / k as f64;
        let mut term = xk / (k as f64).powi(r as i32);
        if (k + r) % 2 == 1 {
            term = -term;
        }
        sum.add(term);
        if xk < 1e-20 * (1.0 + sum.value().abs()) {
            break;
        }
    }
    residue + sum.value()
}

/// `exp(x) E_1(x)` by the modified Lentz continued fraction, for `x >= 1`.
fn scaled_e1(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `exp(x) G_r(x)` by quadrature, for `r >= 1`, `x > 0`.
fn scaled_quadrature(r: usize, x: f64) -> f64 {
    let fact: f64 = (1..r).map(|i| i as f64).product();
    let f = |u: f64| (u / x).ln_1p().powi(r as i32 - 1) * (-u).exp() / (x + u);
    let (v, _) = numeric::integrate(f, 0.0, 80.0, params().rel_tol);
    v / fact
}

/// `exp(x) G_r(x)` for `x >= 1` without tables.
fn scaled_direct(r: usize, x: f64) -> f64 {
    match r {
        0 => 1.0,
        1 => scaled_e1(x),
        _ => scaled_quadrature(r, x),
    }
}

/// Evaluates `G_r(x)` directly (no tables).
pub fn weight_g(r: i32, x: f64) -> Result<f64> {
    if r < 0 {
        return Err(Error::InvalidArgument(format!("weight order must be nonnegative, got {r}")));
    }
    let r = r as usize;
    if r == 0 {
        if x < 0.0 {
            return Err(Error::InvalidArgument("x must be nonnegative".into()));
        }
        return Ok((-x).exp());
    }
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidArgument(format!("G_{r} needs x > 0, got {x}")));
    }
    if r >= GAMMA_DEPTH {
        return Err(Error::InvalidArgument(format!("order {r} exceeds supported depth")));
    }
    if x < params().crossover_for(r) {
        Ok(weight_series(r, x))
    } else {
        Ok(scaled_direct(r, x) * (-x).exp())
    }
}

const CHEB_DEGREE: usize = 21;
/// Tables cover `[TABLE_START, TABLE_END)`.
pub const TABLE_START: f64 = 1.0;
pub const TABLE_END: f64 = 64.0;

/// Piecewise Chebyshev approximation of `exp(x) G_r(x)` on unit intervals.
pub struct WeightTable {
    pub order: usize,
    pieces: Vec<[f64; CHEB_DEGREE]>,
}

impl WeightTable {
    fn build(r: usize) -> WeightTable {
        let n = CHEB_DEGREE;
        let nodes: Vec<f64> = (0..n).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos()).collect();
        let pieces = (TABLE_START as usize..TABLE_END as usize)
            .map(|k| {
                let vals: Vec<f64> = nodes.iter().map(|t| scaled_direct(r, k as f64 + 0.5 + 0.5 * t)).collect();
                let mut c = [0.0; CHEB_DEGREE];
                for (i, ci) in c.iter_mut().enumerate() {
                    let s: f64 = (0..n)
                        .map(|j| vals[j] * (std::f64::consts::PI * i as f64 * (j as f64 + 0.5) / n as f64).cos())
                        .sum();
                    *ci = 2.0 * s / n as f64;
                }
                c[0] *= 0.5;
                c
            })
            .collect();
        WeightTable { order: r, pieces }
    }

    /// The shared table for order `r`.
    pub fn get(r: usize) -> &'static WeightTable {
        static TABLES: [OnceLock<WeightTable>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
        assert!(r <= MAX_ORDER, "weight tables support orders up to {MAX_ORDER}");
        TABLES[r].get_or_init(|| WeightTable::build(r))
    }

    /// `exp(x) G_r(x)`; falls back to direct evaluation outside the table.
    #[inline]
    pub fn scaled(&self, x: f64) -> f64 {
        if !(TABLE_START..TABLE_END).contains(&x) {
            if x < TABLE_START {
                return weight_series(self.order, x) * x.exp();
            }
            return scaled_direct(self.order, x);
        }
        let k = x as usize;
        let c = &self.pieces[k - TABLE_START as usize];
        let t = 2.0 * (x - k as f64) - 1.0;
        let t2 = 2.0 * t;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ci in c[1..].iter().rev() {
            let b0 = ci + t2 * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + t * b1 - b2
    }

    /// `G_r(x)` given `exp(-x)` already at hand.
    #[inline]
    pub fn eval_with_exp(&self, x: f64, exp_neg_x: f64) -> f64 {
        if x < TABLE_START {
            if self.order == 0 {
                return exp_neg_x;
            }
            return weight_series(self.order, x);
        }
        self.scaled(x) * exp_neg_x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `G_r` by brute-force quadrature of the defining integral in
    /// `t = exp(v)`: `int_0^inf v^(r-1) exp(-x e^v) dv / (r-1)!`.
    fn oracle(r: usize, x: f64) -> f64 {
        let fact: f64 = (1..r).map(|i| i as f64).product();
        let upper = (60.0 / x).ln().max(1.0) + 2.0;
        let (v, _) = numeric::integrate(|v: f64| v.powi(r as i32 - 1) * (-x * v.exp()).exp(), 0.0, upper, 1e-14);
        v / fact
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zeta_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2) - pi * pi / 6.0).abs() < 1e-15);
        assert!((zeta(4) - pi.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3) - 1.202_056_903_159_594_2).abs() < 1e-15);
    }

    #[test]
    fn gamma_taylor_coefficients() {
        let g = params().gamma_taylor;
        assert!((g[1] + EULER_GAMMA).abs() < 1e-16);
        let g2 = (EULER_GAMMA.powi(2) + std::f64::consts::PI.powi(2) / 6.0) / 2.0;
        assert!((g[2] - g2).abs() < 1e-15);
        let v: f64 = g.iter().enumerate().map(|(j, c)| c * 0.1f64.powi(j as i32)).sum();
        assert!((v - 0.951_350_769_866_873_2).abs() < 1e-11);
    }

    #[test]
    fn known_values() {
        assert_eq!(weight_g(0, 0.0).unwrap(), 1.0);
        assert!((weight_g(1, 1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-15);
        let x = 1e-3f64;
        let approx = (x.ln() + EULER_GAMMA).powi(2) / 2.0 + std::f64::consts::PI.powi(2) / 12.0;
        assert!((weight_g(2, x).unwrap() - approx).abs() < 1e-2);
        assert!(rel(weight_g(2, x).unwrap(), oracle(2, x)) < 1e-10);
        assert!(weight_g(-1, 1.0).is_err());
        assert!(weight_g(1, 0.0).is_err());
    }

    #[test]
    fn matches_quadrature_oracle() {
        for r in 1..=5 {
            for &x in &[0.01, 0.1, 0.5, 1.0, 2.0, 3.9, 4.0, 4.1, 7.5, 20.0, 35.0, 50.0] {
                let v = weight_g(r, x).unwrap();
                assert!(rel(v, oracle(r as usize, x)) < 1e-10, "r={r} x={x}");
            }
        }
    }

    #[test]
    fn crossover_consistency() {
        for r in 1..=5usize {
            let x0 = params().crossover_for(r);
            let series = weight_series(r, x0);
            let other = scaled_direct(r, x0) * (-x0).exp();
            assert!(rel(series, other) < 1e-10, "r={r}");
        }
    }

    #[test]
    fn tables_match_direct() {
        for r in 0..=4 {
            let t = WeightTable::get(r);
            let mut x = 0.05;
            while x < 70.0 {
                let direct = weight_g(r as i32, x).unwrap();
                let tab = t.eval_with_exp(x, (-x).exp());
                assert!(rel(tab, direct) < 1e-12, "r={r} x={x} {tab} {direct}");
                x += 0.137;
            }
        }
    }
}
