//! Central values and derivatives `L^(r)(E,1)/r!` from the smoothed
//! approximate functional equation
//!
//! ```text
//! L^(r)(E,1)/r! = 2 sum_n a_n/n G_r(2 pi n / sqrt N)      (eps = (-1)^r)
//! ```
//!
//! with a certified tail: `|a_n|/n <= d(n)/sqrt(n)` is at most `sqrt 3`, and at
//! most 1 once `n >= 1260`, and `exp(x) G_r(x)` decreases, so
//! `sum_{n>M} |a_n|/n G_r(x_n) <= B sqrt(N)/(2 pi) G_r(x_M)`.

pub mod weight;

pub use weight::{weight_g, WeightFnParams, WeightTable};

use crate::curve::DirichletCoefficients;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const CHUNK: usize = 4096;
/// How often the running `exp(-x_n)` product is recomputed from scratch.
const EXP_RESYNC: usize = 512;
/// Relative floating-point error charged per unit of `sum |terms|`.
const ROUNDING: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LValue {
    pub order: u32,
    /// `L^(r)(E,1) / r!`.
    pub value: f64,
    pub error: f64,
    pub terms: usize,
    pub conductor: f64,
}

fn divisor_constant(m: usize) -> f64 {
    if m >= 1260 {
        1.0
    } else {
        3f64.sqrt()
    }
}

/// Certified bound on `2 sum_{n>m} |a_n|/n G_r(2 pi n / sqrt N)`.
pub fn tail_bound(conductor: f64, r: u32, m: usize) -> f64 {
    let s = conductor.sqrt() / TWO_PI;
    let x = (m.max(1)) as f64 / s;
    let g = if x < weight::TABLE_START {
        weight::weight_series(r as usize, x)
    } else {
        WeightTable::get(r as usize).scaled(x) * (-x).exp()
    };
    2.0 * divisor_constant(m) * s * g
}

/// Smallest `M` whose certified tail is at most `target`.
pub fn terms_needed(conductor: f64, r: u32, target: f64) -> usize {
    let s = conductor.sqrt() / TWO_PI;
    let lln = conductor.max(3.0).ln().ln().max(0.0);
    let guess = (s * ((1.0 / target).ln().max(0.0) + r as f64 * lln + 3.0)).ceil().max(1.0) as usize;
    let (mut lo, mut hi) = (1usize, guess);
    while tail_bound(conductor, r, hi) > target {
        lo = hi;
        hi *= 2;
    }
    // tail(lo) > target >= tail(hi) unless lo == 1 already suffices.
    if tail_bound(conductor, r, lo) <= target {
        return lo;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail_bound(conductor, r, mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Walks `n = 1..=m`, handing each `(a_n, x_n, exp(-x_n))` to `visit`.
fn for_each_term(coeffs: &dyn DirichletCoefficients, scale: f64, m: usize, mut visit: impl FnMut(usize, i32, f64, f64)) {
    let mut buf = vec![0i32; CHUNK];
    let q = (-scale).exp();
    let mut e = 1.0;
    let mut n = 1;
    while n <= m {
        let len = CHUNK.min(m - n + 1);
        coeffs.fill(n, &mut buf[..len]);
        for (i, &a) in buf[..len].iter().enumerate() {
            let k = n + i;
            let x = k as f64 * scale;
            e = if k % EXP_RESYNC == 1 { (-x).exp() } else { e * q };
            if a != 0 {
                visit(k, a, x, e);
            }
        }
        n += len;
    }
}

/// `L^(r)(E,1)/r!` to within `target_err`, assuming the sign of the
/// functional equation is `(-1)^r` and lower derivatives vanish.
pub fn l_derivative(coeffs: &dyn DirichletCoefficients, conductor: f64, r: u32, target_err: f64) -> Result<LValue> {
    if !(target_err > 0.0) {
        return Err(Error::InvalidArgument(format!("target error must be positive, got {target_err}")));
    }
    if r as usize > weight::MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {r} exceeds the supported maximum {}", weight::MAX_ORDER)));
    }
    let m = terms_needed(conductor, r, 0.5 * target_err);
    l_derivative_with_terms(coeffs, conductor, r, m)
}

/// Same series truncated at exactly `m` terms.
pub fn l_derivative_with_terms(coeffs: &dyn DirichletCoefficients, conductor: f64, r: u32, m: usize) -> Result<LValue> {
    if m > coeffs.bound() {
        return Err(Error::InsufficientTerms { required: m, available: coeffs.bound() });
    }
    let table = WeightTable::get(r as usize);
    let scale = TWO_PI / conductor.sqrt();
    let mut sum = CompensatedSum::default();
    let mut abs = 0.0;
    for_each_term(coeffs, scale, m, |n, a, x, e| {
        let t = a as f64 / n as f64 * table.eval_with_exp(x, e);
        sum.add(t);
        abs += t.abs();
    });
    Ok(LValue {
        order: r,
        value: 2.0 * sum.value(),
        error: tail_bound(conductor, r, m) + 2.0 * ROUNDING * abs,
        terms: m,
        conductor,
    })
}

/// Residuals of the two sign hypotheses from [`infer_sign`].
#[derive(Debug, Clone, Copy)]
pub struct SignResiduals {
    pub plus: f64,
    pub minus: f64,
    /// Rounding noise of the sums.
    pub noise: f64,
}

/// Scales `delta` used by [`infer_sign`].
pub const SIGN_DELTAS: [f64; 2] = [1.1, 1.3];

/// Evaluates `f(delta) = sum a_n/n exp(-2 pi n delta / sqrt N)` at each
/// `delta` and its reciprocal, and measures how far `f(delta) + eps f(1/delta)`
/// moves between the deltas for `eps = +1` and `eps = -1`.
pub fn sign_residuals(coeffs: &dyn DirichletCoefficients, conductor: f64, deltas: &[f64], target: f64) -> Result<SignResiduals> {
    let s = conductor.sqrt() / TWO_PI;
    let smallest = deltas.iter().map(|d| d.min(1.0 / d)).fold(f64::INFINITY, f64::min);
    // Tail of f at scale c: B * exp(-c M / s) * s / c.
    let mut m = ((s / smallest) * ((s / smallest / target).max(1.0).ln() + 1.0)).ceil() as usize;
    while 3f64.sqrt() * (-(m as f64) * smallest / s).exp() * s / smallest > target {
        m += m / 8 + 1;
    }
    if m > coeffs.bound() {
        return Err(Error::InsufficientTerms { required: m, available: coeffs.bound() });
    }
    let scales: Vec<f64> = deltas.iter().flat_map(|&d| [d, 1.0 / d]).collect();
    let mut sums = vec![CompensatedSum::default(); scales.len()];
    let mut abs = 0.0;
    let base = 1.0 / s;
    let mut buf = vec![0i32; CHUNK];
    let qs: Vec<f64> = scales.iter().map(|c| (-c * base).exp()).collect();
    let mut es = vec![1.0; scales.len()];
    let mut n = 1;
    while n <= m {
        let len = CHUNK.min(m - n + 1);
        coeffs.fill(n, &mut buf[..len]);
        for (i, &a) in buf[..len].iter().enumerate() {
            let k = n + i;
            for j in 0..scales.len() {
                es[j] = if k % EXP_RESYNC == 1 { (-(k as f64) * scales[j] * base).exp() } else { es[j] * qs[j] };
            }
            if a != 0 {
                let c = a as f64 / k as f64;
                for j in 0..scales.len() {
                    sums[j].add(c * es[j]);
                }
                abs += c.abs() * es.iter().cloned().fold(0.0, f64::max);
            }
        }
        n += len;
    }
    let f: Vec<f64> = sums.iter().map(|s| s.value()).collect();
    let combo = |eps: f64, j: usize| f[2 * j] + eps * f[2 * j + 1];
    let spread = |eps: f64| {
        let vals: Vec<f64> = (0..deltas.len()).map(|j| combo(eps, j)).collect();
        vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - vals.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    };
    Ok(SignResiduals { plus: spread(1.0), minus: spread(-1.0), noise: ROUNDING * abs })
}

/// Root number inferred from the `delta`-independence of the theta-series
/// identity. Starts at accuracy `1e-6` and tightens to `1e-9` and `1e-12`
/// while both hypotheses remain within noise, which happens when the
/// wrong-sign residual is itself small (high-order vanishing).
pub fn infer_sign(coeffs: &dyn DirichletCoefficients, conductor: f64) -> Result<i8> {
    let mut last = None;
    for target in [1e-6, 1e-9, 1e-12] {
        match infer_sign_with(coeffs, conductor, &SIGN_DELTAS, target) {
            Err(e @ Error::AmbiguousSign { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Single attempt at a fixed accuracy; ambiguous when both residuals are
/// below `10 * target` plus rounding noise.
pub fn infer_sign_with(coeffs: &dyn DirichletCoefficients, conductor: f64, deltas: &[f64], target: f64) -> Result<i8> {
    let res = sign_residuals(coeffs, conductor, deltas, target)?;
    let limit = 10.0 * target + res.noise;
    if res.plus < limit && res.minus < limit {
        return Err(Error::AmbiguousSign { plus: res.plus, minus: res.minus });
    }
    Ok(if res.plus < res.minus { 1 } else { -1 })
}

/// Vanishing threshold at order `r`: `tau` for `r = 0`, and
/// `tau (log N)^(r-1) / r!` above, following the growth of typical values.
pub fn rank_threshold(tau: f64, conductor: f64, r: u32) -> f64 {
    if r == 0 {
        return tau;
    }
    let fact: f64 = (1..=r).map(|i| i as f64).product();
    tau * conductor.ln().powi(r as i32 - 1) / fact
}

/// Smallest order of the given parity whose value clears its threshold.
pub fn classify_rank(coeffs: &dyn DirichletCoefficients, conductor: f64, sign: i8, tau: f64, max_order: u32) -> Result<LValue> {
    let mut r = if sign == 1 { 0 } else { 1 };
    loop {
        let threshold = rank_threshold(tau, conductor, r);
        let v = l_derivative(coeffs, conductor, r, threshold / 10.0)?;
        if v.value.abs() > threshold || r + 2 > max_order {
            return Ok(v);
        }
        r += 2;
    }
}
