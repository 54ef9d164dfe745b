//! Statistics over scan output: cumulative distributions, power-law fits,
//! residuosity ratios and random-matrix exponent laws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::kronecker;
use crate::error::{Error, Result};
use crate::numeric::linear_fit;
use crate::twist::{TwistRecord, Vanishing};

/// A fitted exponent with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Human-readable description of the data range used.
    pub window: String,
}

/// Empirical distribution function of the nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    /// `(x, F(x))` at each distinct value, ascending.
    pub points: Vec<(f64, f64)>,
    /// Records excluded as vanishing.
    pub zeros: usize,
    /// Records excluded because they never resolved.
    pub unresolved: usize,
}

/// Step points of the empirical distribution of `values`, ties merged.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (i, &x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => points.push((x, f)),
        }
    }
    points
}

/// Cumulative distribution of scan values. Vanishing and unresolved records
/// are left out and counted; `normalise` uses `value / (log |d|)^r`.
pub fn cumulative_distribution(records: &[TwistRecord], normalise: bool) -> Result<Distribution> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to summarise".into()));
    }
    let zeros = records.iter().filter(|r| r.vanishing == Vanishing::Yes).count();
    let unresolved = records.iter().filter(|r| r.vanishing == Vanishing::Unresolved).count();
    Ok(Distribution { points: ecdf(&nonzero_values(records, normalise)), zeros, unresolved })
}

/// Number of vanishing records with `|d| < x`, for each `x` in `xs`.
pub fn vanishing_counts(records: &[TwistRecord], xs: &[u64]) -> Vec<(f64, f64)> {
    let mut ds: Vec<u64> = records.iter().filter(|r| r.vanishing == Vanishing::Yes).map(|r| r.d.unsigned_abs()).collect();
    ds.sort_unstable();
    xs.iter().map(|&x| (x as f64, ds.partition_point(|&d| d < x) as f64)).collect()
}

/// Overall and upper-half power-law fits of `count ~ c X^A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFit {
    pub overall: FitResult,
    pub upper: FitResult,
}

fn log_log_fit(points: &[(f64, f64)]) -> FitResult {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (_, slope, se) = linear_fit(&xs, &ys);
    let window = format!("X in [{}, {}], {} points", points[0].0, points[points.len() - 1].0, points.len());
    FitResult { estimate: slope, std_error: se, samples: points.len(), window }
}

/// Least squares of `log count` against `log X`, ignoring log factors.
/// The upper fit uses the top half of the range (at least three points).
pub fn fit_power_exponent(counts: &[(f64, f64)]) -> Result<PowerFit> {
    let mut pts: Vec<(f64, f64)> = counts.iter().copied().filter(|&(x, c)| x > 0.0 && c > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!("power fit needs at least 3 distinct positive points, got {}", pts.len())));
    }
    let k = pts.len().div_ceil(2).max(3);
    Ok(PowerFit { overall: log_log_fit(&pts), upper: log_log_fit(&pts[pts.len() - k..]) })
}

/// One row of the residuosity table for a prime `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub p: u64,
    pub ap: i64,
    /// Vanishing `d` that are nonzero squares mod `p`.
    pub residues: u64,
    pub nonresidues: u64,
    /// `residues / nonresidues`; `None` when there are no nonresidues.
    pub observed: Option<f64>,
    /// `((p+1+a_p)/(p+1-a_p))^k`.
    pub predicted: f64,
}

impl RatioRow {
    pub fn rho(&self) -> f64 {
        let p1 = self.p as f64 + 1.0;
        (p1 + self.ap as f64) / (p1 - self.ap as f64)
    }
}

pub const DEFAULT_K: f64 = -1.5;

pub fn predicted_ratio(p: u64, ap: i64, k: f64) -> f64 {
    let p1 = p as f64 + 1.0;
    ((p1 + ap as f64) / (p1 - ap as f64)).powf(k)
}

/// Counts the vanishing discriminants in residue and nonresidue classes mod
/// each prime (multiples of `p` are ignored) and pairs the ratio with its
/// prediction for exponent `k`.
pub fn residuosity_table(vanishing: &[i64], primes: &[u64], ap: impl Fn(u64) -> Result<i64>, k: f64) -> Result<Vec<RatioRow>> {
    if vanishing.is_empty() {
        return Err(Error::InvalidArgument("empty vanishing set".into()));
    }
    let mut rows = Vec::with_capacity(primes.len());
    for &p in primes {
        if p < 3 {
            return Err(Error::InvalidArgument(format!("residuosity needs odd primes, got {p}")));
        }
        let a = ap(p)?;
        let (mut res, mut non) = (0u64, 0u64);
        for &d in vanishing {
            match kronecker(d, p as i64) {
                1 => res += 1,
                -1 => non += 1,
                _ => {}
            }
        }
        let observed = (non > 0).then(|| res as f64 / non as f64);
        rows.push(RatioRow { p, ap: a, residues: res, nonresidues: non, observed, predicted: predicted_ratio(p, a, k) });
    }
    Ok(rows)
}

/// Fits `log E = k log rho` through the origin over rows with a defined,
/// positive observed ratio and `a_p != 0`.
pub fn fit_k(rows: &[RatioRow]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ap != 0)
        .filter_map(|r| r.observed.filter(|&e| e > 0.0).map(|e| (r.rho().ln(), e.ln())))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(format!("k fit needs at least 2 informative rows, got {}", pts.len())));
    }
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let k = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - k * p.0).powi(2)).sum();
    let se = (rss / (pts.len() - 1) as f64 / sxx).sqrt();
    Ok(FitResult { estimate: k, std_error: se, samples: pts.len(), window: format!("{} primes", pts.len()) })
}

/// Draws `count` integers `d` from `[1, range]` whose residue class mod each
/// prime is biased by `rho_p^(k/2)` on residues and `rho_p^(-k/2)` on
/// nonresidues, so that the residue/nonresidue ratio at `p` tends to
/// `rho_p^k`. Rejection sampling; deterministic for a given seed.
pub fn sample_biased_set(primes: &[(u64, i64)], k: f64, count: usize, range: i64, seed: u64) -> Vec<i64> {
    let weights: Vec<(i64, f64, f64)> = primes
        .iter()
        .map(|&(p, ap)| {
            let w = predicted_ratio(p, ap, k / 2.0);
            (p as i64, w, 1.0 / w)
        })
        .collect();
    let cap: f64 = weights.iter().map(|&(_, a, b)| a.max(b)).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d = rng.gen_range(1..=range);
        let w: f64 = weights
            .iter()
            .map(|&(p, res, non)| match kronecker(d, p) {
                1 => res,
                -1 => non,
                _ => 1.0,
            })
            .product();
        if rng.gen::<f64>() * cap < w {
            out.push(d);
        }
    }
    out
}

/// Lower-tail exponent of the empirical distribution of `values` (nonzero
/// magnitudes): the slope of `log F` against `log x` over the lowest `window`
/// fraction.
///
/// The `i`-th smallest of `n` values sits at `F = U_(i)`, a uniform order
/// statistic, so `log F` is replaced by its expectation `-(1/i + ... + 1/n)`;
/// the plain `log(i/n)` biases the slope downward at small ranks. Under a
/// pure power law `log U_(i)` is a sum of independent exponential spacings,
/// and the standard error is that covariance propagated through the
/// least-squares weights.
pub fn tail_slope(values: &[f64], window: f64) -> Result<FitResult> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidArgument(format!("window fraction {window} outside (0, 1]")));
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).filter(|&x| x > 0.0 && x.is_finite()).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    let k = ((n as f64) * window).floor() as usize;
    if k < 20 {
        return Err(Error::InvalidArgument(format!("tail window holds {k} points; at least 20 are needed")));
    }
    // y_i = E[log U_(i)] = -sum_{j=i}^{n} 1/j, accumulated from the top.
    let mut y = vec![0.0; n + 1];
    let mut acc = 0.0;
    for j in (1..=n).rev() {
        acc += 1.0 / j as f64;
        y[j] = -acc;
    }
    let ys: Vec<f64> = y[1..=k].to_vec();
    let xs: Vec<f64> = v[..k].iter().map(|x| x.ln()).collect();
    let (_, slope, _) = linear_fit(&xs, &ys);
    let my = ys.iter().sum::<f64>() / k as f64;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let mut partial = 0.0;
    let mut var = 0.0;
    for (i, y) in ys.iter().enumerate() {
        partial += (y - my) / syy;
        var += partial * partial / ((i + 1) as f64).powi(2);
    }
    Ok(FitResult {
        estimate: slope,
        std_error: slope.abs() * var.sqrt(),
        samples: k,
        window: format!("lowest {:.0}%: x in [{:e}, {:e}]", window * 100.0, v[0], v[k - 1]),
    })
}

/// Nonzero magnitudes of the resolved, nonvanishing records.
pub fn nonzero_values(records: &[TwistRecord], normalise: bool) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.vanishing == Vanishing::No)
        .map(|r| if normalise { r.normalised } else { r.value }.abs())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtModel {
    /// Exponents from the joint moments of characteristic polynomials.
    CharacteristicPolynomial,
    MillerIndependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    SoEven,
    SoOdd,
}

/// `Prob[L^(r) <= x] ~ x^value_exponent |log x|^log_exponent` as `x -> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmtLaw {
    pub model: RmtModel,
    pub symmetry: Symmetry,
    pub order: u32,
    pub value_exponent: f64,
    pub log_exponent: f64,
}

pub fn rmt_law(model: RmtModel, symmetry: Symmetry, r: u32) -> RmtLaw {
    let rf = r as f64;
    let (value_exponent, log_exponent) = match (model, symmetry) {
        (RmtModel::CharacteristicPolynomial, _) => (rf + 0.5, -rf * rf / 2.0 + rf / 2.0 + 0.375),
        (RmtModel::MillerIndependent, Symmetry::SoEven) => (0.5, 0.375),
        (RmtModel::MillerIndependent, Symmetry::SoOdd) => (1.5, 0.375),
    };
    RmtLaw { model, symmetry, order: r, value_exponent, log_exponent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twist::Parity;

    fn rec(d: i64, value: f64, vanishing: Vanishing) -> TwistRecord {
        TwistRecord { d, parity: Parity::Odd, order: 1, value, error: 1e-6, normalised: value / (d as f64).ln(), vanishing, terms: 100 }
    }

    #[test]
    fn three_steps() {
        let recs = [rec(5, 0.2, Vanishing::No), rec(13, 0.1, Vanishing::No), rec(17, 0.3, Vanishing::No)];
        let dist = cumulative_distribution(&recs, false).unwrap();
        let xs: Vec<f64> = dist.points.iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![0.1, 0.2, 0.3]);
        for (i, p) in dist.points.iter().enumerate() {
            assert!((p.1 - (i + 1) as f64 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_values_counted_apart() {
        let recs = [rec(5, 0.2, Vanishing::No), rec(13, 0.0, Vanishing::Yes), rec(17, f64::NAN, Vanishing::Unresolved)];
        let dist = cumulative_distribution(&recs, true).unwrap();
        assert_eq!(dist.points.len(), 1);
        assert_eq!((dist.zeros, dist.unresolved), (1, 1));
        assert!(cumulative_distribution(&[], false).is_err());
    }

    #[test]
    fn ties_merge() {
        assert_eq!(ecdf(&[1.0, 1.0, 2.0, 0.5]), vec![(0.5, 0.25), (1.0, 0.75), (2.0, 1.0)]);
    }

    #[test]
    fn planted_power_law() {
        let pts: Vec<(f64, f64)> = [1e3, 1e4, 1e5, 1e6].iter().map(|&x: &f64| (x, x.powf(0.75).round())).collect();
        let fit = fit_power_exponent(&pts).unwrap();
        assert!((fit.overall.estimate - 0.75).abs() < 0.01);
        assert_eq!(fit.upper.samples, 3);
        assert!(fit_power_exponent(&[(10.0, 5.0), (10.0, 5.0), (10.0, 5.0)]).is_err());
    }

    #[test]
    fn characteristic_polynomial_exponents() {
        let odd = rmt_law(RmtModel::CharacteristicPolynomial, Symmetry::SoOdd, 1);
        assert_eq!((odd.value_exponent, odd.log_exponent), (1.5, 0.375));
        let even = rmt_law(RmtModel::CharacteristicPolynomial, Symmetry::SoEven, 0);
        assert_eq!((even.value_exponent, even.log_exponent), (0.5, 0.375));
        let two = rmt_law(RmtModel::CharacteristicPolynomial, Symmetry::SoEven, 2);
        assert_eq!((two.value_exponent, two.log_exponent), (2.5, -0.625));
        let miller = rmt_law(RmtModel::MillerIndependent, Symmetry::SoOdd, 3);
        assert_eq!((miller.value_exponent, miller.log_exponent), (1.5, 0.375));
    }

    #[test]
    fn congruent_curve_predictions() {
        assert!((predicted_ratio(5, -2, DEFAULT_K) - 2.0f64.sqrt() * 2.0).abs() < 1e-12);
        assert!((predicted_ratio(13, 6, DEFAULT_K) - 0.25).abs() < 0.005);
    }

    #[test]
    fn exact_k_round_trip() {
        let rows: Vec<RatioRow> = [(5u64, -2i64), (13, 6), (17, 2), (29, -10)]
            .iter()
            .map(|&(p, ap)| {
                let c = predicted_ratio(p, ap, -1.5);
                RatioRow { p, ap, residues: 0, nonresidues: 1, observed: Some(c), predicted: c }
            })
            .collect();
        let fit = fit_k(&rows).unwrap();
        assert!((fit.estimate + 1.5).abs() < 1e-9);
        assert!(fit.std_error >= 0.0);
    }

    #[test]
    fn k_fit_rejects_uninformative_rows() {
        let row = RatioRow { p: 7, ap: 0, residues: 3, nonresidues: 3, observed: Some(1.0), predicted: 1.0 };
        assert!(fit_k(&[row.clone(), RatioRow { p: 11, ..row }]).is_err());
    }

    #[test]
    fn table_counts_classes() {
        let rows = residuosity_table(&[1, 4, 2, 10, 3], &[5], |_| Ok(-2), -1.5).unwrap();
        // 1 and 4 are squares mod 5, 2 and 3 are not, 10 is skipped.
        assert_eq!((rows[0].residues, rows[0].nonresidues), (2, 2));
        assert_eq!(rows[0].observed, Some(1.0));
        let none = residuosity_table(&[1, 4], &[5], |_| Ok(-2), -1.5).unwrap();
        assert_eq!(none[0].observed, None);
    }

    #[test]
    fn tail_slope_rejects_short_tail() {
        let vals: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        assert!(tail_slope(&vals, 0.1).is_err());
        assert!(tail_slope(&[], 0.1).is_err());
    }
}
