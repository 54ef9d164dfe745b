//! Dirichlet coefficient tables and the multiplicative sieve that fills them.

use rayon::prelude::*;

use super::pointcount::PointCounter;
use super::{eta_expansion, pointcount, CurveConfig};
use crate::arith;
use crate::error::{Error, Result};

/// Largest prime the point-count provider will handle by default.
pub const DEFAULT_POINT_COUNT_CAP: u64 = 300_000;

/// Where the prime coefficients of a table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provider {
    PointCount,
    Eta,
    /// Eta expansion when the configuration carries one, point counting otherwise.
    Hybrid,
}

impl Provider {
    pub fn parse(s: &str) -> Option<Provider> {
        match s {
            "point-count" | "pointcount" | "count" => Some(Provider::PointCount),
            "eta" => Some(Provider::Eta),
            "hybrid" | "auto" => Some(Provider::Hybrid),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Provider::PointCount => "point-count",
            Provider::Eta => "eta",
            Provider::Hybrid => "hybrid",
        }
    }
}

/// Anything that can hand out `a_n` in contiguous chunks.
pub trait DirichletCoefficients: Sync {
    /// Largest `n` available.
    fn bound(&self) -> usize;

    /// Writes `a_start, a_{start+1}, ...` into `out`. Callers keep
    /// `start >= 1` and `start + out.len() - 1 <= bound()`.
    fn fill(&self, start: usize, out: &mut [i32]);

    fn coefficient(&self, n: usize) -> i32 {
        let mut v = [0];
        self.fill(n, &mut v);
        v[0]
    }
}

/// `a_1, ..., a_M` stored densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    values: Vec<i32>,
    pub provider: Provider,
}

impl CoefficientTable {
    /// Wraps `a_1..a_M` given in order.
    pub fn from_values(values: Vec<i32>, provider: Provider) -> Self {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(0);
        v.extend(values);
        CoefficientTable { values: v, provider }
    }

    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `a_n` for `1 <= n <= len()`.
    pub fn get(&self, n: usize) -> i32 {
        self.values[n]
    }

    /// `a_1..a_M` as a slice (index `n - 1` holds `a_n`).
    pub fn as_slice(&self) -> &[i32] {
        &self.values[1..]
    }

    /// A copy truncated to `a_1..a_m`.
    pub fn truncated(&self, m: usize) -> CoefficientTable {
        CoefficientTable::from_values(self.as_slice()[..m.min(self.len())].to_vec(), self.provider)
    }
}

impl DirichletCoefficients for CoefficientTable {
    fn bound(&self) -> usize {
        self.len()
    }

    fn fill(&self, start: usize, out: &mut [i32]) {
        out.copy_from_slice(&self.values[start..start + out.len()]);
    }
}

/// `a_p` for every prime `p <= m`, either by counting points or from the
/// local data at bad primes.
pub fn prime_traces(cfg: &CurveConfig, primes: &[u64], cap: u64) -> Result<Vec<i64>> {
    if let Some(&p) = primes.iter().find(|&&p| p > cap) {
        return Err(Error::MissingPrime { p });
    }
    let short = cfg.short_model()?;
    primes
        .par_iter()
        .map_init(PointCounter::default, |pc, &p| {
            if cfg.conductor % p == 0 {
                match pointcount::ap_bad_multiplicative(cfg, p) {
                    Err(Error::AdditiveReduction { .. }) => Ok(0),
                    other => other,
                }
            } else {
                pc.ap_good(&short, p)
            }
        })
        .collect()
}

/// Extends prime traces to all `a_n`, `n <= m`, by multiplicativity and the
/// Hecke recurrence at prime powers.
pub fn sieve_coefficients(m: usize, trace: impl Fn(u64) -> i64, bad: impl Fn(u64) -> bool) -> Vec<i32> {
    let spf = arith::smallest_prime_factors(m);
    // ppart[n]: the power of spf[n] exactly dividing n.
    let mut ppart = vec![0u32; m + 1];
    let mut a = vec![0i32; m + 1];
    if m >= 1 {
        a[1] = 1;
    }
    for n in 2..=m {
        let p = spf[n] as usize;
        let q = n / p;
        ppart[n] = if q % p == 0 { ppart[q] * p as u32 } else { p as u32 };
        let pk = ppart[n] as usize;
        a[n] = if pk == n {
            let ap = trace(p as u64);
            if q == 1 {
                ap as i32
            } else if bad(p as u64) {
                (ap * a[q] as i64) as i32
            } else {
                (ap * a[q] as i64 - p as i64 * a[q / p] as i64) as i32
            }
        } else {
            (a[pk] as i64 * a[n / pk] as i64) as i32
        };
    }
    a.remove(0);
    a
}

fn point_count_table(cfg: &CurveConfig, m: usize, cap: u64) -> Result<CoefficientTable> {
    let primes = arith::primes_up_to(m as u64);
    let traces = prime_traces(cfg, &primes, cap)?;
    let mut by_prime = vec![0i64; m + 1];
    for (&p, &t) in primes.iter().zip(&traces) {
        by_prime[p as usize] = t;
    }
    let values = sieve_coefficients(m, |p| by_prime[p as usize], |p| cfg.conductor % p == 0);
    Ok(CoefficientTable::from_values(values, Provider::PointCount))
}

/// Builds `a_1..a_m` with the requested provider, using the default
/// point-counting cap.
pub fn an_table(cfg: &CurveConfig, m: usize, provider: Provider) -> Result<CoefficientTable> {
    an_table_with_cap(cfg, m, provider, DEFAULT_POINT_COUNT_CAP)
}

pub fn an_table_with_cap(cfg: &CurveConfig, m: usize, provider: Provider, cap: u64) -> Result<CoefficientTable> {
    if m == 0 {
        return Err(Error::InvalidArgument("coefficient bound must be at least 1".into()));
    }
    match (provider, &cfg.eta) {
        (Provider::PointCount, _) | (Provider::Hybrid, None) => point_count_table(cfg, m, cap),
        (Provider::Eta, Some(spec)) | (Provider::Hybrid, Some(spec)) => {
            let mut t = eta_expansion(spec, m)?;
            if provider == Provider::Hybrid {
                t.provider = Provider::Hybrid;
            }
            Ok(t)
        }
        (Provider::Eta, None) => Err(Error::UnsupportedEta(format!("curve {} has no eta quotient configured", cfg.label))),
    }
}
