//! q-expansions of eta quotients `prod eta(m_i tau)^{e_i}`.
//!
//! Each `prod_n (1 - q^{mn})` is the pentagonal series
//! `sum_k (-1)^k q^{m k(3k-1)/2}`, with `O(sqrt(L/m))` nonzero terms below
//! `q^L`. The two densest factors are multiplied sparse-by-sparse; every
//! further factor is applied to the dense partial product one sparse term at
//! a time, block by block so the working set stays in cache.

use std::fmt;

use super::{CoefficientTable, Provider};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaQuotientSpec {
    /// `(m_i, e_i)` pairs.
    pub factors: Vec<(u32, i32)>,
    /// `sum m_i e_i / 24`, the exponent of the leading power of `q`.
    pub offset: u32,
}

impl EtaQuotientSpec {
    pub fn new(factors: Vec<(u32, i32)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::UnsupportedEta("no factors".into()));
        }
        if let Some(&(m, e)) = factors.iter().find(|&&(m, e)| m == 0 || e == 0) {
            return Err(Error::UnsupportedEta(format!("factor {m}:{e} must have positive scale and nonzero exponent")));
        }
        let weight: i64 = factors.iter().map(|&(m, e)| m as i64 * e as i64).sum();
        if weight <= 0 || weight % 24 != 0 {
            return Err(Error::UnsupportedEta(format!("sum of m*e = {weight} is not a positive multiple of 24")));
        }
        Ok(EtaQuotientSpec { factors, offset: (weight / 24) as u32 })
    }

    /// Parses `"m1:e1,m2:e2,..."`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut factors = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (m, e) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("eta factor '{part}' is not of the form m:e")))?;
            let m = m.trim().parse().map_err(|_| Error::Config(format!("bad eta scale '{m}'")))?;
            let e = e.trim().trim_start_matches('+').parse().map_err(|_| Error::Config(format!("bad eta exponent '{e}'")))?;
            factors.push((m, e));
        }
        EtaQuotientSpec::new(factors)
    }
}

impl fmt::Display for EtaQuotientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(m, e)| format!("{m}:{e}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Nonzero terms `(exponent, sign)` of `prod_n (1 - q^{mn})` below `q^len`,
/// ascending.
fn pentagonal(m: usize, len: usize) -> Vec<(usize, i64)> {
    let mut terms = vec![(0usize, 1i64)];
    for k in 1usize.. {
        let g1 = m * (k * (3 * k - 1) / 2);
        if g1 >= len {
            break;
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        terms.push((g1, sign));
        let g2 = m * (k * (3 * k + 1) / 2);
        if g2 < len {
            terms.push((g2, sign));
        }
    }
    terms.sort_unstable();
    terms
}

const BLOCK: usize = 1 << 15;

/// `dst = src * sparse`, truncated to `src.len()`.
fn mul_sparse(src: &[i64], dst: &mut [i64], sparse: &[(usize, i64)]) {
    let len = src.len();
    dst.iter_mut().for_each(|v| *v = 0);
    for start in (0..len).step_by(BLOCK) {
        let end = (start + BLOCK).min(len);
        for &(g, s) in sparse {
            if g >= end {
                break;
            }
            let lo = start.max(g);
            let out = &mut dst[lo..end];
            let inp = &src[lo - g..end - g];
            if s == 1 {
                out.iter_mut().zip(inp).for_each(|(o, i)| *o += i);
            } else if s == -1 {
                out.iter_mut().zip(inp).for_each(|(o, i)| *o -= i);
            } else {
                out.iter_mut().zip(inp).for_each(|(o, i)| *o += s * i);
            }
        }
    }
}

/// The first `m` coefficients `a_1..a_m` of the eta quotient, read as
/// `q^offset * sum_n P_n q^n` with `a_n = P_{n - offset}`.
pub fn eta_expansion(spec: &EtaQuotientSpec, m: usize) -> Result<CoefficientTable> {
    if let Some(&(mi, e)) = spec.factors.iter().find(|&&(_, e)| e < 0) {
        return Err(Error::UnsupportedEta(format!("negative exponent in factor {mi}:{e} would need series inversion")));
    }
    if spec.offset != 1 {
        return Err(Error::UnsupportedEta(format!("leading power q^{} is not q^1", spec.offset)));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("coefficient bound must be at least 1".into()));
    }
    let len = m;
    // One sparse series per unit of exponent, densest first.
    let mut scales: Vec<usize> = spec.factors.iter().flat_map(|&(mi, e)| std::iter::repeat(mi as usize).take(e as usize)).collect();
    scales.sort_unstable();
    let series: Vec<Vec<(usize, i64)>> = scales.iter().map(|&s| pentagonal(s, len)).collect();

    let mut cur = vec![0i64; len];
    match series.len() {
        1 => series[0].iter().for_each(|&(g, s)| cur[g] = s),
        _ => {
            for &(g1, s1) in &series[0] {
                for &(g2, s2) in &series[1] {
                    if g1 + g2 >= len {
                        break;
                    }
                    cur[g1 + g2] += s1 * s2;
                }
            }
        }
    }
    let mut next = vec![0i64; len];
    for sparse in series.iter().skip(2) {
        mul_sparse(&cur, &mut next, sparse);
        std::mem::swap(&mut cur, &mut next);
    }

    let values = cur
        .into_iter()
        .map(|v| i32::try_from(v).map_err(|_| Error::Overflow(format!("eta coefficient {v} exceeds 32 bits"))))
        .collect::<Result<Vec<i32>>>()?;
    Ok(CoefficientTable::from_values(values, Provider::Eta))
}
