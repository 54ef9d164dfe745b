//! Quadratic twists: fundamental discriminants, parity, twisted coefficients.

mod scan;

pub use scan::{
    base_terms_needed, read_csv, scan, scan_discriminants, write_csv, write_skip_manifest, PrecisionPolicy, ScanOptions, ScanReport, ThresholdPolicy, TwistRecord,
    Vanishing, CSV_HEADER,
};

use num_integer::Integer;

use crate::arith;
use crate::curve::{CurveConfig, DirichletCoefficients};
use crate::error::{Error, Result};

pub use crate::arith::kronecker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_sign(sign: i8) -> Parity {
        if sign == 1 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    /// The derivative order evaluated for this parity in scans.
    pub fn order(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }

    pub fn parse(s: &str) -> Option<Parity> {
        match s {
            "even" => Some(Parity::Even),
            "odd" => Some(Parity::Odd),
            _ => None,
        }
    }
}

/// Which signs of `d` to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signs {
    Positive,
    Negative,
    Both,
}

pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => arith::is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && arith::is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// All fundamental discriminants with `1 < |d| < x`, ascending by `|d|`,
/// positive before negative.
pub fn enumerate_fundamental(x: u64, signs: Signs) -> Vec<i64> {
    if x <= 2 {
        return Vec::new();
    }
    let n = x as usize;
    let mut squarefree = vec![true; n];
    let mut p = 2usize;
    while p * p < n {
        for j in (p * p..n).step_by(p * p) {
            squarefree[j] = false;
        }
        p += 1;
    }
    let fundamental = |d: i64| -> bool {
        match d.rem_euclid(4) {
            1 => squarefree[d.unsigned_abs() as usize],
            0 => {
                let m = d / 4;
                matches!(m.rem_euclid(4), 2 | 3) && squarefree[m.unsigned_abs() as usize]
            }
            _ => false,
        }
    };
    let mut out = Vec::new();
    for a in 2..x as i64 {
        if signs != Signs::Negative && fundamental(a) {
            out.push(a);
        }
        if signs != Signs::Positive && fundamental(-a) {
            out.push(-a);
        }
    }
    out
}

/// Rejects `d` unless it is fundamental and coprime to `2N`.
pub fn check_eligible(base: &CurveConfig, d: i64) -> Result<()> {
    if !is_fundamental(d) {
        return Err(Error::UnsupportedDiscriminant { d, reason: "not a fundamental discriminant".into() });
    }
    let g = (d.unsigned_abs()).gcd(&(2 * base.conductor));
    if g != 1 {
        return Err(Error::UnsupportedDiscriminant { d, reason: format!("gcd(d, 2N) = {g}; ramified twists are not supported") });
    }
    Ok(())
}

/// Parity of the twist from `sign(E_d) = eps * chi_d(-N)`.
pub fn twist_parity(base: &CurveConfig, d: i64) -> Result<Parity> {
    check_eligible(base, d)?;
    Ok(Parity::from_sign(base.sign * kronecker(d, -(base.conductor as i64))))
}

/// Conductor `N d^2` of an eligible twist.
pub fn twist_conductor(base: &CurveConfig, d: i64) -> u128 {
    base.conductor as u128 * (d as i128 * d as i128) as u128
}

/// A twist of a base curve by an eligible discriminant.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistSpec {
    pub base: CurveConfig,
    pub d: i64,
    pub parity: Parity,
    pub conductor: u128,
}

impl TwistSpec {
    pub fn new(base: &CurveConfig, d: i64) -> Result<TwistSpec> {
        if d == 1 {
            return Ok(TwistSpec { base: base.clone(), d, parity: Parity::from_sign(base.sign), conductor: base.conductor as u128 });
        }
        Ok(TwistSpec { base: base.clone(), d, parity: twist_parity(base, d)?, conductor: twist_conductor(base, d) })
    }
}

/// `chi_d(n)` for `0 <= n < |d|`, built multiplicatively from the values at
/// primes.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub d: i64,
    values: Vec<i8>,
}

impl CharacterTable {
    pub fn new(d: i64) -> CharacterTable {
        let m = d.unsigned_abs() as usize;
        if m <= 1 {
            return CharacterTable { d, values: vec![1] };
        }
        let spf = arith::smallest_prime_factors(m);
        let mut values = vec![0i8; m];
        if m > 1 {
            values[1] = 1;
        }
        for n in 2..m {
            let p = spf[n] as usize;
            values[n] = if p == n { kronecker(d, n as i64) } else { values[p] * values[n / p] };
        }
        CharacterTable { d, values }
    }

    pub fn modulus(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn get(&self, n: usize) -> i8 {
        self.values[n % self.values.len()]
    }
}

/// `a_n(E_d) = a_n(E) chi_d(n)`, computed on the fly.
pub struct TwistedView<'a, C: DirichletCoefficients + ?Sized> {
    base: &'a C,
    chi: CharacterTable,
    bound: usize,
}

impl<'a, C: DirichletCoefficients + ?Sized> TwistedView<'a, C> {
    pub fn d(&self) -> i64 {
        self.chi.d
    }
}

impl<C: DirichletCoefficients + ?Sized> DirichletCoefficients for TwistedView<'_, C> {
    fn bound(&self) -> usize {
        self.bound
    }

    fn fill(&self, start: usize, out: &mut [i32]) {
        self.base.fill(start, out);
        let m = self.chi.modulus();
        if m == 1 {
            return;
        }
        let mut r = start % m;
        for v in out.iter_mut() {
            *v *= self.chi.values[r] as i32;
            r += 1;
            if r == m {
                r = 0;
            }
        }
    }
}

/// Twisted coefficients `a_n chi_d(n)` for `n <= m`, as a lazy view over the
/// base table. `d = 1` gives the base curve itself.
pub fn twisted_coefficients<'a, C: DirichletCoefficients + ?Sized>(
    base_table: &'a C,
    base: &CurveConfig,
    d: i64,
    m: usize,
) -> Result<TwistedView<'a, C>> {
    if d != 1 {
        check_eligible(base, d)?;
    }
    if m > base_table.bound() {
        return Err(Error::InsufficientTerms { required: m, available: base_table.bound() });
    }
    Ok(TwistedView { base: base_table, chi: CharacterTable::new(d), bound: m })
}
