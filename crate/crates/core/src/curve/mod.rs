//! Weierstrass models, curve configuration and Dirichlet coefficients.

mod coeffs;
mod config;
mod eta;
mod pointcount;

pub use coeffs::{an_table, an_table_with_cap, prime_traces, sieve_coefficients, CoefficientTable, DirichletCoefficients, Provider, DEFAULT_POINT_COUNT_CAP};
pub use eta::{eta_expansion, EtaQuotientSpec};
pub use pointcount::{ap_bad_multiplicative, ap_good, count_points_naive, node_is_split};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};

/// General Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weierstrass {
    pub a1: i128,
    pub a2: i128,
    pub a3: i128,
    pub a4: i128,
    pub a6: i128,
}

impl Weierstrass {
    pub fn new(a1: i128, a2: i128, a3: i128, a4: i128, a6: i128) -> Self {
        Weierstrass { a1, a2, a3, a4, a6 }
    }

    /// `y^2 = x^3 + a x + b`.
    pub fn short(a: i128, b: i128) -> Self {
        Weierstrass::new(0, 0, 0, a, b)
    }

    pub fn ainvs(&self) -> [i128; 5] {
        [self.a1, self.a2, self.a3, self.a4, self.a6]
    }

    /// `[b2, b4, b6, b8]` as exact integers.
    pub fn b_invariants(&self) -> [BigInt; 4] {
        let [a1, a2, a3, a4, a6] = self.ainvs().map(BigInt::from);
        let b2 = &a1 * &a1 + 4 * &a2;
        let b4 = 2 * &a4 + &a1 * &a3;
        let b6 = &a3 * &a3 + 4 * &a6;
        let b8 = &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
        [b2, b4, b6, b8]
    }

    pub fn c_invariants(&self) -> (BigInt, BigInt) {
        let [b2, b4, b6, _] = self.b_invariants();
        let c4 = &b2 * &b2 - 24 * &b4;
        let c6 = -(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - 216 * &b6;
        (c4, c6)
    }

    pub fn discriminant(&self) -> BigInt {
        let [b2, b4, b6, b8] = self.b_invariants();
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    /// b-invariants as floats, for the archimedean computations.
    pub fn b_invariants_f64(&self) -> [f64; 4] {
        self.b_invariants().map(|b| b.to_f64().unwrap_or(f64::NAN))
    }

    /// The quadratic twist `d y^2 = x^3 + (b2/4) x^2 + (b4/2) x + b6/4`, written
    /// integrally as `y^2 = x^3 + d b2 x^2 + 8 d^2 b4 x + 16 d^3 b6`.
    pub fn twist(&self, d: i64) -> Result<Weierstrass> {
        let [b2, b4, b6, _] = self.b_invariants();
        let d = BigInt::from(d);
        let a2 = &d * b2;
        let a4 = 8 * &d * &d * b4;
        let a6 = 16 * &d * &d * &d * b6;
        let conv = |v: BigInt| v.to_i128().ok_or_else(|| Error::Overflow("twisted model coefficient".into()));
        Ok(Weierstrass::new(0, conv(a2)?, 0, conv(a4)?, conv(a6)?))
    }

    pub fn contains(&self, x: i128, y: i128) -> bool {
        let [x, y] = [BigInt::from(x), BigInt::from(y)];
        let [a1, a2, a3, a4, a6] = self.ainvs().map(BigInt::from);
        &y * &y + a1 * &x * &y + a3 * &y == &x * &x * &x + a2 * &x * &x + a4 * &x + a6
    }
}

impl std::fmt::Display for Weierstrass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

/// Completed-square-and-cube model `y^2 = x^3 + A x + B`, with `A = -c4/48`
/// and `B = -c6/864`; the integral form `y^2 = x^3 - 27 c4 x - 54 c6` is
/// kept alongside for reduction mod primes `p >= 5`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortModel {
    pub a: Ratio<i128>,
    pub b: Ratio<i128>,
    pub c4: i128,
    pub c6: i128,
    pub discriminant: i128,
    /// `(-27 c4, -54 c6)`; isomorphic over `Z[1/6]`.
    pub integral: (i128, i128),
    /// The model this was derived from.
    pub source: Weierstrass,
}

impl ShortModel {
    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }
}

pub fn to_short_form(model: &Weierstrass) -> Result<ShortModel> {
    let disc = model.discriminant();
    if disc.is_zero() {
        return Err(Error::Singular(model.to_string()));
    }
    let (c4, c6) = model.c_invariants();
    let ovf = |what: &str| Error::Overflow(format!("{what} of {model} exceeds 128 bits"));
    let c4 = c4.to_i128().ok_or_else(|| ovf("c4"))?;
    let c6 = c6.to_i128().ok_or_else(|| ovf("c6"))?;
    let discriminant = disc.to_i128().ok_or_else(|| ovf("discriminant"))?;
    let integral = (
        c4.checked_mul(-27).ok_or_else(|| ovf("27 c4"))?,
        c6.checked_mul(-54).ok_or_else(|| ovf("54 c6"))?,
    );
    Ok(ShortModel {
        a: Ratio::new(-c4, 48),
        b: Ratio::new(-c6, 864),
        c4,
        c6,
        discriminant,
        integral,
        source: model.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Split,
    Nonsplit,
    Additive,
}

impl Reduction {
    pub fn parse(s: &str) -> Option<Reduction> {
        match s.to_ascii_lowercase().as_str() {
            "split" | "split-multiplicative" => Some(Reduction::Split),
            "nonsplit" | "nonsplit-multiplicative" | "non-split" => Some(Reduction::Nonsplit),
            "additive" => Some(Reduction::Additive),
            _ => None,
        }
    }

    pub fn ap(self) -> i64 {
        match self {
            Reduction::Split => 1,
            Reduction::Nonsplit => -1,
            Reduction::Additive => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Reduction::Split => "split",
            Reduction::Nonsplit => "nonsplit",
            Reduction::Additive => "additive",
        }
    }
}

/// Local data at a prime of bad reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalData {
    pub prime: u64,
    pub reduction: Reduction,
    pub tamagawa: u32,
    pub ord_disc: u32,
}

/// A fixed rational elliptic curve with its supplied arithmetic constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub label: String,
    pub model: Weierstrass,
    pub conductor: u64,
    pub sign: i8,
    pub local: Vec<LocalData>,
    pub torsion: u32,
    pub real_period: Option<f64>,
    pub omega_vol: Option<f64>,
    pub eta: Option<EtaQuotientSpec>,
}

impl CurveConfig {
    pub fn parse(text: &str) -> Result<CurveConfig> {
        config::parse(text)
    }

    pub fn from_file(path: &std::path::Path) -> Result<CurveConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        CurveConfig::parse(&text)
    }

    pub fn to_config_string(&self) -> String {
        config::render(self)
    }

    pub fn local_at(&self, p: u64) -> Option<&LocalData> {
        self.local.iter().find(|l| l.prime == p)
    }

    pub fn bad_primes(&self) -> Vec<u64> {
        self.local.iter().map(|l| l.prime).collect()
    }

    pub fn short_model(&self) -> Result<ShortModel> {
        to_short_form(&self.model)
    }

    /// Checks the structural invariants: nonzero discriminant, `|sign| = 1`,
    /// local data at exactly the primes dividing the conductor.
    pub fn validate(&self) -> Result<()> {
        if self.model.discriminant().is_zero() {
            return Err(Error::Singular(self.model.to_string()));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::Config(format!("sign must be +1 or -1, got {}", self.sign)));
        }
        if self.conductor == 0 {
            return Err(Error::Config("conductor must be positive".into()));
        }
        if self.torsion == 0 {
            return Err(Error::Config("torsion order must be positive".into()));
        }
        let primes: Vec<u64> = arith::factor(self.conductor).into_iter().map(|(p, _)| p).collect();
        for p in &primes {
            let n = self.local.iter().filter(|l| l.prime == *p).count();
            if n != 1 {
                return Err(Error::Config(format!("prime {p} | N must appear exactly once in local data (found {n})")));
            }
        }
        for l in &self.local {
            if !primes.contains(&l.prime) {
                return Err(Error::Config(format!("local data prime {} does not divide N = {}", l.prime, self.conductor)));
            }
            let e = arith::valuation(self.conductor as i128, l.prime as i128);
            let multiplicative = l.reduction != Reduction::Additive;
            if multiplicative != (e == 1) {
                return Err(Error::Config(format!(
                    "reduction type {} at {} inconsistent with conductor exponent {e}",
                    l.reduction.name(),
                    l.prime
                )));
            }
        }
        Ok(())
    }
}

/// Bundled configurations for the curves used throughout the tests.
pub mod presets {
    use super::CurveConfig;

    pub const X0_11: &str = include_str!("../../data/curves/11a1.cfg");
    pub const CONGRUENT_32: &str = include_str!("../../data/curves/32a2.cfg");
    pub const X0_36: &str = include_str!("../../data/curves/36a1.cfg");
    pub const X0_14: &str = include_str!("../../data/curves/14a1.cfg");
    pub const X0_15: &str = include_str!("../../data/curves/15a1.cfg");
    pub const RANK1_37: &str = include_str!("../../data/curves/37a1.cfg");
    pub const ECDB_8519438341: &str = include_str!("../../data/curves/ecdb-8519438341.cfg");
    pub const ECDB_6264757621: &str = include_str!("../../data/curves/ecdb-6264757621.cfg");
    pub const ECDB_1531408357: &str = include_str!("../../data/curves/ecdb-1531408357.cfg");

    pub fn load(text: &str) -> CurveConfig {
        CurveConfig::parse(text).expect("bundled configuration parses")
    }

    pub fn x0_11() -> CurveConfig {
        load(X0_11)
    }

    pub fn congruent() -> CurveConfig {
        load(CONGRUENT_32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_form_of_congruent_curve() {
        let s = to_short_form(&Weierstrass::short(-1, 0)).unwrap();
        assert_eq!((s.c4, s.c6), (48, 0));
        assert_eq!(s.a, Ratio::from_integer(-1));
        assert_eq!(s.b, Ratio::from_integer(0));
        assert_eq!(s.discriminant, 64);
    }

    #[test]
    fn short_form_of_y2_plus_y() {
        let s = to_short_form(&Weierstrass::new(0, 0, 1, 0, 0)).unwrap();
        assert_eq!(s.c4, 0);
        assert_eq!(s.a, Ratio::from_integer(0));
        assert_eq!(s.b, Ratio::new(1, 4));
    }

    #[test]
    fn short_form_passes_through_short_models() {
        let s = to_short_form(&Weierstrass::short(0, 1)).unwrap();
        assert_eq!(s.a, Ratio::from_integer(0));
        assert_eq!(s.b, Ratio::from_integer(1));
    }

    #[test]
    fn singular_model_rejected() {
        assert!(matches!(to_short_form(&Weierstrass::short(0, 0)), Err(Error::Singular(_))));
        assert!(matches!(to_short_form(&Weierstrass::short(-3, 2)), Err(Error::Singular(_))));
    }

    #[test]
    fn c_invariant_identity() {
        for w in [
            Weierstrass::new(0, -1, 1, -10, -20),
            Weierstrass::new(1, 0, 1, 4, -6),
            Weierstrass::new(0, 0, 1, -76931443, -259719125220),
        ] {
            let s = to_short_form(&w).unwrap();
            let lhs = BigInt::from(s.c4).pow(3) - BigInt::from(s.c6).pow(2);
            assert_eq!(lhs, BigInt::from(s.discriminant) * 1728);
        }
    }

    #[test]
    fn eleven_a_discriminant() {
        assert_eq!(Weierstrass::new(0, -1, 1, -10, -20).discriminant(), BigInt::from(-161051));
    }

    #[test]
    fn presets_validate() {
        for text in [
            presets::X0_11,
            presets::CONGRUENT_32,
            presets::X0_36,
            presets::X0_14,
            presets::X0_15,
            presets::RANK1_37,
            presets::ECDB_8519438341,
            presets::ECDB_6264757621,
            presets::ECDB_1531408357,
        ] {
            let c = presets::load(text);
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", c.label));
        }
    }
}
