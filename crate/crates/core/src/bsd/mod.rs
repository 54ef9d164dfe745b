//! BSD ingredients for quadratic twists and the implied order of Sha.

mod height;
mod period;

pub use height::{archimedean_height, canonical_height, naive_height, search_points, HeightResult, RationalCurve, RationalPoint, MAX_MULTIPLIER};
pub use period::{agm, periods, real_period, real_roots, twist_periods, Periods};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::arith::kronecker;
use crate::curve::{CurveConfig, Reduction};
use crate::error::{Error, Result};
use crate::twist::check_eligible;

/// Right-hand side of BSD for one twist, solved for `#Sha`.
#[derive(Debug, Clone, PartialEq)]
pub struct BsdInvariants {
    pub d: i64,
    pub omega: f64,
    pub tamagawa: u64,
    pub torsion: u32,
    /// Regulator; 1 for rank zero.
    pub regulator: f64,
    pub sha: f64,
    pub nearest_square: u64,
    /// `|sha - nearest_square| / max(1, nearest_square)`.
    pub residual: f64,
    /// The L-value sits below the vanishing threshold.
    pub higher_rank: bool,
}

fn with_sha(d: i64, omega: f64, g: u64, t: u32, regulator: f64, sha: f64, higher_rank: bool) -> BsdInvariants {
    let root = sha.max(0.0).sqrt().round() as u64;
    let nearest = root * root;
    let residual = (sha - nearest as f64).abs() / (nearest.max(1) as f64);
    BsdInvariants { d, omega, tamagawa: g, torsion: t, regulator, sha, nearest_square: nearest, residual, higher_rank }
}

/// Order of the torsion subgroup of `E_d`, `|d| > 8`: the 2-torsion has the
/// same number of rational roots as the base 2-division cubic, and odd
/// torsion of such twists is trivial.
pub fn torsion_order_twist(base: &CurveConfig, d: i64) -> Result<u32> {
    check_eligible(base, d)?;
    if d.unsigned_abs() <= 8 {
        return Err(Error::UnsupportedDiscriminant { d, reason: "torsion of twists with |d| <= 8 must come from the configuration".into() });
    }
    Ok(1 + rational_two_torsion(base)?)
}

/// Number of rational roots of the 2-division cubic, via the integral form
/// `X^3 - 27 c4 X - 54 c6` whose rational roots are integers.
fn rational_two_torsion(base: &CurveConfig) -> Result<u32> {
    let short = base.short_model()?;
    let (a, b) = (-27.0 * short.c4 as f64, -54.0 * short.c6 as f64);
    let (a_big, b_big) = (BigInt::from(short.integral.0), BigInt::from(short.integral.1));
    let mut found: Vec<BigInt> = Vec::new();
    for r in real_roots(a, b) {
        let c = r.round();
        for delta in -1i64..=1 {
            let x = BigInt::from(c as i128 + delta as i128);
            if (&x * &x * &x + &a_big * &x + &b_big).is_zero() && !found.contains(&x) {
                found.push(x);
            }
        }
    }
    Ok(found.len() as u32)
}

/// Global Tamagawa number of a twist and where each factor came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistTamagawa {
    pub product: u64,
    /// `(p, c_p)` for every prime dividing `d N`.
    pub local: Vec<(u64, u32)>,
    /// Additive base primes whose factor was copied from the configuration.
    pub copied: Vec<u64>,
}

/// Roots mod an odd prime `p` of `4x^3 + b2 x^2 + 2 b4 x + b6`.
fn division_roots_mod(base: &CurveConfig, p: u64) -> u32 {
    let [b2, b4, b6, _] = base.model.b_invariants();
    let m = BigInt::from(p);
    let red = |v: &BigInt| ((v % &m + &m) % &m).to_u64().unwrap_or(0) as u128;
    let (c2, c4, c6) = (red(&b2), (2 * red(&b4)) % p as u128, red(&b6));
    let p = p as u128;
    (0..p)
        .filter(|&x| {
            let v = ((4 * x % p * x % p * x) % p + c2 * x % p * x % p + c4 * x % p + c6) % p;
            v == 0
        })
        .count() as u32
}

/// `g_d = prod_{p | d} (1 + #roots of the 2-division cubic mod p)` times the
/// base multiplicative factors, with split and nonsplit swapped wherever
/// `(d/p) = -1`.
pub fn tamagawa_twist(base: &CurveConfig, d: i64) -> Result<TwistTamagawa> {
    check_eligible(base, d)?;
    let mut local = Vec::new();
    let mut copied = Vec::new();
    for (p, _) in crate::arith::factor(d.unsigned_abs()) {
        local.push((p, 1 + division_roots_mod(base, p)));
    }
    for l in &base.local {
        let c = match l.reduction {
            Reduction::Additive => {
                copied.push(l.prime);
                l.tamagawa
            }
            red => {
                let split = (red == Reduction::Split) == (kronecker(d, l.prime as i64) == 1);
                let n = l.ord_disc;
                if split {
                    n
                } else if n % 2 == 0 {
                    2
                } else {
                    1
                }
            }
        };
        local.push((l.prime, c));
    }
    local.sort_unstable();
    let product = local.iter().map(|&(_, c)| c as u64).product();
    Ok(TwistTamagawa { product, local, copied })
}

/// Even rank: `#Sha = L(E_d,1) T^2 / (Omega g)`, reported as zero with the
/// higher-rank flag when `|L| <= tau`.
pub fn sha_estimate_even(d: i64, l1: f64, omega: f64, g: u64, t: u32, tau: f64) -> BsdInvariants {
    if l1.abs() <= tau {
        return with_sha(d, omega, g, t, 1.0, 0.0, true);
    }
    let sha = l1 * (t as f64).powi(2) / (omega * g as f64);
    with_sha(d, omega, g, t, 1.0, sha, false)
}

/// Rank one: `#Sha = L'(E_d,1) T^2 / (Omega g R)` with `R` the height of the
/// supplied generator.
pub fn sha_estimate_odd(d: i64, l1p: f64, omega: f64, g: u64, t: u32, generator: &HeightResult) -> Result<BsdInvariants> {
    if generator.torsion || generator.canonical <= generator.error {
        return Err(Error::InvalidArgument(format!("generator {} has zero height; it is torsion", generator.point)));
    }
    let r = generator.canonical;
    let sha = l1p * (t as f64).powi(2) / (omega * g as f64 * r);
    Ok(with_sha(d, omega, g, t, r, sha, false))
}

/// Period, Tamagawa product and torsion order of the twist `E_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistArithmetic {
    pub d: i64,
    pub periods: Periods,
    pub tamagawa: TwistTamagawa,
    pub torsion: u32,
}

pub fn twist_arithmetic(base: &CurveConfig, d: i64) -> Result<TwistArithmetic> {
    let torsion = torsion_order_twist(base, d)?;
    let tamagawa = tamagawa_twist(base, d)?;
    let periods = twist_periods(&base.short_model()?, d)?;
    Ok(TwistArithmetic { d, periods, tamagawa, torsion })
}

/// Sha estimate for an even twist from its central value.
pub fn even_twist_sha(base: &CurveConfig, d: i64, l1: f64, tau: f64) -> Result<BsdInvariants> {
    let t = twist_arithmetic(base, d)?;
    Ok(sha_estimate_even(d, l1, t.periods.real, t.tamagawa.product, t.torsion, tau))
}

/// Sha estimate for a rank-one twist from `L'(E_d,1)` and a generator on any
/// model of `E_d`.
pub fn odd_twist_sha(base: &CurveConfig, d: i64, l1p: f64, generator: &HeightResult) -> Result<BsdInvariants> {
    let t = twist_arithmetic(base, d)?;
    sha_estimate_odd(d, l1p, t.periods.real, t.tamagawa.product, t.torsion, generator)
}

/// Lowest-height nontorsion point found by a naive search on `model`.
pub fn find_generator(model: &crate::curve::Weierstrass, bound: u64) -> Result<Option<HeightResult>> {
    let mut best: Option<HeightResult> = None;
    for p in search_points(model, bound) {
        let h = canonical_height(model, &p)?;
        if h.torsion || h.canonical <= 10.0 * h.error + 1e-9 {
            continue;
        }
        if best.as_ref().is_none_or(|b| h.canonical < b.canonical) {
            best = Some(h);
        }
    }
    Ok(best)
}

/// BSD quotient for the base curve itself, from the configured constants.
pub fn base_sha(cfg: &CurveConfig, l1: f64) -> Result<BsdInvariants> {
    let omega = match cfg.real_period {
        Some(w) => w,
        None => real_period(&cfg.short_model()?)?,
    };
    let g = cfg.local.iter().map(|l| l.tamagawa as u64).product();
    Ok(sha_estimate_even(1, l1, omega, g, cfg.torsion, 0.0))
}
