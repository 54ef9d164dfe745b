//! Frobenius traces by counting points over prime fields.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{CurveConfig, Reduction, ShortModel, Weierstrass};
use crate::arith;
use crate::error::{Error, Result};

fn residue(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits in u64")
}

fn residue_i128(v: i128, p: u64) -> u64 {
    v.rem_euclid(p as i128) as u64
}

/// Number of projective points of the general model over `F_p`, by full
/// enumeration of the affine plane. Quadratic in `p`; intended for `p = 2, 3`
/// and as an independent check.
pub fn count_points_naive(w: &Weierstrass, p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = w.ainvs().map(|a| residue_i128(a, p));
    let mut count = 1;
    for x in 0..p {
        let rhs = (((x * x % p) * x) % p + a2 * x % p * x % p + a4 * x % p + a6) % p;
        for y in 0..p {
            let lhs = (y * y % p + a1 * x % p * y % p + a3 * y % p) % p;
            if lhs == rhs {
                count += 1;
            }
        }
    }
    count
}

/// Reusable scratch space for the character-sum count.
#[derive(Default)]
pub(crate) struct PointCounter {
    chi: Vec<i8>,
}

impl PointCounter {
    /// `-sum_x chi(x^3 + a x + b)` over `F_p`, with the cubic advanced by
    /// finite differences so the inner loop has no multiplications.
    pub(crate) fn trace_short(&mut self, a: i128, b: i128, p: u64) -> i64 {
        arith::legendre_table(p, &mut self.chi);
        let chi = &self.chi;
        let pp = p as usize;
        let a = residue_i128(a, p) as usize;
        let b = residue_i128(b, p) as usize;
        let reduce = |v: usize| if v >= pp { v - pp } else { v };

        // f(x) = x^3 + a x + b; d1 = f(x+1) - f(x); d2 = d1(x+1) - d1(x).
        let mut f = b;
        let mut d1 = reduce(1 + a);
        let mut d2 = 6 % pp;
        let d3 = 6 % pp;
        let mut sum: i64 = 0;
        for _ in 0..pp {
            sum += chi[f] as i64;
            f = reduce(f + d1);
            d1 = reduce(d1 + d2);
            d2 = reduce(d2 + d3);
        }
        -sum
    }

    pub(crate) fn ap_good(&mut self, model: &ShortModel, p: u64) -> Result<i64> {
        if p < 2 || !arith::is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        if model.discriminant.rem_euclid(p as i128) == 0 {
            return Err(Error::BadPrime { p });
        }
        if p <= 3 {
            return Ok(p as i64 + 1 - count_points_naive(&model.source, p) as i64);
        }
        let (a, b) = model.integral;
        Ok(self.trace_short(a, b, p))
    }
}

/// `a_p = p + 1 - #E(F_p)` at a prime of good reduction.
///
/// For `p >= 5` this is the quadratic character sum over the integral short
/// model; for `p = 2, 3` the general model is enumerated directly.
pub fn ap_good(model: &ShortModel, p: u64) -> Result<i64> {
    PointCounter::default().ap_good(model, p)
}

/// Decides whether the node of the reduction mod `p` has tangent slopes in
/// `F_p`. Fails with [`Error::AdditiveReduction`] when the singularity is a cusp
/// and [`Error::BadPrime`] when the reduction is not singular at all.
pub fn node_is_split(w: &Weierstrass, p: u64) -> Result<bool> {
    if !arith::is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if !(w.discriminant() % BigInt::from(p)).is_zero() {
        return Err(Error::BadPrime { p });
    }
    let [a1, a2, a3, a4, a6] = w.ainvs().map(|a| residue_i128(a, p));
    if p >= 5 {
        let (c4, c6) = w.c_invariants();
        let a = residue(&(-27 * c4), p);
        let b = residue(&(-54 * c6), p);
        if a == 0 {
            return Err(Error::AdditiveReduction { p });
        }
        // Double root of x^3 + a x + b is x0 = -3b / (2a); the node has
        // tangents y = +-sqrt(3 x0) (x - x0).
        let mul = |u: u64, v: u64| (u as u128 * v as u128 % p as u128) as u64;
        let inv = pow_mod(mul(2, a), p - 2, p);
        let x0 = mul((p - mul(3, b)) % p, inv);
        return match arith::kronecker(mul(3, x0) as i64, p as i64) {
            1 => Ok(true),
            -1 => Ok(false),
            _ => Err(Error::AdditiveReduction { p }),
        };
    }
    // Small characteristic: locate the singular point and factor the
    // quadratic part v^2 + a1 u v - (3 x0 + a2) u^2 of the shifted equation.
    for x in 0..p {
        for y in 0..p {
            let f = (y * y + a1 * x * y + a3 * y + 3 * p * p * p - (x * x * x + a2 * x * x + a4 * x + a6) % p) % p;
            let fx = (a1 * y + 3 * p * p - (3 * x * x + 2 * a2 * x + a4) % p) % p;
            let fy = (2 * y + a1 * x + a3) % p;
            if f == 0 && fx == 0 && fy == 0 {
                let c = (3 * x + a2) % p;
                let roots = (0..p).filter(|t| (t * t + a1 * t + p * p - c) % p == 0).count();
                return match roots {
                    2 => Ok(true),
                    0 => Ok(false),
                    _ => Err(Error::AdditiveReduction { p }),
                };
            }
        }
    }
    Err(Error::BadPrime { p })
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// `a_p` at a prime of multiplicative reduction: `+1` split, `-1` nonsplit,
/// as recorded in the configuration's local data.
pub fn ap_bad_multiplicative(cfg: &CurveConfig, p: u64) -> Result<i64> {
    match cfg.local_at(p) {
        Some(l) if l.reduction == Reduction::Additive => Err(Error::AdditiveReduction { p }),
        Some(l) => Ok(l.reduction.ap()),
        None => Err(Error::InvalidArgument(format!("p = {p} does not divide the conductor {}", cfg.conductor))),
    }
}
