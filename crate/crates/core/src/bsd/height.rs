//! Exact point arithmetic and canonical heights.
//!
//! Heights use the normalisation `h(P) = log max(|num x|, den x)` for the
//! naive height, so that `ĥ(P) = lim h(2^n P) / 4^n` and the regulator of a
//! rank-one curve is the canonical height of a generator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::curve::Weierstrass;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoint {
    pub x: BigRational,
    pub y: BigRational,
}

impl RationalPoint {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        RationalPoint { x, y }
    }

    pub fn from_ints(x: i128, y: i128) -> Self {
        RationalPoint { x: BigRational::from_integer(x.into()), y: BigRational::from_integer(y.into()) }
    }

    /// Parses `x,y` with each coordinate an integer or `p/q`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse point '{s}'; expected x,y"));
        let (x, y) = s.split_once(',').ok_or_else(bad)?;
        let q = |t: &str| -> Result<BigRational> {
            let t = t.trim();
            match t.split_once('/') {
                Some((n, d)) => {
                    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(bad());
                    }
                    Ok(BigRational::new(n, d))
                }
                None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
            }
        };
        Ok(RationalPoint { x: q(x)?, y: q(y)? })
    }
}

impl std::fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Group law on a Weierstrass model over `Q`; `None` is the identity.
#[derive(Debug, Clone)]
pub struct RationalCurve {
    a: [BigRational; 5],
    model: Weierstrass,
}

fn q(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl RationalCurve {
    pub fn new(model: &Weierstrass) -> Self {
        RationalCurve { a: model.ainvs().map(q), model: model.clone() }
    }

    pub fn model(&self) -> &Weierstrass {
        &self.model
    }

    pub fn contains(&self, p: &RationalPoint) -> bool {
        let [a1, a2, a3, a4, a6] = &self.a;
        let (x, y) = (&p.x, &p.y);
        y * y + a1 * x * y + a3 * y == x * x * x + a2 * x * x + a4 * x + a6
    }

    pub fn negate(&self, p: &RationalPoint) -> RationalPoint {
        let [a1, _, a3, _, _] = &self.a;
        RationalPoint { x: p.x.clone(), y: -&p.y - a1 * &p.x - a3 }
    }

    pub fn add(&self, p: Option<&RationalPoint>, r: Option<&RationalPoint>) -> Option<RationalPoint> {
        let (p, r) = match (p, r) {
            (None, r) => return r.cloned(),
            (p, None) => return p.cloned(),
            (Some(p), Some(r)) => (p, r),
        };
        let [a1, a2, a3, a4, a6] = &self.a;
        let (lambda, nu) = if p.x == r.x {
            let denom = &p.y + &r.y + a1 * &r.x + a3;
            if denom.is_zero() {
                return None;
            }
            let (x, y) = (&p.x, &p.y);
            let den = BigRational::from_integer(2.into()) * y + a1 * x + a3;
            let three = BigRational::from_integer(3.into());
            let two = BigRational::from_integer(2.into());
            let lambda = (&three * x * x + &two * a2 * x + a4 - a1 * y) / &den;
            let nu = (-(x * x * x) + a4 * x + &two * a6 - a3 * y) / &den;
            (lambda, nu)
        } else {
            let dx = &r.x - &p.x;
            ((&r.y - &p.y) / &dx, (&p.y * &r.x - &r.y * &p.x) / &dx)
        };
        let x3 = &lambda * &lambda + a1 * &lambda - a2 - &p.x - &r.x;
        let y3 = -(&lambda + a1) * &x3 - nu - a3;
        Some(RationalPoint { x: x3, y: y3 })
    }

    pub fn double(&self, p: &RationalPoint) -> Option<RationalPoint> {
        self.add(Some(p), Some(p))
    }

    pub fn multiple(&self, p: &RationalPoint, k: u64) -> Option<RationalPoint> {
        let mut acc: Option<RationalPoint> = None;
        let mut base = Some(p.clone());
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc.as_ref(), base.as_ref());
            }
            k >>= 1;
            if k > 0 {
                base = base.as_ref().and_then(|b| self.double(b));
            }
        }
        acc
    }

    /// Whether `p` reduces to a nonsingular point modulo every prime, for
    /// this model. Writing `x = a/e^2`, `y = b/e^3`, a prime not dividing `e`
    /// gives a singular reduction exactly when it divides both partial
    /// derivatives, scaled to integers.
    pub fn reduces_nonsingular(&self, p: &RationalPoint) -> bool {
        let Some((a, b, e)) = integral_coordinates(p) else {
            return false;
        };
        let [a1, a2, a3, a4, _] = self.model.ainvs().map(BigInt::from);
        let e2 = &e * &e;
        let e3 = &e2 * &e;
        let fy = BigInt::from(2) * &b + &a1 * &a * &e + &a3 * &e3;
        let fx = BigInt::from(3) * &a * &a + BigInt::from(2) * &a2 * &a * &e2 + &a4 * &e2 * &e2 - &a1 * &b * &e;
        let mut g = fy.gcd(&fx);
        loop {
            let h = g.gcd(&e);
            if h.is_one() {
                break;
            }
            g /= h;
        }
        g.is_one()
    }
}

/// `(a, b, e)` with `x = a/e^2`, `y = b/e^3`, when the denominators have
/// that shape (always the case for points on an integral model).
fn integral_coordinates(p: &RationalPoint) -> Option<(BigInt, BigInt, BigInt)> {
    let dx = p.x.denom();
    let e = dx.sqrt();
    if &(&e * &e) != dx {
        return None;
    }
    let e3 = &e * &e * &e;
    let b = &p.y * BigRational::from_integer(e3);
    if !b.is_integer() {
        return None;
    }
    Some((p.x.numer().clone(), b.to_integer(), e))
}

fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Naive height `log max(|num x|, den x)`; zero at the identity.
pub fn naive_height(p: &RationalPoint) -> f64 {
    ln_big(p.x.numer()).max(ln_big(p.x.denom()))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    if n.bits() < 1000 && d.bits() < 1000 {
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    let sign = if n.is_negative() { -1.0 } else { 1.0 };
    sign * (ln_big(n) - ln_big(d)).exp()
}

/// Archimedean local height without the discriminant term, by the
/// alternating `x` / `x + 1` duplication series. For a point that reduces
/// nonsingularly everywhere, `ĥ(P) = lambda(P) + log den x(P)`.
pub fn archimedean_height(model: &Weierstrass, x: f64) -> f64 {
    let [b2, b4, b6, b8] = model.b_invariants_f64();
    let (c2, c4, c6, c8) = (b2 - 12.0, b4 - b2 + 6.0, b6 - 2.0 * b4 + b2 - 4.0, b8 - 3.0 * b6 + 3.0 * b4 - b2 + 3.0);
    let (mut t, mut beta) = if x.abs() >= 0.5 { (1.0 / x, true) } else { (1.0 / (x + 1.0), false) };
    let mut mu = -t.abs().ln();
    let mut f = 1.0;
    for _ in 0..48 {
        f /= 4.0;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let (w, z, zw) = if beta {
            let w = b6 * t4 + 2.0 * b4 * t3 + b2 * t2 + 4.0 * t;
            let z = 1.0 - b4 * t2 - 2.0 * b6 * t3 - b8 * t4;
            (w, z, z + w)
        } else {
            let w = c6 * t4 + 2.0 * c4 * t3 + c2 * t2 + 4.0 * t;
            let z = 1.0 - c4 * t2 - 2.0 * c6 * t3 - c8 * t4;
            (w, z, z - w)
        };
        if w.abs() <= 2.0 * z.abs() {
            mu += f * z.abs().ln();
            t = w / z;
        } else {
            mu += f * zw.abs().ln();
            t = w / zw;
            beta = !beta;
        }
    }
    mu
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeightResult {
    pub point: RationalPoint,
    pub naive: f64,
    pub canonical: f64,
    pub error: f64,
    /// Smallest `k` with `kP` nonsingular modulo every prime, or the order
    /// of a torsion point found on the way.
    pub multiplier: u64,
    pub torsion: bool,
}

pub const MAX_MULTIPLIER: u64 = 240;

/// Canonical height of `p` on `model`. The point is first moved into the
/// subgroup of everywhere-nonsingular reduction by a multiple `k`, where the
/// finite local heights reduce to `log den x`, and `ĥ(P) = ĥ(kP) / k^2`.
pub fn canonical_height(model: &Weierstrass, p: &RationalPoint) -> Result<HeightResult> {
    let curve = RationalCurve::new(model);
    if !curve.contains(p) {
        return Err(Error::NotOnCurve);
    }
    let naive = naive_height(p);
    let mut current = Some(p.clone());
    for k in 1..=MAX_MULTIPLIER {
        let Some(qk) = current.as_ref() else {
            return Ok(HeightResult { point: p.clone(), naive, canonical: 0.0, error: 0.0, multiplier: k, torsion: true });
        };
        if curve.reduces_nonsingular(qk) {
            let lambda = archimedean_height(model, rational_to_f64(&qk.x));
            let fin = ln_big(qk.x.denom());
            let k2 = (k * k) as f64;
            let canonical = (lambda + fin) / k2;
            let error = (1e-13 * (lambda.abs() + fin) + 1e-14) / k2;
            return Ok(HeightResult { point: p.clone(), naive, canonical, error, multiplier: k, torsion: false });
        }
        current = curve.add(current.as_ref(), Some(p));
    }
    Err(Error::Budget(format!("no multiple up to {MAX_MULTIPLIER} of {p} has everywhere nonsingular reduction")))
}

/// Points with `x = a/e^2`, `|a| <= bound`, `e^2 <= bound`, one of each
/// `+-` pair, ordered by naive height.
pub fn search_points(model: &Weierstrass, bound: u64) -> Vec<RationalPoint> {
    let [a1, a2, a3, a4, a6] = model.ainvs().map(BigInt::from);
    let mut out = Vec::new();
    let emax = (bound as f64).sqrt().floor() as i64;
    for e in 1..=emax.max(1) {
        let eb = BigInt::from(e);
        let e2 = &eb * &eb;
        let e3 = &e2 * &eb;
        let e4 = &e2 * &e2;
        let e6 = &e3 * &e3;
        for a in -(bound as i64)..=bound as i64 {
            if e > 1 && a.gcd(&e) != 1 {
                continue;
            }
            let ab = BigInt::from(a);
            // b^2 + (a1 a e + a3 e^3) b - (a^3 + a2 a^2 e^2 + a4 a e^4 + a6 e^6) = 0
            let lin = &a1 * &ab * &eb + &a3 * &e3;
            let rhs = &ab * &ab * &ab + &a2 * &ab * &ab * &e2 + &a4 * &ab * &e4 + &a6 * &e6;
            let disc = &lin * &lin + BigInt::from(4) * &rhs;
            if disc.is_negative() {
                continue;
            }
            let s = disc.sqrt();
            if &s * &s != disc {
                continue;
            }
            let b2 = &s - &lin;
            if b2.is_odd() {
                continue;
            }
            let b = b2 / 2;
            let x = BigRational::new(ab.clone(), e2.clone());
            let y = BigRational::new(b, e3.clone());
            out.push(RationalPoint { x, y });
        }
    }
    out.sort_by(|p, r| naive_height(p).total_cmp(&naive_height(r)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e37a() -> Weierstrass {
        Weierstrass::new(0, 0, 1, -1, 0)
    }

    #[test]
    fn group_law_on_37a() {
        let c = RationalCurve::new(&e37a());
        let p = RationalPoint::from_ints(0, 0);
        let p2 = c.double(&p).unwrap();
        assert_eq!(p2, RationalPoint::from_ints(1, 0));
        let p3 = c.add(Some(&p2), Some(&p)).unwrap();
        assert_eq!(p3, RationalPoint::from_ints(-1, -1));
        assert_eq!(c.multiple(&p, 3).unwrap(), p3);
        assert_eq!(c.add(Some(&p), Some(&c.negate(&p))), None);
        let p5 = c.multiple(&p, 5).unwrap();
        assert_eq!(p5, RationalPoint::new(BigRational::new(1.into(), 4.into()), BigRational::new((-5).into(), 8.into())));
        assert!(c.contains(&p5));
    }

    #[test]
    fn regulator_of_37a() {
        let h = canonical_height(&e37a(), &RationalPoint::from_ints(0, 0)).unwrap();
        assert!((h.canonical - 0.051_111_408_239_968_8).abs() < 1e-10, "{}", h.canonical);
        assert_eq!(h.multiplier, 1);
    }

    #[test]
    fn torsion_has_zero_height() {
        let e = Weierstrass::short(-1, 0);
        for x in [-1, 0, 1] {
            let h = canonical_height(&e, &RationalPoint::from_ints(x, 0)).unwrap();
            assert!(h.canonical.abs() <= h.error + 1e-12);
        }
        // A 5-torsion point of 11a.
        let e11 = Weierstrass::new(0, -1, 1, -10, -20);
        let h = canonical_height(&e11, &RationalPoint::from_ints(5, 5)).unwrap();
        assert!(h.torsion && h.canonical == 0.0);
        assert_eq!(h.multiplier, 5);
    }

    #[test]
    fn not_on_curve() {
        assert_eq!(canonical_height(&e37a(), &RationalPoint::from_ints(2, 3)), Err(Error::NotOnCurve));
    }

    #[test]
    fn limit_of_naive_heights() {
        // The defining limit, with exact doubling; convergence is O(4^-n).
        let e = e37a();
        let c = RationalCurve::new(&e);
        let p = RationalPoint::from_ints(2, 2);
        let h = canonical_height(&e, &p).unwrap().canonical;
        let mut q = p.clone();
        let mut scale = 1.0;
        for _ in 0..7 {
            q = c.double(&q).unwrap();
            scale *= 4.0;
        }
        assert!((naive_height(&q) / scale - h).abs() < 1e-3);
    }

    #[test]
    fn search_finds_small_points() {
        let pts = search_points(&e37a(), 4);
        assert!(pts.contains(&RationalPoint::from_ints(0, 0)) || pts.contains(&RationalPoint::from_ints(0, -1)));
        assert!(pts.iter().all(|p| RationalCurve::new(&e37a()).contains(p)));
        assert!(pts.iter().any(|p| p.x == BigRational::new(1.into(), 4.into())));
    }

    #[test]
    fn parse_points() {
        let p = RationalPoint::parse("1/4, -5/8").unwrap();
        assert_eq!(p.y, BigRational::new((-5).into(), 8.into()));
        assert!(RationalPoint::parse("1/0,2").is_err());
        assert!(RationalPoint::parse("3").is_err());
    }
}
