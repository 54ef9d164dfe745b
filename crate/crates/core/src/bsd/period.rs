//! Period lattice of `y^2 = x^3 + a x + b` for the differential `dx / 2y`.

use std::f64::consts::PI;

use num_traits::ToPrimitive;

use crate::curve::ShortModel;
use crate::error::{Error, Result};

/// Arithmetic–geometric mean of two positive reals.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (m, g) = (0.5 * (a + b), (a * b).sqrt());
        if (m - g).abs() <= 1e-16 * m {
            return m;
        }
        a = m;
        b = g;
    }
    a
}

/// Real roots of `x^3 + a x + b`, descending, polished by Newton steps.
pub fn real_roots(a: f64, b: f64) -> Vec<f64> {
    let disc = -4.0 * a * a * a - 27.0 * b * b;
    let mut roots = if disc > 0.0 {
        let r = 2.0 * (-a / 3.0).sqrt();
        let arg = (3.0 * b / (a * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3).map(|k| r * (theta - 2.0 * PI * k as f64 / 3.0).cos()).collect::<Vec<_>>()
    } else {
        let q = (b / 2.0).powi(2) + (a / 3.0).powi(3);
        let s = q.max(0.0).sqrt();
        // Pick the larger-magnitude cube root first to avoid cancellation.
        let u = (-b / 2.0 + if b <= 0.0 { s } else { -s }).cbrt();
        let x = if u == 0.0 { 0.0 } else { u - a / (3.0 * u) };
        vec![x]
    };
    for x in roots.iter_mut() {
        for _ in 0..4 {
            let f = (*x * *x + a) * *x + b;
            let df = 3.0 * *x * *x + a;
            if df == 0.0 {
                break;
            }
            *x -= f / df;
        }
    }
    roots.sort_by(|p, q| q.total_cmp(p));
    roots
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periods {
    /// Integral of `|dx / 2y|` over all of `E(R)`.
    pub real: f64,
    /// Area of a fundamental parallelogram of the lattice.
    pub area: f64,
    /// Connected components of `E(R)`.
    pub components: u8,
}

/// Periods of `y^2 = x^3 + a x + b` with `omega = dx / 2y`.
pub fn periods(a: f64, b: f64) -> Result<Periods> {
    let disc = -16.0 * (4.0 * a * a * a + 27.0 * b * b);
    if disc == 0.0 || !disc.is_finite() {
        return Err(Error::Singular(format!("y^2 = x^3 + ({a}) x + ({b})")));
    }
    let roots = real_roots(a, b);
    if disc > 0.0 {
        let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
        let w1 = PI / agm((e1 - e3).sqrt(), (e1 - e2).sqrt());
        let w2 = PI / agm((e1 - e3).sqrt(), (e2 - e3).sqrt());
        Ok(Periods { real: 2.0 * w1, area: w1 * w2, components: 2 })
    } else {
        let e1 = roots[0];
        let alpha = 3.0 * e1;
        let beta = (3.0 * e1 * e1 + a).sqrt();
        let w1 = 2.0 * PI / agm(2.0 * beta.sqrt(), (2.0 * beta + alpha).sqrt());
        let im = PI / agm(2.0 * beta.sqrt(), (2.0 * beta - alpha).sqrt());
        Ok(Periods { real: w1, area: w1 * im, components: 1 })
    }
}

fn coefficients(model: &ShortModel) -> (f64, f64) {
    (model.a.to_f64().unwrap_or(f64::NAN), model.b.to_f64().unwrap_or(f64::NAN))
}

/// Real period of the curve; the short model keeps the differential of the
/// model it came from.
pub fn real_period(model: &ShortModel) -> Result<f64> {
    let (a, b) = coefficients(model);
    Ok(periods(a, b)?.real)
}

/// Periods of the twist `y^2 = x^3 + a d^2 x + b d^3`, which is the minimal
/// model's differential when `d` is fundamental and prime to `2N`.
pub fn twist_periods(model: &ShortModel, d: i64) -> Result<Periods> {
    let (a, b) = coefficients(model);
    let d = d as f64;
    periods(a * d * d, b * d * d * d)
}
