//! Cubic trigonometric functions c, s, d.
//!
//! With ω = e^{2πi/3} they are the three projections of the exponential
//! onto the cube roots of unity:
//!
//! ```text
//! c(z) = (e^{ωz} + e^{ω²z} + e^{z}) / 3
//! s(z) = (ω² e^{ωz} + ω e^{ω²z} + e^{z}) / 3
//! d(z) = (ω e^{ωz} + ω² e^{ω²z} + e^{z}) / 3
//! ```
//!
//! so that c' = d, s' = c, d' = s.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Result, SpectralError};
use crate::ComplexScalar;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Primitive cube root of unity e^{2πi/3}.
pub const OMEGA: ComplexScalar = Complex64::new(-0.5, SQRT3 / 2.0);
/// ω² = conj(ω).
pub const OMEGA2: ComplexScalar = Complex64::new(-0.5, -SQRT3 / 2.0);

/// Below this modulus the Taylor series is used.
pub const SERIES_RADIUS: f64 = 0.5;
/// Largest modulus accepted by [`csd_eval`].
pub const MAX_MODULUS: f64 = 1.0e6;
/// Largest exponent fed to `exp` before overflow.
const MAX_EXPONENT: f64 = 709.0;
/// Largest |n| accepted by [`csd_at_2npi`].
pub const MAX_CLOSED_FORM_N: i64 = 40;
/// Scaled tolerance used by the identity audit.
pub const IDENTITY_TOLERANCE: f64 = 1.0e-10;

/// ω^k for any integer k.
pub fn omega_pow(k: i64) -> ComplexScalar {
    match k.rem_euclid(3) {
        0 => Complex64::new(1.0, 0.0),
        1 => OMEGA,
        _ => OMEGA2,
    }
}

/// The triple (c(z), s(z), d(z)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsdTriple {
    pub c: ComplexScalar,
    pub s: ComplexScalar,
    pub d: ComplexScalar,
}

impl CsdTriple {
    /// Triple of the derivatives (c', s', d') = (d, c, s).
    pub fn derivative(&self) -> CsdTriple {
        CsdTriple { c: self.d, s: self.c, d: self.s }
    }

    /// `k`-fold derivative scaled by `factor^k`, i.e. the x-derivatives of
    /// the triple evaluated at `factor * x + const`.
    pub fn chain_derivative(&self, factor: ComplexScalar, k: usize) -> CsdTriple {
        let mut t = *self;
        let mut scale = Complex64::new(1.0, 0.0);
        for _ in 0..k {
            t = t.derivative();
            scale *= factor;
        }
        CsdTriple { c: t.c * scale, s: t.s * scale, d: t.d * scale }
    }

    /// Residual of c³ + s³ + d³ − 3csd = 1, unscaled.
    pub fn main_identity_defect(&self) -> ComplexScalar {
        let (c, s, d) = (self.c, self.s, self.d);
        c * c * c + s * s * s + d * d * d - c * s * d * 3.0 - 1.0
    }
}

pub(crate) fn check_domain(z: ComplexScalar) -> Result<()> {
    let r = z.norm();
    if !r.is_finite() || r > MAX_MODULUS {
        return Err(SpectralError::OverflowDomain { magnitude: r });
    }
    for w in [OMEGA, OMEGA2, Complex64::new(1.0, 0.0)] {
        if (w * z).re > MAX_EXPONENT {
            return Err(SpectralError::OverflowDomain { magnitude: r });
        }
    }
    Ok(())
}

/// Evaluates the triple, switching between the Taylor series and the
/// exponential formula at |z| = [`SERIES_RADIUS`].
pub fn csd_eval(z: ComplexScalar) -> Result<CsdTriple> {
    check_domain(z)?;
    if z.norm() <= SERIES_RADIUS {
        Ok(csd_series(z))
    } else {
        Ok(exponential_unchecked(z))
    }
}

/// Exponential-sum evaluation regardless of |z|.
pub fn csd_exponential(z: ComplexScalar) -> Result<CsdTriple> {
    check_domain(z)?;
    Ok(exponential_unchecked(z))
}

fn exponential_unchecked(z: ComplexScalar) -> CsdTriple {
    let a1 = (OMEGA * z).exp();
    let a2 = (OMEGA2 * z).exp();
    let a3 = z.exp();
    CsdTriple {
        c: (a1 + a2 + a3) / 3.0,
        s: (OMEGA2 * a1 + OMEGA * a2 + a3) / 3.0,
        d: (OMEGA * a1 + OMEGA2 * a2 + a3) / 3.0,
    }
}

/// Sum of `first * Π z³/((offset+3j+1)(offset+3j+2)(offset+3j+3))`.
fn cubic_series(z: ComplexScalar, first: ComplexScalar, offset: u32) -> ComplexScalar {
    let z3 = z * z * z;
    let mut term = first;
    let mut sum = term;
    let mut k = offset as f64;
    for _ in 0..400 {
        term = term * z3 / ((k + 1.0) * (k + 2.0) * (k + 3.0));
        k += 3.0;
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() || term.norm() == 0.0 {
            break;
        }
    }
    sum
}

/// Taylor-series evaluation regardless of |z|. Accurate for moderate |z|
/// without cancellation; intended for |z| ≤ [`SERIES_RADIUS`] and audits.
pub fn csd_series(z: ComplexScalar) -> CsdTriple {
    CsdTriple {
        c: cubic_series(z, Complex64::new(1.0, 0.0), 0),
        s: cubic_series(z, z, 1),
        d: cubic_series(z, z * z / 2.0, 2),
    }
}

/// s(z)/z, analytic at zero.
pub fn s_over_z(z: ComplexScalar) -> Result<ComplexScalar> {
    if z.norm() <= SERIES_RADIUS {
        Ok(cubic_series(z, Complex64::new(1.0, 0.0), 1))
    } else {
        Ok(csd_eval(z)?.s / z)
    }
}

/// d(z)/z², analytic at zero.
pub fn d_over_z2(z: ComplexScalar) -> Result<ComplexScalar> {
    if z.norm() <= SERIES_RADIUS {
        Ok(cubic_series(z, Complex64::new(0.5, 0.0), 2))
    } else {
        Ok(csd_eval(z)?.d / (z * z))
    }
}

/// Closed-form values at z = 2nπi.
pub fn csd_at_2npi(n: i64) -> Result<CsdTriple> {
    if n.abs() > MAX_CLOSED_FORM_N {
        return Err(SpectralError::OverflowDomain { magnitude: 2.0 * PI * n.abs() as f64 });
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let x = SQRT3 * n as f64 * PI;
    let ch = x.cosh();
    let sh = x.sinh();
    Ok(CsdTriple {
        c: Complex64::new((1.0 + 2.0 * sign * ch) / 3.0, 0.0),
        s: Complex64::new((1.0 - sign * ch) / 3.0, SQRT3 * sign * sh / 3.0),
        d: Complex64::new((1.0 - sign * ch) / 3.0, -SQRT3 * sign * sh / 3.0),
    })
}

/// Identity family checked by [`identity_residuals`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityFamily {
    /// c' = d, s' = c, d' = s, by contour differentiation.
    Derivative,
    /// f(z̄) = conj(f(z)).
    Conjugation,
    /// c(ωz) = c(z), s(ωz) = ω s(z), d(ωz) = ω² d(z).
    Rotation,
    /// e^{ω^k z} = c + ω^k s + ω^{2k} d.
    Euler,
    /// c³ + s³ + d³ − 3csd = 1.
    Cubic,
    /// Addition formulas for c, s, d at z₁ + z₂.
    Addition,
    /// 3c(z)² = c(2z) + 2c(−z) and companions.
    Duplication,
    /// c² − sd = c(−z) and companions.
    Reflection,
    /// Series and exponential evaluations agree.
    SeriesAgreement,
}

impl IdentityFamily {
    pub fn name(&self) -> &'static str {
        match self {
            IdentityFamily::Derivative => "derivative",
            IdentityFamily::Conjugation => "conjugation",
            IdentityFamily::Rotation => "rotation",
            IdentityFamily::Euler => "euler",
            IdentityFamily::Cubic => "cubic",
            IdentityFamily::Addition => "addition",
            IdentityFamily::Duplication => "duplication",
            IdentityFamily::Reflection => "reflection",
            IdentityFamily::SeriesAgreement => "series_agreement",
        }
    }

    pub const ALL: [IdentityFamily; 9] = [
        IdentityFamily::Derivative,
        IdentityFamily::Conjugation,
        IdentityFamily::Rotation,
        IdentityFamily::Euler,
        IdentityFamily::Cubic,
        IdentityFamily::Addition,
        IdentityFamily::Duplication,
        IdentityFamily::Reflection,
        IdentityFamily::SeriesAgreement,
    ];
}

/// Scaled residual of one identity family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub family: IdentityFamily,
    /// |lhs − rhs| / max(1, Σ|terms|), maximised over the family's members.
    pub residual: f64,
}

fn scaled(diff: ComplexScalar, scale: f64) -> f64 {
    diff.norm() / scale.max(1.0)
}

fn contour_derivative(z: ComplexScalar) -> Result<(CsdTriple, f64)> {
    const POINTS: usize = 48;
    const RADIUS: f64 = 1.0;
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    let mut scale: f64 = 0.0;
    for j in 0..POINTS {
        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / POINTS as f64);
        let t = csd_eval(z + e * RADIUS)?;
        scale = scale.max(t.c.norm()).max(t.s.norm()).max(t.d.norm());
        let w = e.conj() / (RADIUS * POINTS as f64);
        acc[0] += t.c * w;
        acc[1] += t.s * w;
        acc[2] += t.d * w;
    }
    Ok((CsdTriple { c: acc[0], s: acc[1], d: acc[2] }, scale))
}

/// Scaled residuals of every identity family at (z1, z2). Single-argument
/// families use `z1`; the addition formulas use both.
pub fn identity_residuals(z1: ComplexScalar, z2: ComplexScalar) -> Result<Vec<IdentityResidual>> {
    let a = csd_eval(z1)?;
    let b = csd_eval(z2)?;
    let sum = csd_eval(z1 + z2)?;
    let neg = csd_eval(-z1)?;
    let dbl = csd_eval(z1 * 2.0)?;
    let conj = csd_eval(z1.conj())?;
    let rot = csd_eval(OMEGA * z1)?;
    let na = a.c.norm() + a.s.norm() + a.d.norm();

    let mut out = Vec::with_capacity(IdentityFamily::ALL.len());
    let mut push = |family, residual: f64| out.push(IdentityResidual { family, residual });

    let (deriv, dscale) = contour_derivative(z1)?;
    let derivative =
        scaled(deriv.c - a.d, dscale).max(scaled(deriv.s - a.c, dscale)).max(scaled(deriv.d - a.s, dscale));
    push(IdentityFamily::Derivative, derivative);

    let conjugation =
        scaled(conj.c - a.c.conj(), na).max(scaled(conj.s - a.s.conj(), na)).max(scaled(conj.d - a.d.conj(), na));
    push(IdentityFamily::Conjugation, conjugation);

    let rotation = scaled(rot.c - a.c, na).max(scaled(rot.s - OMEGA * a.s, na)).max(scaled(rot.d - OMEGA2 * a.d, na));
    push(IdentityFamily::Rotation, rotation);

    let mut euler: f64 = 0.0;
    for k in 1..=3 {
        let w = omega_pow(k);
        let lhs = (w * z1).exp();
        let rhs = a.c + w * a.s + w * w * a.d;
        euler = euler.max(scaled(lhs - rhs, lhs.norm() + na));
    }
    push(IdentityFamily::Euler, euler);

    let cubic_scale =
        a.c.norm().powi(3) + a.s.norm().powi(3) + a.d.norm().powi(3) + 3.0 * a.c.norm() * a.s.norm() * a.d.norm();
    push(IdentityFamily::Cubic, scaled(a.main_identity_defect(), cubic_scale));

    let (ac, as_, ad) = (a.c, a.s, a.d);
    let (bc, bs, bd) = (b.c, b.s, b.d);
    let pair_scale = na * (bc.norm() + bs.norm() + bd.norm());
    let addition = scaled(sum.c - (ac * bc + as_ * bd + ad * bs), pair_scale + sum.c.norm())
        .max(scaled(sum.s - (ac * bs + as_ * bc + ad * bd), pair_scale + sum.s.norm()))
        .max(scaled(sum.d - (ac * bd + as_ * bs + ad * bc), pair_scale + sum.d.norm()));
    push(IdentityFamily::Addition, addition);

    let sq_scale =
        na * na + dbl.c.norm() + dbl.s.norm() + dbl.d.norm() + 2.0 * (neg.c.norm() + neg.s.norm() + neg.d.norm());
    let duplication = scaled(ac * ac * 3.0 - (dbl.c + neg.c * 2.0), sq_scale)
        .max(scaled(as_ * ad * 3.0 - (dbl.c - neg.c), sq_scale))
        .max(scaled(ad * ad * 3.0 - (dbl.s + neg.s * 2.0), sq_scale))
        .max(scaled(as_ * as_ * 3.0 - (dbl.d + neg.d * 2.0), sq_scale));
    push(IdentityFamily::Duplication, duplication);

    let refl_scale = na * na + neg.c.norm() + neg.s.norm() + neg.d.norm();
    let reflection = scaled(ac * ac - as_ * ad - neg.c, refl_scale)
        .max(scaled(ad * ad - ac * as_ - neg.s, refl_scale))
        .max(scaled(as_ * as_ - ac * ad - neg.d, refl_scale));
    push(IdentityFamily::Reflection, reflection);

    let series = csd_series(z1);
    let expo = exponential_unchecked(z1);
    let mut growth = 0.0;
    for k in 1..=3 {
        growth += (omega_pow(k) * z1).exp().norm();
    }
    let agreement =
        scaled(series.c - expo.c, growth).max(scaled(series.s - expo.s, growth)).max(scaled(series.d - expo.d, growth));
    push(IdentityFamily::SeriesAgreement, agreement);

    Ok(out)
}

/// Scaled mismatch between [`csd_at_2npi`] and [`csd_eval`] at 2nπi, also
/// covering c + s + d = 1 there.
pub fn closed_form_residual(n: i64) -> Result<f64> {
    let exact = csd_at_2npi(n)?;
    let z = Complex64::new(0.0, 2.0 * PI * n as f64);
    let eval = csd_eval(z)?;
    let scale = exact.c.norm() + exact.s.norm() + exact.d.norm();
    let one = exact.c + exact.s + exact.d - 1.0;
    Ok(scaled(exact.c - eval.c, scale)
        .max(scaled(exact.s - eval.s, scale))
        .max(scaled(exact.d - eval.d, scale))
        .max(scaled(one, scale)))
}
