use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{compute_spectrum, unperturbed_eigenvalue, PerturbedOperator, SpectrumData};
use crate::ctrig::{check_domain, csd_eval, OMEGA, OMEGA2};
use crate::error::{Result, SpectralError};
use crate::potential::transform_pack;
use crate::ComplexScalar;

const I: ComplexScalar = Complex64::new(0.0, 1.0);
const ONE: ComplexScalar = Complex64::new(1.0, 0.0);

/// Below this |λ| the closed form of Δ(α, λ) is not evaluated.
pub const NEAR_ZERO_LAMBDA: f64 = 1e-4;
/// Below this |λ| the determinant cross-checks are not evaluated.
pub const NEAR_ZERO_DETERMINANT: f64 = 1e-3;
/// Unperturbed factors appended beyond the truncation window.
const PRODUCT_MODES: i64 = 200;

/// Δ(0, λ) = −8i sin(λ/2) sin(ωλ/2) sin(ω²λ/2).
pub fn delta0(lambda: ComplexScalar) -> Result<ComplexScalar> {
    check_domain(I * lambda)?;
    let h = lambda * 0.5;
    Ok(Complex64::new(0.0, -8.0) * h.sin() * (OMEGA * h).sin() * (OMEGA2 * h).sin())
}

/// Δ(0, λ) = 3[c(iλ) − c(−iλ)].
pub fn delta0_from_c(lambda: ComplexScalar) -> Result<ComplexScalar> {
    let p = csd_eval(I * lambda)?;
    let m = csd_eval(-I * lambda)?;
    Ok((p.c - m.c) * 3.0)
}

/// Δ(α, λ) = Δ(0, λ) + (iα/λ²)[F(λ) + F*(λ)].
pub fn delta_alpha(op: &PerturbedOperator, lambda: ComplexScalar) -> Result<ComplexScalar> {
    if lambda.norm() < NEAR_ZERO_LAMBDA {
        return Err(SpectralError::NearZeroLambda { magnitude: lambda.norm() });
    }
    let d0 = delta0(lambda)?;
    if op.alpha() == 0.0 {
        return Ok(d0);
    }
    let p = transform_pack(op.potential(), lambda)?;
    let q = transform_pack(op.potential(), -lambda)?;
    let plus = csd_eval(I * lambda)?;
    let minus = csd_eval(-I * lambda)?;
    let f = p.m * (plus.c * 3.0 - 1.0) - p.vc * q.wd_star - p.vs * q.ws_star - p.vd * q.wc_star;
    let f_star = p.m_star * (minus.c * 3.0 - 1.0) - p.vc_star * q.wd - p.vs_star * q.ws - p.vd_star * q.wc;
    Ok(d0 + I * op.alpha() / (lambda * lambda) * (f + f_star))
}

/// Leading Taylor coefficients Δ(α, λ) = c₀ + c₁λ³ + O(λ⁶).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesHead {
    pub c0: ComplexScalar,
    pub c1: ComplexScalar,
}

/// c₀ = iα|v₀|² and c₁ = −i(1 + α Σ_{k≠0} |v_k|²/(2kπ)³) over the window.
pub fn series_head(op: &PerturbedOperator) -> SeriesHead {
    let alpha = op.alpha();
    let v0 = op.coefficient(0);
    let mut tail = 0.0;
    for (n, v) in op.modes() {
        if n != 0 {
            tail += v.norm_sqr() / unperturbed_eigenvalue(n);
        }
    }
    SeriesHead { c0: I * alpha * v0.norm_sqr(), c1: -I * (1.0 + alpha * tail) }
}

fn det3(m: &[[ComplexScalar; 3]; 3]) -> ComplexScalar {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: &[[ComplexScalar; 4]; 4]) -> ComplexScalar {
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..4 {
        let mut minor = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (row, source) in minor.iter_mut().zip(&m[1..]) {
            let kept = source.iter().enumerate().filter(|&(c, _)| c != col);
            for (slot, (_, &entry)) in row.iter_mut().zip(kept) {
                *slot = entry;
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][col] * det3(&minor) * sign;
    }
    total
}

fn unperturbed_rows(lambda: ComplexScalar) -> Result<[[ComplexScalar; 3]; 3]> {
    let t = csd_eval(I * lambda)?;
    let il = I * lambda;
    Ok([[t.c - 1.0, t.s / il, t.d / (il * il)], [il * t.d, t.c - 1.0, t.s / il], [il * il * t.s, il * t.d, t.c - 1.0]])
}

fn guard_determinant(lambda: ComplexScalar) -> Result<()> {
    if lambda.norm() < NEAR_ZERO_DETERMINANT {
        return Err(SpectralError::NearZeroLambda { magnitude: lambda.norm() });
    }
    Ok(())
}

/// Determinant of the 3×3 periodic boundary system of i·y‴ = λ³y.
pub fn det_m0(lambda: ComplexScalar) -> Result<ComplexScalar> {
    guard_determinant(lambda)?;
    Ok(det3(&unperturbed_rows(lambda)?))
}

/// Determinant of the 4×4 system for the perturbed problem.
pub fn det_malpha(op: &PerturbedOperator, lambda: ComplexScalar) -> Result<ComplexScalar> {
    guard_determinant(lambda)?;
    let rows = unperturbed_rows(lambda)?;
    let p = transform_pack(op.potential(), lambda)?;
    let q = transform_pack(op.potential(), -lambda)?;
    let a = op.alpha();
    let il = I * lambda;
    let l2 = lambda * lambda;
    Ok(det4(&[
        [p.vc_star, p.vs_star / il, p.vd_star / (il * il), -(ONE + I * a * p.m / l2)],
        [rows[0][0], rows[0][1], rows[0][2], -I * a * q.wd / l2],
        [rows[1][0], rows[1][1], rows[1][2], q.ws * a / lambda],
        [rows[2][0], rows[2][1], rows[2][2], I * a * q.wc],
    ]))
}

fn relative_gap(a: ComplexScalar, b: ComplexScalar) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// |det M(0, λ) − Δ(0, λ)| / max(1, |Δ(0, λ)|).
pub fn det_m0_check(lambda: ComplexScalar) -> Result<f64> {
    Ok(relative_gap(det_m0(lambda)?, delta0(lambda)?))
}

/// |det M(α, λ) − Δ(α, λ)| / max(1, |Δ(α, λ)|).
pub fn det_malpha_check(op: &PerturbedOperator, lambda: ComplexScalar) -> Result<f64> {
    Ok(relative_gap(det_malpha(op, lambda)?, delta_alpha(op, lambda)?))
}

/// Truncated product c₀ Π(1 − λ³/μ) over `spectrum`, or c₁λ³ Π'(1 − λ³/μ)
/// when 0 is a simple eigenvalue, extended by unperturbed factors up to
/// |n| = 200.
pub fn hadamard_product(head: SeriesHead, spectrum: &SpectrumData, lambda: ComplexScalar) -> Result<ComplexScalar> {
    let l3 = lambda * lambda * lambda;
    let zero = spectrum.entries.iter().find(|e| e.value == 0.0);
    let mut prod = match zero {
        None => head.c0,
        Some(e) if e.multiplicity == 1 => head.c1 * l3,
        Some(_) => return Err(SpectralError::InvalidInput { reason: "double eigenvalue at zero" }),
    };
    let mut factors: Vec<(f64, u8)> =
        spectrum.entries.iter().filter(|e| e.value != 0.0).map(|e| (e.value, e.multiplicity)).collect();
    factors.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    for (mu, mult) in factors {
        for _ in 0..mult {
            prod *= ONE - l3 / mu;
        }
    }
    let l6 = l3 * l3;
    for n in spectrum.truncation as i64 + 1..=PRODUCT_MODES {
        let z = unperturbed_eigenvalue(n);
        prod *= ONE - l6 / (z * z);
    }
    Ok(prod)
}

/// Relative mismatch between Δ(α, λ) and its truncated product over the
/// computed spectrum.
pub fn hadamard_check(op: &PerturbedOperator, lambda: ComplexScalar) -> Result<f64> {
    let spectrum = compute_spectrum(op)?;
    let delta = delta_alpha(op, lambda)?;
    let prod = hadamard_product(series_head(op), &spectrum, lambda)?;
    Ok((delta - prod).norm() / delta.norm())
}
