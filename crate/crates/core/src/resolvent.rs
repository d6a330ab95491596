//! Resolvents of the unperturbed and perturbed operators and the
//! inhomogeneous initial-value problem i·y‴ = λ³y + f.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ctrig::{csd_eval, d_over_z2, s_over_z, CsdTriple};
use crate::error::{Result, SpectralError};
use crate::forward::{compute_spectrum, delta0, nearest_mode, unperturbed_eigenvalue, PerturbedOperator};
use crate::potential::Potential;
use crate::ComplexScalar;

const ZERO: ComplexScalar = Complex64::new(0.0, 0.0);
const I: ComplexScalar = Complex64::new(0.0, 1.0);

/// Minimum distance between z and the spectrum.
pub const POLE_PROXIMITY: f64 = 1e-8;
/// Minimum number of modes kept by the series representation.
pub const MIN_SERIES_MODES: usize = 64;

/// Cube root used for z = λ³: the real root for real z, the principal
/// root (argument in (−π/3, π/3]) otherwise.
pub fn cube_root(z: ComplexScalar) -> ComplexScalar {
    if z.im == 0.0 {
        Complex64::new(libm::cbrt(z.re), 0.0)
    } else {
        Complex64::from_polar(libm::cbrt(z.norm()), z.arg() / 3.0)
    }
}

/// Solution of i·y‴ = λ³y + f with (y, y′, y″)(0) = `initial`.
#[derive(Debug, Clone, PartialEq)]
pub struct IvpSolution {
    lambda: ComplexScalar,
    initial: [ComplexScalar; 3],
    forcing: Potential,
}

/// Returns the solution of the initial-value problem, evaluated on demand.
pub fn solve_ivp(lambda: ComplexScalar, initial: [ComplexScalar; 3], forcing: &Potential) -> IvpSolution {
    IvpSolution { lambda, initial, forcing: forcing.clone() }
}

impl IvpSolution {
    pub fn eval(&self, x: f64) -> Result<ComplexScalar> {
        Ok(self.jet(x)?[0])
    }

    /// (y, y′, y″) at x.
    pub fn jet(&self, x: f64) -> Result<[ComplexScalar; 3]> {
        let l = self.lambda;
        let il = I * l;
        let [a0, a1, a2] = self.initial;
        let u = il * x;
        let t = csd_eval(u)?;
        let s1 = s_over_z(u)?;
        let d2 = d_over_z2(u)?;
        let hom = [
            a0 * t.c + a1 * x * s1 + a2 * x * x * d2,
            a0 * il * t.d + a1 * t.c + a2 * x * s1,
            a0 * il * il * t.s + a1 * il * t.d + a2 * t.c,
        ];
        // x-derivatives of K(x − t) = i d(iλ(x−t))/λ², written through
        // the scaled helpers so that λ = 0 is regular.
        let part = self.forcing.integrate_against(0.0, x, |t, f| {
            let r = x - t;
            let w = il * r;
            let k0 = -I * r * r * d_over_z2(w)?;
            let k1 = -I * r * s_over_z(w)?;
            let k2 = -I * csd_eval(w)?.c;
            Ok([k0 * f, k1 * f, k2 * f])
        })?;
        Ok([hom[0] + part[0], hom[1] + part[1], hom[2] + part[2]])
    }
}

/// Series resolvent samples with their Fourier modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResolvent {
    /// (n, y_n) for the retained modes.
    pub modes: Vec<(i64, ComplexScalar)>,
    /// y on the requested grid.
    pub values: Vec<ComplexScalar>,
    /// Estimate of the omitted tail.
    pub tail_bound: f64,
}

impl SeriesResolvent {
    /// (y, y′, y″) at x from the modes.
    pub fn jet(&self, x: f64) -> [ComplexScalar; 3] {
        let mut out = [ZERO; 3];
        for &(n, c) in &self.modes {
            let k = Complex64::new(0.0, 2.0 * PI * n as f64);
            let e = c * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * x);
            out[0] += e;
            out[1] += e * k;
            out[2] += e * k * k;
        }
        out
    }
}

fn distance_to_lattice(z: ComplexScalar) -> f64 {
    let n = nearest_mode(z.re);
    (n - 1..=n + 1).map(|k| (z - unperturbed_eigenvalue(k)).norm()).fold(f64::INFINITY, f64::min)
}

fn series_modes(f: &Potential, truncation: usize) -> i64 {
    let k = (3 * truncation).max(MIN_SERIES_MODES) as i64;
    match (f.max_mode(), f.resolvable_modes()) {
        (Some(m), _) => k.max(m as i64),
        (None, Some(limit)) => k.min(limit),
        _ => k,
    }
}

fn sample_modes(modes: &[(i64, ComplexScalar)], x_grid: &[f64]) -> Vec<ComplexScalar> {
    x_grid
        .iter()
        .map(|&x| modes.iter().map(|&(n, c)| c * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * x)).sum())
        .collect()
}

fn tail_estimate(edge: f64, z: ComplexScalar, k: i64) -> f64 {
    let zk = unperturbed_eigenvalue(k + 1);
    let gap = (zk - z.norm()).max(zk * 0.5);
    // Σ_{n>k} 1/n³ ≤ 1/(2k²), scaled by the first omitted pole.
    2.0 * edge * (zk / gap) / ((2.0 * PI).powi(3) * 2.0 * (k * k) as f64)
}

/// R_{L₀}(z) f = Σ f_n/(z_n − z) e^{2nπix} over |n| ≤ max(3N, 64).
pub fn resolvent_l0_series(
    z: ComplexScalar,
    f: &Potential,
    x_grid: &[f64],
    truncation: usize,
) -> Result<SeriesResolvent> {
    let dist = distance_to_lattice(z);
    if dist < POLE_PROXIMITY {
        return Err(SpectralError::PoleProximity { distance: dist });
    }
    let k = series_modes(f, truncation);
    let mut modes = Vec::with_capacity(2 * k as usize + 1);
    for n in -k..=k {
        let fn_ = f.fourier_coefficient(n)?;
        if fn_ != ZERO {
            modes.push((n, fn_ / (unperturbed_eigenvalue(n) - z)));
        }
    }
    let edge = f.fourier_coefficient(k)?.norm().max(f.fourier_coefficient(-k)?.norm());
    Ok(SeriesResolvent { values: sample_modes(&modes, x_grid), tail_bound: tail_estimate(edge, z, k), modes })
}

struct KernelFrame {
    il: ComplexScalar,
    prefactor: ComplexScalar,
    below: ComplexScalar,
    above: ComplexScalar,
}

fn kernel_frame(z: ComplexScalar) -> Result<KernelFrame> {
    let dist = distance_to_lattice(z);
    if dist < POLE_PROXIMITY {
        return Err(SpectralError::PoleProximity { distance: dist });
    }
    let lambda = cube_root(z);
    let il = I * lambda;
    let d0 = delta0(lambda)?;
    Ok(KernelFrame {
        il,
        prefactor: -I / (lambda * lambda * d0),
        below: 1.0 - csd_eval(il)?.c * 3.0,
        above: 1.0 - csd_eval(-il)?.c * 3.0,
    })
}

fn kernel_jet_at(frame: &KernelFrame, f: &Potential, x: f64) -> Result<[ComplexScalar; 3]> {
    let il = frame.il;
    let left: [CsdTriple; 3] = {
        let t = csd_eval(il * (x - 1.0))?;
        [t, t.chain_derivative(il, 1), t.chain_derivative(il, 2)]
    };
    let right: [CsdTriple; 3] = {
        let t = csd_eval(il * x)?;
        [t, t.chain_derivative(il, 1), t.chain_derivative(il, 2)]
    };
    let integrand = |t: f64, ft: ComplexScalar, branch: ComplexScalar| -> Result<[ComplexScalar; 3]> {
        let a = csd_eval(-il * t)?;
        let b = csd_eval(il * (1.0 - t))?;
        let g = csd_eval(il * (x - t))?;
        let mut out = [ZERO; 3];
        for j in 0..3 {
            let gj = g.chain_derivative(il, j);
            let (p, q) = (&left[j], &right[j]);
            let common = a.d * p.c + a.s * p.s + a.c * p.d + q.d * b.c + q.s * b.s + q.c * b.d;
            out[j] = (gj.d * branch + common) * ft;
        }
        Ok(out)
    };
    let lower = f.integrate_against(0.0, x, |t, ft| integrand(t, ft, frame.below))?;
    let upper = f.integrate_against(x, 1.0, |t, ft| integrand(t, ft, frame.above))?;
    Ok([
        frame.prefactor * (lower[0] + upper[0]),
        frame.prefactor * (lower[1] + upper[1]),
        frame.prefactor * (lower[2] + upper[2]),
    ])
}

/// R_{L₀}(z) f by the closed-form two-branch kernel, integrated in t with
/// the split at t = x.
pub fn resolvent_l0_kernel(z: ComplexScalar, f: &Potential, x_grid: &[f64]) -> Result<Vec<ComplexScalar>> {
    let frame = kernel_frame(z)?;
    x_grid.iter().map(|&x| Ok(kernel_jet_at(&frame, f, x)?[0])).collect()
}

/// (y, y′, y″) of the kernel resolvent at x.
pub fn resolvent_l0_kernel_jet(z: ComplexScalar, f: &Potential, x: f64) -> Result<[ComplexScalar; 3]> {
    kernel_jet_at(&kernel_frame(z)?, f, x)
}

/// 1 + α⟨R_{L₀}(z)v, v⟩ over the operator's window.
pub fn resolvent_denominator(op: &PerturbedOperator, z: ComplexScalar) -> ComplexScalar {
    let s: ComplexScalar = op.modes().map(|(n, v)| v.norm_sqr() / (unperturbed_eigenvalue(n) - z)).sum();
    s * op.alpha() + 1.0
}

/// R_{L_α}(z) f = R₀f − α⟨R₀f, v⟩/(1 + α⟨R₀v, v⟩)·R₀v in the mode basis.
pub fn resolvent_l_alpha(
    op: &PerturbedOperator,
    z: ComplexScalar,
    f: &Potential,
    x_grid: &[f64],
) -> Result<SeriesResolvent> {
    let spectrum = compute_spectrum(op)?;
    let dist = spectrum.entries.iter().map(|e| (z - e.value).norm()).fold(distance_to_lattice(z), f64::min);
    if dist < POLE_PROXIMITY {
        return Err(SpectralError::PoleProximity { distance: dist });
    }
    let base = resolvent_l0_series(z, f, &[], op.truncation())?;
    let projection: ComplexScalar = base.modes.iter().map(|&(n, r)| r * op.coefficient(n).conj()).sum();
    let factor = projection * op.alpha() / resolvent_denominator(op, z);
    let n = op.truncation() as i64;
    let k = base.modes.iter().map(|(m, _)| m.abs()).max().unwrap_or(0).max(n);
    let mut modes = Vec::with_capacity(2 * k as usize + 1);
    let mut base_iter = base.modes.iter().peekable();
    for m in -k..=k {
        let mut y = ZERO;
        if let Some(&&(bm, r)) = base_iter.peek() {
            if bm == m {
                y += r;
                base_iter.next();
            }
        }
        let v = op.coefficient(m);
        if v != ZERO {
            y -= factor * v / (unperturbed_eigenvalue(m) - z);
        }
        if y != ZERO {
            modes.push((m, y));
        }
    }
    Ok(SeriesResolvent { values: sample_modes(&modes, x_grid), tail_bound: base.tail_bound, modes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{eigenfunction_modes, secular, SpectralTag};
    use crate::potential::NamedForm;

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    fn grid(count: usize) -> Vec<f64> {
        (0..count).map(|j| j as f64 / (count - 1) as f64).collect()
    }

    fn sample_potential() -> Potential {
        Potential::fourier([(0, c(0.4, -0.1)), (1, c(-0.3, 0.5)), (-2, c(0.2, 0.2)), (3, c(0.0, -0.6))]).unwrap()
    }

    #[test]
    fn homogeneous_solution_is_c() {
        let l = c(1.7, -0.4);
        let sol = solve_ivp(l, [c(1.0, 0.0), ZERO, ZERO], &Potential::zero());
        for x in grid(9) {
            let y = sol.eval(x).unwrap();
            assert!((y - csd_eval(I * l * x).unwrap().c).norm() < 1e-14);
        }
    }

    #[test]
    fn lattice_initial_data_gives_mode() {
        let k = c(0.0, 2.0 * PI);
        let sol = solve_ivp(c(2.0 * PI, 0.0), [c(1.0, 0.0), k, k * k], &Potential::zero());
        for x in grid(11) {
            let y = sol.eval(x).unwrap();
            assert!((y - Complex64::from_polar(1.0, 2.0 * PI * x)).norm() < 1e-12, "x={x}: {y}");
        }
    }

    /// i·y‴ − λ³y − f at x, with y‴ from a fourth-order difference of y″.
    fn ode_residual(sol: &IvpSolution, l: ComplexScalar, f: &Potential, x: f64) -> f64 {
        let h = 1e-3;
        let ypp = |t: f64| sol.jet(t).unwrap()[2];
        let y3 = (-ypp(x + 2.0 * h) + ypp(x + h) * 8.0 - ypp(x - h) * 8.0 + ypp(x - 2.0 * h)) / (12.0 * h);
        (I * y3 - l * l * l * sol.eval(x).unwrap() - f.eval(x)).norm()
    }

    #[test]
    fn forced_solution_satisfies_equation() {
        let unit = Potential::named(NamedForm::Unit);
        let l = c(1.0, 0.0);
        let sol = solve_ivp(l, [ZERO; 3], &unit);
        for x in [0.1, 0.35, 0.6, 0.9] {
            assert!(ode_residual(&sol, l, &unit, x) <= 1e-8);
        }
        let f = sample_potential();
        let l = c(2.3, 0.9);
        let sol = solve_ivp(l, [c(0.5, 0.0), c(0.0, 1.0), c(-1.0, 0.2)], &f);
        for x in [0.1, 0.35, 0.6, 0.9] {
            assert!(ode_residual(&sol, l, &f, x) <= 1e-8);
        }
    }

    #[test]
    fn zero_lambda_is_polynomial() {
        let sol = solve_ivp(ZERO, [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], &Potential::zero());
        let forced = solve_ivp(ZERO, [ZERO; 3], &Potential::named(NamedForm::Unit));
        for x in grid(7) {
            assert!((sol.eval(x).unwrap() - c(1.0 + 2.0 * x + 1.5 * x * x, 0.0)).norm() < 1e-14);
            assert!((forced.eval(x).unwrap() - c(0.0, -x * x * x / 6.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn series_single_mode_and_zero() {
        let z = c(3.0, -2.0);
        let xs = grid(5);
        let r = resolvent_l0_series(z, &Potential::mode(3), &xs, 8).unwrap();
        for (x, y) in xs.iter().zip(&r.values) {
            let expected = Complex64::from_polar(1.0, 6.0 * PI * x) / (unperturbed_eigenvalue(3) - z);
            assert!((y - expected).norm() < 1e-15);
        }
        let r = resolvent_l0_series(z, &Potential::zero(), &xs, 8).unwrap();
        assert!(r.values.iter().all(|y| *y == ZERO));
        assert_eq!(r.tail_bound, 0.0);
    }

    #[test]
    fn series_satisfies_equation() {
        let f = sample_potential();
        let z = c(40.0, 7.0);
        let r = resolvent_l0_series(z, &f, &[], 8).unwrap();
        let h = 1e-3;
        for x in [0.2, 0.5, 0.77] {
            let ypp = |t: f64| r.jet(t)[2];
            let y3 = (-ypp(x + 2.0 * h) + ypp(x + h) * 8.0 - ypp(x - h) * 8.0 + ypp(x - 2.0 * h)) / (12.0 * h);
            let res = I * y3 - z * r.jet(x)[0] - f.eval(x);
            assert!(res.norm() <= 1e-6, "x={x}: {res}");
        }
    }

    #[test]
    fn kernel_constant_forcing() {
        let unit = Potential::named(NamedForm::Unit);
        let ys = resolvent_l0_kernel(c(-8.0, 0.0), &unit, &grid(6)).unwrap();
        for y in ys {
            assert!((y - c(0.125, 0.0)).norm() < 1e-12, "{y}");
        }
    }

    #[test]
    fn kernel_matches_series_with_periodic_jet() {
        let f = sample_potential();
        let xs = grid(17);
        for z in [c(10.0, 5.0), c(-300.0, 20.0), c(900.0, -1.0)] {
            let k = resolvent_l0_kernel(z, &f, &xs).unwrap();
            let s = resolvent_l0_series(z, &f, &xs, 8).unwrap();
            for (a, b) in k.iter().zip(&s.values) {
                assert!((a - b).norm() <= 1e-7, "z={z}: {a} vs {b}");
            }
            let y0 = resolvent_l0_kernel_jet(z, &f, 0.0).unwrap();
            let y1 = resolvent_l0_kernel_jet(z, &f, 1.0).unwrap();
            for j in 0..3 {
                assert!((y0[j] - y1[j]).norm() <= 1e-7, "z={z} derivative {j}");
            }
        }
    }

    #[test]
    fn pole_proximity_is_reported() {
        let z = c(unperturbed_eigenvalue(2), 1e-10);
        let f = Potential::mode(0);
        assert!(matches!(resolvent_l0_series(z, &f, &[0.5], 8), Err(SpectralError::PoleProximity { .. })));
        assert!(matches!(resolvent_l0_kernel(z, &f, &[0.5]), Err(SpectralError::PoleProximity { .. })));
    }

    #[test]
    fn cube_root_branches() {
        assert_eq!(cube_root(c(-8.0, 0.0)), c(-2.0, 0.0));
        let r = cube_root(c(-8.0, 1e-9));
        assert!((r.arg() - PI / 3.0).abs() < 1e-9);
        let w = c(3.0, -4.0);
        assert!((cube_root(w).powi(3) - w).norm() < 1e-13);
    }

    #[test]
    fn perturbed_single_mode_shift() {
        let alpha = 3.5;
        let op = PerturbedOperator::new(alpha, Potential::mode(1), 8).unwrap();
        let z = c(17.0, 2.0);
        let xs = grid(7);
        let r = resolvent_l_alpha(&op, z, &Potential::mode(1), &xs).unwrap();
        for (x, y) in xs.iter().zip(&r.values) {
            let expected = Complex64::from_polar(1.0, 2.0 * PI * x) / (unperturbed_eigenvalue(1) + alpha - z);
            assert!((y - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_coupling_matches_unperturbed() {
        let op = PerturbedOperator::new(0.0, sample_potential(), 8).unwrap();
        let f = Potential::named(NamedForm::Parabola);
        let z = c(-50.0, 3.0);
        let xs = grid(9);
        let a = resolvent_l_alpha(&op, z, &f, &xs).unwrap();
        let b = resolvent_l0_series(z, &f, &xs, 8).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn denominator_is_secular_function() {
        let op = PerturbedOperator::new(-2.2, sample_potential(), 8).unwrap();
        let sec = secular(&op);
        for z in [c(3.0, 1.0), c(-1000.0, 0.5), c(250.0, -40.0)] {
            let a = resolvent_denominator(&op, z);
            assert!((a - sec.eval(z)).norm() <= 1e-9 * a.norm().max(1.0));
        }
    }

    #[test]
    fn residue_is_eigenprojection() {
        let op = PerturbedOperator::new(1.8, sample_potential(), 8).unwrap();
        let spectrum = compute_spectrum(&op).unwrap();
        let f = Potential::named(NamedForm::Ramp);
        let eps = 1e-7;
        for entry in spectrum.entries.iter().filter(|e| e.tag == SpectralTag::Sigma2) {
            let z = c(entry.value, eps);
            let r = resolvent_l_alpha(&op, z, &f, &[]).unwrap();
            let u = &eigenfunction_modes(&op, entry).unwrap()[0];
            let proj: ComplexScalar = u.iter().map(|&(n, un)| f.fourier_coefficient(n).unwrap() * un.conj()).sum();
            for &(n, un) in u {
                let got = r.modes.iter().find(|m| m.0 == n).map_or(ZERO, |m| m.1) * (c(entry.value, 0.0) - z);
                assert!((got - proj * un).norm() <= 1e-6, "μ={} n={n}", entry.value);
            }
        }
        let root = spectrum.entries.iter().find(|e| e.tag == SpectralTag::Sigma2).unwrap().value;
        assert!(matches!(resolvent_l_alpha(&op, c(root, 1e-10), &f, &[]), Err(SpectralError::PoleProximity { .. })));
    }

    #[test]
    fn first_resolvent_identity() {
        let op = PerturbedOperator::new(2.0, sample_potential(), 8).unwrap();
        let f = Potential::fourier([(0, c(1.0, 0.0)), (2, c(0.0, 1.0)), (-1, c(0.5, 0.5))]).unwrap();
        let (z1, z2) = (c(30.0, 4.0), c(-70.0, -9.0));
        let r1 = resolvent_l_alpha(&op, z1, &f, &[]).unwrap();
        let r2 = resolvent_l_alpha(&op, z2, &f, &[]).unwrap();
        let r2f = Potential::fourier(r2.modes.iter().copied()).unwrap();
        let r12 = resolvent_l_alpha(&op, z1, &r2f, &[]).unwrap();
        let test =
            Potential::fourier([(0, c(0.3, 0.0)), (1, c(0.1, -0.2)), (2, c(-0.4, 0.1)), (3, c(0.2, 0.2))]).unwrap();
        let pair = |modes: &[(i64, ComplexScalar)]| -> ComplexScalar {
            modes.iter().map(|&(n, y)| y * test.fourier_coefficient(n).unwrap().conj()).sum()
        };
        let lhs = pair(&r1.modes) - pair(&r2.modes);
        let rhs = pair(&r12.modes) * (z1 - z2);
        assert!((lhs - rhs).norm() <= 1e-6 * lhs.norm().max(1e-3), "{lhs} vs {rhs}");
    }
}
