//! Potentials v ∈ L²(0,1), their Fourier coefficients and the integral
//! transforms that enter the characteristic function.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ctrig::{csd_eval, omega_pow};
use crate::error::{Result, SpectralError};
use crate::quadrature::{bisect_breaks, restrict_breaks, uniform_breaks, Rule};
use crate::ComplexScalar;

const ZERO: ComplexScalar = Complex64::new(0.0, 0.0);
const ONE: ComplexScalar = Complex64::new(1.0, 0.0);
const I: ComplexScalar = Complex64::new(0.0, 1.0);

/// Minimum number of samples of a grid potential.
pub const MIN_SAMPLES: usize = 16;
/// Interpolation stencil width on sample grids (degree 7).
const STENCIL: usize = 8;
const SMOOTH_PANELS: usize = 8;
const SMOOTH_POINTS: usize = 32;
const REFINE_TOL: f64 = 1e-11;
const MAX_REFINEMENTS: usize = 3;
/// Modes probed by [`symmetry_class`] for potentials without finite support.
const PROBE_MODES: i64 = 32;

/// Closed-form potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedForm {
    /// v(x) = 1.
    Unit,
    /// v(x) = 1 − x.
    Ramp,
    /// v(x) = (x − 1/2)².
    Parabola,
    /// v(x) = i (x − 1/2)².
    ImaginaryParabola,
}

impl NamedForm {
    /// Name used in potential files.
    pub fn tag(&self) -> &'static str {
        match self {
            NamedForm::Unit => "unit",
            NamedForm::Ramp => "g",
            NamedForm::Parabola => "h",
            NamedForm::ImaginaryParabola => "h_tilde",
        }
    }

    pub fn from_tag(tag: &str) -> Option<NamedForm> {
        match tag {
            "unit" => Some(NamedForm::Unit),
            "g" => Some(NamedForm::Ramp),
            "h" => Some(NamedForm::Parabola),
            "h_tilde" => Some(NamedForm::ImaginaryParabola),
            _ => None,
        }
    }

    fn eval(&self, x: f64) -> ComplexScalar {
        match self {
            NamedForm::Unit => ONE,
            NamedForm::Ramp => Complex64::new(1.0 - x, 0.0),
            NamedForm::Parabola => Complex64::new((x - 0.5) * (x - 0.5), 0.0),
            NamedForm::ImaginaryParabola => Complex64::new(0.0, (x - 0.5) * (x - 0.5)),
        }
    }

    fn coefficient(&self, n: i64) -> ComplexScalar {
        let parabola = if n == 0 { 1.0 / 12.0 } else { 1.0 / (2.0 * (n * n) as f64 * PI * PI) };
        match self {
            NamedForm::Unit => {
                if n == 0 {
                    ONE
                } else {
                    ZERO
                }
            }
            NamedForm::Ramp => {
                if n == 0 {
                    Complex64::new(0.5, 0.0)
                } else {
                    ONE / Complex64::new(0.0, 2.0 * PI * n as f64)
                }
            }
            NamedForm::Parabola => Complex64::new(parabola, 0.0),
            NamedForm::ImaginaryParabola => Complex64::new(0.0, parabola),
        }
    }

    fn norm(&self) -> f64 {
        match self {
            NamedForm::Unit => 1.0,
            NamedForm::Ramp => (1.0f64 / 3.0).sqrt(),
            NamedForm::Parabola | NamedForm::ImaginaryParabola => (1.0f64 / 80.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Fourier(Vec<(i64, ComplexScalar)>),
    Samples(Vec<ComplexScalar>),
    Named(NamedForm),
    Combination(Vec<(ComplexScalar, Potential)>),
}

/// Read-only view of how a potential is stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation<'a> {
    /// Finitely many modes (n, v_n), sorted by n.
    Fourier(&'a [(i64, ComplexScalar)]),
    /// Uniform samples at x_j = j/(count − 1), endpoints included.
    Samples(&'a [ComplexScalar]),
    Named(NamedForm),
    /// Linear combination of other potentials.
    Combination,
}

/// An immutable potential with its cached L² norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    repr: Repr,
    norm: f64,
}

/// Reflection symmetry of a potential: even when conj(v(1−x)) = v(x),
/// odd when conj(v(1−x)) = −v(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Even,
    Odd,
    Neither,
}

impl Potential {
    /// The zero potential.
    pub fn zero() -> Potential {
        Potential { repr: Repr::Fourier(Vec::new()), norm: 0.0 }
    }

    /// Finite Fourier series Σ v_n e^{2nπix}. Repeated modes are summed.
    pub fn fourier<I>(modes: I) -> Result<Potential>
    where
        I: IntoIterator<Item = (i64, ComplexScalar)>,
    {
        let mut list: Vec<(i64, ComplexScalar)> = modes.into_iter().collect();
        if list.iter().any(|(_, c)| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SpectralError::InvalidInput { reason: "non-finite Fourier coefficient" });
        }
        list.sort_by_key(|&(n, _)| n);
        let mut merged: Vec<(i64, ComplexScalar)> = Vec::with_capacity(list.len());
        for (n, c) in list {
            match merged.last_mut() {
                Some(last) if last.0 == n => last.1 += c,
                _ => merged.push((n, c)),
            }
        }
        let norm = merged.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        Ok(Potential { repr: Repr::Fourier(merged), norm })
    }

    /// Single mode e^{2nπix}.
    pub fn mode(n: i64) -> Potential {
        Potential { repr: Repr::Fourier(vec![(n, ONE)]), norm: 1.0 }
    }

    /// Uniform samples at x_j = j/(count − 1), interpolated by local
    /// degree-7 polynomials.
    pub fn samples(values: Vec<ComplexScalar>) -> Result<Potential> {
        if values.len() < MIN_SAMPLES {
            return Err(SpectralError::InvalidInput { reason: "sample grid needs at least 16 points" });
        }
        if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SpectralError::InvalidInput { reason: "non-finite sample value" });
        }
        let mut p = Potential { repr: Repr::Samples(values), norm: 0.0 };
        p.norm = p.quadrature_norm();
        Ok(p)
    }

    pub fn named(form: NamedForm) -> Potential {
        Potential { repr: Repr::Named(form), norm: form.norm() }
    }

    /// a·self + b·other.
    pub fn combine(&self, a: ComplexScalar, other: &Potential, b: ComplexScalar) -> Potential {
        if let (Repr::Fourier(x), Repr::Fourier(y)) = (&self.repr, &other.repr) {
            let modes = x.iter().map(|&(n, c)| (n, a * c)).chain(y.iter().map(|&(n, c)| (n, b * c)));
            if let Ok(p) = Potential::fourier(modes) {
                return p;
            }
        }
        let mut p = Potential { repr: Repr::Combination(vec![(a, self.clone()), (b, other.clone())]), norm: 0.0 };
        p.norm = p.quadrature_norm();
        p
    }

    /// self + other.
    pub fn add(&self, other: &Potential) -> Potential {
        self.combine(ONE, other, ONE)
    }

    /// self + k·other.
    pub fn add_scaled(&self, k: ComplexScalar, other: &Potential) -> Potential {
        self.combine(ONE, other, k)
    }

    /// Cached L² norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn representation(&self) -> Representation<'_> {
        match &self.repr {
            Repr::Fourier(m) => Representation::Fourier(m),
            Repr::Samples(s) => Representation::Samples(s),
            Repr::Named(f) => Representation::Named(*f),
            Repr::Combination(_) => Representation::Combination,
        }
    }

    /// Largest |n| carried by a finite Fourier series, `None` otherwise.
    pub fn max_mode(&self) -> Option<u64> {
        match &self.repr {
            Repr::Fourier(m) => Some(m.iter().map(|(n, _)| n.unsigned_abs()).max().unwrap_or(0)),
            _ => None,
        }
    }

    /// Largest |n| whose coefficient can be computed without aliasing.
    pub fn resolvable_modes(&self) -> Option<i64> {
        match &self.repr {
            Repr::Samples(s) => Some(alias_limit(s.len())),
            Repr::Combination(parts) => parts.iter().filter_map(|(_, p)| p.resolvable_modes()).min(),
            _ => None,
        }
    }

    /// v(x).
    pub fn eval(&self, x: f64) -> ComplexScalar {
        match &self.repr {
            Repr::Fourier(m) => m.iter().map(|&(n, c)| c * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * x)).sum(),
            Repr::Samples(s) => interpolate(s, x),
            Repr::Named(f) => f.eval(x),
            Repr::Combination(parts) => parts.iter().map(|(a, p)| a * p.eval(x)).sum(),
        }
    }

    /// v_n = ⟨v, e^{2nπix}⟩ = ∫₀¹ v(x) e^{−2nπix} dx.
    pub fn fourier_coefficient(&self, n: i64) -> Result<ComplexScalar> {
        match &self.repr {
            Repr::Fourier(m) => Ok(m.binary_search_by_key(&n, |&(k, _)| k).map(|i| m[i].1).unwrap_or(ZERO)),
            Repr::Named(f) => Ok(f.coefficient(n)),
            Repr::Samples(s) => {
                if n.abs() > alias_limit(s.len()) {
                    return Err(SpectralError::AliasRisk { mode: n, count: s.len() });
                }
                let k = -2.0 * PI * n as f64;
                let [c] = self.integrate(|x| [self.eval(x) * Complex64::from_polar(1.0, k * x)]);
                Ok(c)
            }
            Repr::Combination(parts) => {
                let mut acc = ZERO;
                for (a, p) in parts {
                    acc += a * p.fourier_coefficient(n)?;
                }
                Ok(acc)
            }
        }
    }

    /// Coefficients v_{−N}, …, v_N, indexed by n + N.
    pub fn coefficients(&self, truncation: usize) -> Result<Vec<ComplexScalar>> {
        let n = truncation as i64;
        (-n..=n).map(|k| self.fourier_coefficient(k)).collect()
    }

    /// w(x) = v(1 − x).
    pub fn reflect(&self) -> Potential {
        let repr = match &self.repr {
            Repr::Fourier(m) => {
                let mut r: Vec<_> = m.iter().map(|&(n, c)| (-n, c)).collect();
                r.reverse();
                Repr::Fourier(r)
            }
            Repr::Samples(s) => Repr::Samples(s.iter().rev().copied().collect()),
            Repr::Named(NamedForm::Ramp) => Repr::Combination(vec![
                (ONE, Potential::named(NamedForm::Unit)),
                (-ONE, Potential::named(NamedForm::Ramp)),
            ]),
            Repr::Named(f) => Repr::Named(*f),
            Repr::Combination(parts) => Repr::Combination(parts.iter().map(|(a, p)| (*a, p.reflect())).collect()),
        };
        Potential { repr, norm: self.norm }
    }

    /// Reflection symmetry judged on the Fourier coefficients.
    pub fn symmetry_class(&self) -> Symmetry {
        let modes: Vec<i64> = match (&self.repr, self.resolvable_modes()) {
            (Repr::Fourier(m), _) => m.iter().map(|(n, _)| *n).collect(),
            (_, Some(limit)) => (-limit.min(PROBE_MODES)..=limit.min(PROBE_MODES)).collect(),
            _ => (-PROBE_MODES..=PROBE_MODES).collect(),
        };
        let tol = 1e-9 * self.norm.max(f64::MIN_POSITIVE);
        let mut even = true;
        let mut odd = true;
        for n in modes {
            let c = match self.fourier_coefficient(n) {
                Ok(c) => c,
                Err(_) => continue,
            };
            even &= c.im.abs() <= tol;
            odd &= c.re.abs() <= tol;
        }
        match (even, odd) {
            (true, _) => Symmetry::Even,
            (false, true) => Symmetry::Odd,
            _ => Symmetry::Neither,
        }
    }

    /// ∫ g(t, v(t)) dt over [lo, hi] on the potential's panel structure,
    /// with the same refinement as the coefficient quadrature.
    pub fn integrate_against<const K: usize, F>(&self, lo: f64, hi: f64, g: F) -> Result<[ComplexScalar; K]>
    where
        F: Fn(f64, ComplexScalar) -> Result<[ComplexScalar; K]>,
    {
        if hi <= lo {
            return Ok([ZERO; K]);
        }
        let (breaks, points) = self.quadrature_plan();
        let mut b = vec![lo];
        b.extend(breaks.into_iter().filter(|&t| t > lo && t < hi));
        b.push(hi);
        refine(b, |b| {
            let rule = Rule::composite(b, points);
            let mut acc = [ZERO; K];
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let vals = g(t, self.eval(t))?;
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += v * w;
                }
            }
            Ok(acc)
        })
    }

    fn quadrature_norm(&self) -> f64 {
        let [s] = self.integrate(|x| [Complex64::new(self.eval(x).norm_sqr(), 0.0)]);
        s.re.max(0.0).sqrt()
    }

    /// Panel breaks and points per panel for quadrature against v.
    fn quadrature_plan(&self) -> (Vec<f64>, usize) {
        match &self.repr {
            Repr::Samples(s) => (uniform_breaks(0.0, 1.0, s.len() - 1), STENCIL),
            Repr::Combination(parts) => {
                let mut breaks = Vec::new();
                let mut points = 0;
                for (_, p) in parts {
                    let (b, k) = p.quadrature_plan();
                    breaks.extend(b);
                    points = points.max(k);
                }
                breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
                breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                (breaks, points)
            }
            _ => (uniform_breaks(0.0, 1.0, SMOOTH_PANELS), SMOOTH_POINTS),
        }
    }

    /// ∫₀¹ f over the potential's panel structure, bisecting panels until
    /// successive results agree to [`REFINE_TOL`].
    fn integrate<const K: usize, F>(&self, f: F) -> [ComplexScalar; K]
    where
        F: Fn(f64) -> [ComplexScalar; K],
    {
        let (breaks, points) = self.quadrature_plan();
        refine(breaks, |b| {
            let rule = Rule::composite(b, points);
            let mut acc = [ZERO; K];
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let vals = f(*x);
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += v * *w;
                }
            }
            Ok(acc)
        })
        .unwrap_or([ZERO; K])
    }
}

fn alias_limit(count: usize) -> i64 {
    ((count as i64 - 1) / 2 - 1).max(0)
}

/// Repeats `eval` on bisected breaks until the change is below
/// [`REFINE_TOL`] relative to max(1, |result|).
fn refine<const K: usize, F>(mut breaks: Vec<f64>, eval: F) -> Result<[ComplexScalar; K]>
where
    F: Fn(&[f64]) -> Result<[ComplexScalar; K]>,
{
    let mut prev = eval(&breaks)?;
    for _ in 0..MAX_REFINEMENTS {
        breaks = bisect_breaks(&breaks);
        let next = eval(&breaks)?;
        let mut change: f64 = 0.0;
        let mut size: f64 = 1.0;
        for (a, b) in prev.iter().zip(&next) {
            change = change.max((a - b).norm());
            size = size.max(b.norm());
        }
        prev = next;
        if change <= REFINE_TOL * size {
            break;
        }
    }
    Ok(prev)
}

fn interpolate(values: &[ComplexScalar], x: f64) -> ComplexScalar {
    let cells = values.len() - 1;
    let t = x.clamp(0.0, 1.0) * cells as f64;
    let cell = (t.floor() as usize).min(cells - 1);
    let start = cell.saturating_sub(STENCIL / 2 - 1).min(cells + 1 - STENCIL);
    let local = t - start as f64;
    let mut acc = ZERO;
    for j in 0..STENCIL {
        let mut w = 1.0;
        for k in 0..STENCIL {
            if k != j {
                w *= (local - k as f64) / (j as f64 - k as f64);
            }
        }
        acc += values[start + j] * w;
    }
    acc
}

/// All transforms of v entering the characteristic function, at one λ.
///
/// With w(x) = v(1 − x):
/// `vc = ∫ v c(−iλx)`, `vc_star = ∫ v̄ c(iλx)`, `wc = ∫ w c(−iλx)`,
/// `wc_star = ∫ w̄ c(iλx)` (likewise for s, d), and
/// `m = ∫ v̄(x) ∫₀ˣ d(iλ(x−t)) v(t) dt dx`,
/// `m_star = ∫ v(x) ∫₀ˣ d(−iλ(x−t)) v̄(t) dt dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformPack {
    pub vc: ComplexScalar,
    pub vs: ComplexScalar,
    pub vd: ComplexScalar,
    pub vc_star: ComplexScalar,
    pub vs_star: ComplexScalar,
    pub vd_star: ComplexScalar,
    pub wc: ComplexScalar,
    pub ws: ComplexScalar,
    pub wd: ComplexScalar,
    pub wc_star: ComplexScalar,
    pub ws_star: ComplexScalar,
    pub wd_star: ComplexScalar,
    pub m: ComplexScalar,
    pub m_star: ComplexScalar,
}

impl TransformPack {
    /// |m + m* − (vd vc* + vs vs* + vc vd*)|.
    pub fn convolution_defect(&self) -> f64 {
        (self.m + self.m_star - (self.vd * self.vc_star + self.vs * self.vs_star + self.vc * self.vd_star)).norm()
    }
}

/// Transform pack at λ: closed form per mode for Fourier series, nested
/// quadrature otherwise.
pub fn transform_pack(v: &Potential, lambda: ComplexScalar) -> Result<TransformPack> {
    match &v.repr {
        Repr::Fourier(modes) => fourier_pack(modes, lambda),
        _ => quadrature_pack(v, lambda),
    }
}

/// Transform pack by nested quadrature for every representation.
pub fn quadrature_pack(v: &Potential, lambda: ComplexScalar) -> Result<TransformPack> {
    csd_eval(I * lambda)?;
    let (breaks, points) = v.quadrature_plan();
    let single = refine(breaks.clone(), |b| {
        let rule = Rule::composite(b, points);
        let mut acc = [ZERO; 12];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let a = v.eval(x);
            let r = v.eval(1.0 - x);
            let minus = csd_eval(-I * lambda * x)?;
            let plus = csd_eval(I * lambda * x)?;
            let terms = [
                a * minus.c,
                a * minus.s,
                a * minus.d,
                a.conj() * plus.c,
                a.conj() * plus.s,
                a.conj() * plus.d,
                r * minus.c,
                r * minus.s,
                r * minus.d,
                r.conj() * plus.c,
                r.conj() * plus.s,
                r.conj() * plus.d,
            ];
            for (s, t) in acc.iter_mut().zip(terms) {
                *s += t * w;
            }
        }
        Ok(acc)
    })?;
    let conv = refine(breaks, |b| {
        let outer = Rule::composite(b, points);
        let mut m = ZERO;
        let mut m_star = ZERO;
        for (&x, &wx) in outer.nodes.iter().zip(&outer.weights) {
            let inner = Rule::composite(&restrict_breaks(b, x), points);
            let mut acc = ZERO;
            let mut acc_star = ZERO;
            for (&t, &wt) in inner.nodes.iter().zip(&inner.weights) {
                let vt = v.eval(t);
                acc += csd_eval(I * lambda * (x - t))?.d * vt * wt;
                acc_star += csd_eval(-I * lambda * (x - t))?.d * vt.conj() * wt;
            }
            let vx = v.eval(x);
            m += vx.conj() * acc * wx;
            m_star += vx * acc_star * wx;
        }
        Ok([m, m_star])
    })?;
    Ok(TransformPack {
        vc: single[0],
        vs: single[1],
        vd: single[2],
        vc_star: single[3],
        vs_star: single[4],
        vd_star: single[5],
        wc: single[6],
        ws: single[7],
        wd: single[8],
        wc_star: single[9],
        ws_star: single[10],
        wd_star: single[11],
        m: conv[0],
        m_star: conv[1],
    })
}

/// (e^z − 1)/z.
fn expm1_ratio(z: ComplexScalar) -> ComplexScalar {
    if z.norm() < 0.5 {
        let mut term = ONE;
        let mut sum = ONE;
        for j in 2..40 {
            term = term * z / j as f64;
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// ∫₀¹ ∫₀ˣ e^{a x + b t} dt dx, the divided difference of
/// [`expm1_ratio`] at a and a + b.
fn double_exponential(a: ComplexScalar, b: ComplexScalar) -> ComplexScalar {
    if b.norm() >= 0.5 {
        return (expm1_ratio(a + b) - expm1_ratio(a)) / b;
    }
    const POINTS: usize = 64;
    let center = a + b * 0.5;
    let mut acc = ZERO;
    for j in 0..POINTS {
        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / POINTS as f64);
        let zeta = center + e;
        acc += expm1_ratio(zeta) * e / ((zeta - a) * (zeta - a - b));
    }
    acc / POINTS as f64
}

/// Plain transforms (∫ u c(−iλx), ∫ u s(−iλx), ∫ u d(−iλx)) of a finite
/// Fourier series u.
fn fourier_triple(modes: &[(i64, ComplexScalar)], lambda: ComplexScalar) -> [ComplexScalar; 3] {
    let mut out = [ZERO; 3];
    for k in 1..=3 {
        let w = omega_pow(k);
        let mut sum = ZERO;
        for &(n, c) in modes {
            sum += c * expm1_ratio(Complex64::new(0.0, 2.0 * PI * n as f64) - I * w * lambda);
        }
        out[0] += sum / 3.0;
        out[1] += sum * w.conj() / 3.0;
        out[2] += sum * w / 3.0;
    }
    out
}

fn fourier_convolution(modes: &[(i64, ComplexScalar)], lambda: ComplexScalar) -> ComplexScalar {
    let mut m = ZERO;
    for k in 1..=3 {
        let w = omega_pow(k);
        let a = I * w * lambda;
        let mut phi = ZERO;
        for &(n, vn) in modes {
            let alpha = a - Complex64::new(0.0, 2.0 * PI * n as f64);
            for &(p, vp) in modes {
                let beta = Complex64::new(0.0, 2.0 * PI * p as f64) - a;
                phi += vn.conj() * vp * double_exponential(alpha, beta);
            }
        }
        m += w * phi / 3.0;
    }
    m
}

fn fourier_pack(modes: &[(i64, ComplexScalar)], lambda: ComplexScalar) -> Result<TransformPack> {
    csd_eval(I * lambda)?;
    let reflected: Vec<_> = modes.iter().rev().map(|&(n, c)| (-n, c)).collect();
    let lc = lambda.conj();
    let v = fourier_triple(modes, lambda);
    let v_bar = fourier_triple(modes, lc);
    let w = fourier_triple(&reflected, lambda);
    let w_bar = fourier_triple(&reflected, lc);
    Ok(TransformPack {
        vc: v[0],
        vs: v[1],
        vd: v[2],
        vc_star: v_bar[0].conj(),
        vs_star: v_bar[1].conj(),
        vd_star: v_bar[2].conj(),
        wc: w[0],
        ws: w[1],
        wd: w[2],
        wc_star: w_bar[0].conj(),
        ws_star: w_bar[1].conj(),
        wd_star: w_bar[2].conj(),
        m: fourier_convolution(modes, lambda),
        m_star: fourier_convolution(modes, lc).conj(),
    })
}
