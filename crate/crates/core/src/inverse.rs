//! Inverse problem: recover α and the coefficients v_n from spectra.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Result, SpectralError};
use crate::forward::{nearest_mode, unperturbed_eigenvalue, SecularFunction, SecularPole, SpectralTag, SpectrumData};
use crate::potential::{NamedForm, Potential};
use crate::ComplexScalar;

const I: ComplexScalar = Complex64::new(0.0, 1.0);
const ONE: ComplexScalar = Complex64::new(1.0, 0.0);
const ZERO: ComplexScalar = Complex64::new(0.0, 0.0);

/// Relative disagreement between the extrapolated and closed-form leading
/// constant that is still accepted.
pub const CONSTANT_AGREEMENT: f64 = 1e-4;

/// Tolerances of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    /// Accepted defect of the normalization and symmetry checks.
    pub recon_tol: f64,
    /// Relative tolerance for identifying eigenvalues across spectra.
    pub match_tol: f64,
}

impl Default for InverseOptions {
    fn default() -> InverseOptions {
        InverseOptions { recon_tol: 1e-6, match_tol: 1e-8 }
    }
}

impl InverseOptions {
    fn tolerance(&self, z: f64) -> f64 {
        self.match_tol * z.abs().max(1.0)
    }
}

/// Whether 0 is an eigenvalue of the perturbed operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    ZeroInSpectrum,
    ZeroNotInSpectrum,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::ZeroInSpectrum => "zero_in_spectrum",
            Branch::ZeroNotInSpectrum => "zero_not_in_spectrum",
        }
    }
}

/// A moved unperturbed eigenvalue and the secular root interlaced with it
/// on the side of sign(α).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolePair {
    pub mode: i64,
    pub pole: f64,
    pub root: f64,
}

/// Split of two spectra into persisting, moved and new eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Unperturbed eigenvalues that persist.
    pub sigma0: Vec<f64>,
    /// Unperturbed eigenvalues that moved (poles of Q).
    pub sigma1: Vec<f64>,
    /// Zeros of Q, including values that coincide with persisting ones.
    pub sigma2: Vec<f64>,
    /// σ₁ and σ₂ paired by interlacing.
    pub pairs: Vec<PolePair>,
    /// +1 or −1 as read from the interlacing pattern, 0 when nothing moved.
    pub coupling_sign: f64,
    pub branch: Branch,
}

/// Splits σ(L₀) and σ(L_α) into σ₀, σ₁, σ₂ and checks strict interlacing.
///
/// An entry tagged as a secular root is never taken for a persisting
/// eigenvalue, even when it lies within the match tolerance of one: for
/// slowly decaying v the displacement of high modes is below that tolerance.
pub fn classify(sigma_l0: &SpectrumData, sigma_alpha: &SpectrumData, opts: &InverseOptions) -> Result<Classification> {
    sigma_l0.validate()?;
    sigma_alpha.validate()?;
    let mut sigma0 = Vec::new();
    let mut sigma1 = Vec::new();
    let mut sigma2 = Vec::new();
    let mut used = alloc::vec![false; sigma_alpha.entries.len()];
    for z in sigma_l0.values() {
        let tol = opts.tolerance(z);
        let hit = sigma_alpha.entries.iter().position(|e| e.tag != SpectralTag::Sigma2 && (e.value - z).abs() <= tol);
        match hit {
            Some(k) if !used[k] => {
                used[k] = true;
                sigma0.push(z);
                if sigma_alpha.entries[k].multiplicity == 2 {
                    sigma2.push(sigma_alpha.entries[k].value);
                }
            }
            Some(_) => return Err(SpectralError::InconsistentSpectra { reason: "duplicate unperturbed eigenvalue" }),
            None => sigma1.push(z),
        }
    }
    for (e, u) in sigma_alpha.entries.iter().zip(&used) {
        if !u {
            if e.multiplicity != 1 {
                return Err(SpectralError::InconsistentSpectra {
                    reason: "double eigenvalue away from the unperturbed spectrum",
                });
            }
            sigma2.push(e.value);
        }
    }
    sigma2.sort_by(f64::total_cmp);
    if sigma1.len() != sigma2.len() {
        return Err(SpectralError::InconsistentSpectra { reason: "moved and new eigenvalue counts differ" });
    }
    let right = sigma1
        .iter()
        .zip(&sigma2)
        .enumerate()
        .all(|(k, (p, m))| m > p && sigma1.get(k + 1).is_none_or(|next| m < next));
    let left = sigma1.iter().zip(&sigma2).enumerate().all(|(k, (p, m))| m < p && (k == 0 || *m > sigma1[k - 1]));
    let coupling_sign = if sigma1.is_empty() {
        0.0
    } else if right {
        1.0
    } else if left {
        -1.0
    } else {
        return Err(SpectralError::InconsistentSpectra { reason: "new eigenvalues do not interlace the moved ones" });
    };
    let pairs =
        sigma1.iter().zip(&sigma2).map(|(&pole, &root)| PolePair { mode: nearest_mode(pole), pole, root }).collect();
    let branch = if sigma1.contains(&0.0) { Branch::ZeroNotInSpectrum } else { Branch::ZeroInSpectrum };
    Ok(Classification { sigma0, sigma1, sigma2, pairs, coupling_sign, branch })
}

/// The leading Taylor coefficient of Δ(α, λ) read off the spectra: c₀ when
/// 0 is not an eigenvalue, c₁ otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingConstant {
    /// Exact limit of the truncated product.
    pub value: ComplexScalar,
    /// Richardson extrapolation of the product ratio along the imaginary axis.
    pub extrapolated: ComplexScalar,
    /// |extrapolated − value| / |value|.
    pub spread: f64,
}

fn zero_pair(cls: &Classification) -> Option<usize> {
    cls.pairs.iter().position(|p| p.pole == 0.0)
}

/// Pair indices ordered by |pole|, so that n and −n are multiplied together.
fn symmetric_order(cls: &Classification) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cls.pairs.len()).collect();
    order.sort_by(|&a, &b| cls.pairs[a].pole.abs().total_cmp(&cls.pairs[b].pole.abs()));
    order
}

/// Product ratio whose limit as y → ∞ is 1/c₀ (or i^{-1}/c₁) at z = iy.
fn product_ratio(cls: &Classification, y: f64) -> ComplexScalar {
    let z = I * y;
    let zero = zero_pair(cls);
    let mut r = match zero {
        Some(k) => (ONE - z / cls.pairs[k].root) / y,
        None => ONE,
    };
    for k in symmetric_order(cls) {
        if Some(k) == zero {
            continue;
        }
        let p = &cls.pairs[k];
        r *= (ONE - z / p.root) / (ONE - z / p.pole);
    }
    r
}

/// Estimates c₀ or c₁ from the interlaced pairs.
pub fn leading_constant(cls: &Classification) -> Result<LeadingConstant> {
    if cls.pairs.is_empty() {
        return Err(SpectralError::InvalidInput { reason: "no moved eigenvalues" });
    }
    let zero = zero_pair(cls);
    let mut value = match zero {
        Some(k) => I * cls.pairs[k].root,
        None => -I,
    };
    for k in symmetric_order(cls) {
        if Some(k) != zero {
            value *= cls.pairs[k].root / cls.pairs[k].pole;
        }
    }
    let radius = cls.pairs.iter().map(|p| p.pole.abs().max(p.root.abs())).fold(1.0, f64::max);
    let base = 1e3 * radius;
    let mut table: Vec<ComplexScalar> = (0..4).map(|j| product_ratio(cls, base * 10f64.powi(j))).collect();
    for level in 1..4 {
        let f = 10f64.powi(level);
        for j in 0..4 - level as usize {
            table[j] = (table[j + 1] * f - table[j]) / (f - 1.0);
        }
    }
    let limit = table[0];
    let extrapolated = match zero {
        Some(_) => ONE / limit,
        None => -I / limit,
    };
    let spread = if value == ZERO { extrapolated.norm() } else { (extrapolated - value).norm() / value.norm() };
    if (spread.is_nan() || spread > CONSTANT_AGREEMENT) && value != ZERO {
        return Err(SpectralError::SlowConvergence { spread });
    }
    Ok(LeadingConstant { value, extrapolated, spread })
}

/// α|v_n|² for every moved mode, from the residues of Q at the poles.
pub fn recover_weights(
    cls: &Classification,
    constant: ComplexScalar,
    opts: &InverseOptions,
) -> Result<Vec<(i64, f64)>> {
    let order = symmetric_order(cls);
    let zero = zero_pair(cls);
    let degenerate = constant == ZERO || cls.pairs.iter().any(|p| p.root == 0.0);
    let mut out = Vec::with_capacity(cls.pairs.len());
    for (n, pn) in cls.pairs.iter().enumerate() {
        let zn = pn.pole;
        let w = if degenerate {
            let mut w = Complex64::new(pn.root - zn, 0.0);
            for &k in &order {
                if k != n {
                    let p = &cls.pairs[k];
                    w *= (p.root - zn) / (p.pole - zn);
                }
            }
            w
        } else if Some(n) == zero {
            -I * constant
        } else {
            let mut w = I * constant * (1.0 - zn / pn.root);
            match zero {
                Some(k0) => w *= 1.0 - zn / cls.pairs[k0].root,
                None => w *= zn,
            }
            for &k in &order {
                if k != n && Some(k) != zero {
                    let p = &cls.pairs[k];
                    w *= (p.pole / p.root) * (1.0 - (p.pole - p.root) / (p.pole - zn));
                }
            }
            w
        };
        out.push((pn.mode, w.re));
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    let largest = out.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max);
    let sign = if cls.coupling_sign != 0.0 { cls.coupling_sign } else { total.signum() };
    for &(mode, w) in &out {
        if w * sign < -opts.recon_tol * largest {
            return Err(SpectralError::SignInconsistency { mode, weight: w });
        }
    }
    if total * sign < 0.0 {
        return Err(SpectralError::SignInconsistency { mode: 0, weight: total });
    }
    Ok(out)
}

/// Classification, leading constant and weights for one spectrum pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPass {
    pub classification: Classification,
    pub constant: Option<LeadingConstant>,
    pub weights: Vec<(i64, f64)>,
}

impl WeightPass {
    pub fn weight(&self, mode: i64) -> f64 {
        self.weights.iter().find(|(n, _)| *n == mode).map_or(0.0, |(_, w)| *w)
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w).sum()
    }
}

/// Runs classify, leading_constant and recover_weights on (σ(L₀), σ).
pub fn weight_pass(sigma_l0: &SpectrumData, sigma: &SpectrumData, opts: &InverseOptions) -> Result<WeightPass> {
    let classification = classify(sigma_l0, sigma, opts)?;
    if classification.pairs.is_empty() {
        return Ok(WeightPass { classification, constant: None, weights: Vec::new() });
    }
    let constant = leading_constant(&classification)?;
    let weights = recover_weights(&classification, constant.value, opts)?;
    Ok(WeightPass { classification, constant: Some(constant), weights })
}

/// True when the two spectra coincide entrywise within the match tolerance.
pub fn ambarzumyan_check(sigma_l0: &SpectrumData, sigma_alpha: &SpectrumData, opts: &InverseOptions) -> bool {
    sigma_l0.entries.len() == sigma_alpha.entries.len()
        && sigma_l0
            .entries
            .iter()
            .zip(&sigma_alpha.entries)
            .all(|(a, b)| a.multiplicity == b.multiplicity && (a.value - b.value).abs() <= opts.tolerance(a.value))
}

/// Spectra available to the reconstruction. σ(L_α) of v, v + g, v + ig
/// (g = 1 − x) for the four-spectra route, v + h or v + i h
/// (h = (x − 1/2)²) for the symmetric routes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraBundle {
    pub sigma_l0: SpectrumData,
    pub sigma_v: SpectrumData,
    pub sigma_v_plus_g: Option<SpectrumData>,
    pub sigma_v_plus_ig: Option<SpectrumData>,
    pub sigma_v_plus_h: Option<SpectrumData>,
}

impl SpectraBundle {
    /// Bundle with σ(L₀) synthesized for the window of `sigma_v`.
    pub fn new(sigma_v: SpectrumData) -> SpectraBundle {
        SpectraBundle {
            sigma_l0: SpectrumData::unperturbed(sigma_v.truncation),
            sigma_v,
            sigma_v_plus_g: None,
            sigma_v_plus_ig: None,
            sigma_v_plus_h: None,
        }
    }

    /// Fails unless every spectrum present uses the window of σ(L₀).
    pub fn check_window(&self) -> Result<()> {
        let n = self.sigma_l0.truncation;
        let others = [
            Some(&self.sigma_v),
            self.sigma_v_plus_g.as_ref(),
            self.sigma_v_plus_ig.as_ref(),
            self.sigma_v_plus_h.as_ref(),
        ];
        if others.iter().flatten().any(|s| s.truncation != n) {
            return Err(SpectralError::InconsistentSpectra { reason: "spectra use different truncation windows" });
        }
        Ok(())
    }
}

/// Reconstructed coupling and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult {
    /// `None` when the spectra coincide and v = 0 leaves α undetermined.
    pub alpha: Option<f64>,
    /// v_n for |n| ≤ N.
    pub coefficients: Vec<(i64, ComplexScalar)>,
    /// α|v_n|² for the moved modes.
    pub weights: Vec<(i64, f64)>,
    pub branch: Option<Branch>,
    /// Relative mismatch between each input secular root and the root of the
    /// secular function rebuilt from the recovered α and |v_n|².
    pub residuals: Vec<(i64, f64)>,
    pub leading_constant: Option<ComplexScalar>,
}

impl InverseResult {
    pub fn coefficient(&self, mode: i64) -> ComplexScalar {
        self.coefficients.iter().find(|(n, _)| *n == mode).map_or(ZERO, |(_, c)| *c)
    }

    /// v = 0 on modes −N..N with α undetermined.
    pub fn vanishing(truncation: usize, branch: Option<Branch>) -> InverseResult {
        let n = truncation as i64;
        InverseResult {
            alpha: None,
            coefficients: (-n..=n).map(|k| (k, ZERO)).collect(),
            weights: Vec::new(),
            branch,
            residuals: Vec::new(),
            leading_constant: None,
        }
    }

    /// The recovered potential as a Fourier series.
    pub fn potential(&self) -> Result<Potential> {
        Potential::fourier(self.coefficients.iter().copied())
    }
}

fn forward_residuals(base: &WeightPass, alpha: f64, coefficients: &[(i64, ComplexScalar)]) -> Vec<(i64, f64)> {
    let cls = &base.classification;
    let poles: Vec<SecularPole> = cls
        .pairs
        .iter()
        .map(|p| {
            let v = coefficients.iter().find(|(n, _)| *n == p.mode).map_or(ZERO, |(_, c)| *c);
            SecularPole { mode: p.mode, position: p.pole, weight: v.norm_sqr() }
        })
        .collect();
    let sec = SecularFunction::new(alpha, poles);
    let roots = sec.roots();
    cls.pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let r = roots.get(k).copied().unwrap_or(f64::INFINITY);
            (p.mode, ((r - p.root).abs() / p.root.abs().max(1.0)).min(f64::MAX))
        })
        .collect()
}

fn require(s: &Option<SpectrumData>) -> Result<&SpectrumData> {
    s.as_ref().ok_or(SpectralError::InvalidInput { reason: "bundle is missing a required spectrum" })
}

/// Four-spectra reconstruction from σ(L₀), σ(L_α(v)), σ(L_α(v+g)),
/// σ(L_α(v+ig)); assumes ‖v‖ = 1.
pub fn reconstruct_four_spectra(bundle: &SpectraBundle, opts: &InverseOptions) -> Result<InverseResult> {
    bundle.check_window()?;
    let shifted = require(&bundle.sigma_v_plus_g)?;
    let rotated = require(&bundle.sigma_v_plus_ig)?;
    if ambarzumyan_check(&bundle.sigma_l0, &bundle.sigma_v, opts) {
        return Ok(InverseResult::vanishing(bundle.sigma_l0.truncation, None));
    }
    let base = weight_pass(&bundle.sigma_l0, &bundle.sigma_v, opts)?;
    let a = weight_pass(&bundle.sigma_l0, shifted, opts)?;
    let b = weight_pass(&bundle.sigma_l0, rotated, opts)?;
    assemble_four_spectra(bundle.sigma_l0.truncation, base, a, b, opts)
}

/// Combines the three weight passes of the four-spectra route.
pub fn assemble_four_spectra(
    truncation: usize,
    base: WeightPass,
    shifted: WeightPass,
    rotated: WeightPass,
    opts: &InverseOptions,
) -> Result<InverseResult> {
    let alpha = base.total();
    if alpha == 0.0 {
        return Ok(InverseResult::vanishing(truncation, Some(base.classification.branch)));
    }
    let g = Potential::named(NamedForm::Ramp);
    let n = truncation as i64;
    let mut coefficients = Vec::with_capacity(2 * truncation + 1);
    for k in -n..=n {
        let gk = g.fourier_coefficient(k)?;
        let w = base.weight(k);
        let g2 = alpha * gk.norm_sqr();
        let re = (shifted.weight(k) - w - g2) / (2.0 * alpha);
        let im = (rotated.weight(k) - w - g2) / (2.0 * alpha);
        coefficients.push((k, Complex64::new(re, im) / gk.conj()));
    }
    finish(base, alpha, coefficients, opts)
}

fn finish(
    base: WeightPass,
    alpha: f64,
    coefficients: Vec<(i64, ComplexScalar)>,
    opts: &InverseOptions,
) -> Result<InverseResult> {
    let norm_sq: f64 = coefficients.iter().map(|(_, c)| c.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > opts.recon_tol {
        return Err(SpectralError::NormMismatch { norm_sq });
    }
    let residuals = forward_residuals(&base, alpha, &coefficients);
    Ok(InverseResult {
        alpha: Some(alpha),
        coefficients,
        weights: base.weights,
        branch: Some(base.classification.branch),
        residuals,
        leading_constant: base.constant.map(|c| c.value),
    })
}

/// Reflection symmetry asserted by the caller of the three-spectra route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryRoute {
    /// conj(v(1−x)) = v(x): real coefficients, third spectrum of v + h.
    Even,
    /// conj(v(1−x)) = −v(x): imaginary coefficients, third spectrum of v + ih.
    Odd,
}

/// Three-spectra reconstruction for symmetric v; assumes ‖v‖ = 1.
pub fn reconstruct_three_spectra(
    bundle: &SpectraBundle,
    symmetry: SymmetryRoute,
    opts: &InverseOptions,
) -> Result<InverseResult> {
    bundle.check_window()?;
    let third = require(&bundle.sigma_v_plus_h)?;
    if ambarzumyan_check(&bundle.sigma_l0, &bundle.sigma_v, opts) {
        return Ok(InverseResult::vanishing(bundle.sigma_l0.truncation, None));
    }
    let base = weight_pass(&bundle.sigma_l0, &bundle.sigma_v, opts)?;
    let shifted = weight_pass(&bundle.sigma_l0, third, opts)?;
    assemble_three_spectra(bundle.sigma_l0.truncation, base, shifted, symmetry, opts)
}

/// Combines the two weight passes of a symmetric route.
pub fn assemble_three_spectra(
    truncation: usize,
    base: WeightPass,
    shifted: WeightPass,
    symmetry: SymmetryRoute,
    opts: &InverseOptions,
) -> Result<InverseResult> {
    let alpha = base.total();
    if alpha == 0.0 {
        return Ok(InverseResult::vanishing(truncation, Some(base.classification.branch)));
    }
    let h = Potential::named(NamedForm::Parabola);
    let n = truncation as i64;
    let mut coefficients = Vec::with_capacity(2 * truncation + 1);
    for k in -n..=n {
        let hk = h.fourier_coefficient(k)?.re;
        let w = base.weight(k);
        let product = (shifted.weight(k) - w - alpha * hk * hk) / (2.0 * alpha);
        let magnitude = product / hk;
        let defect = (magnitude * magnitude - w / alpha).abs();
        if defect > opts.recon_tol {
            return Err(SpectralError::SymmetryViolation { mode: k, defect });
        }
        let c = match symmetry {
            SymmetryRoute::Even => Complex64::new(magnitude, 0.0),
            SymmetryRoute::Odd => Complex64::new(0.0, magnitude),
        };
        coefficients.push((k, c));
    }
    finish(base, alpha, coefficients, opts)
}

/// σ(L₀) for modes −N..N as plain values.
pub fn unperturbed_values(truncation: usize) -> Vec<f64> {
    let n = truncation as i64;
    (-n..=n).map(unperturbed_eigenvalue).collect()
}
