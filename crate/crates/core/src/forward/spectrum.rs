use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{
    match_tolerance, nearest_mode, unperturbed_eigenvalue, PerturbedOperator, SpectralTag, SpectrumData, SpectrumEntry,
};
use crate::error::{Result, SpectralError};
use crate::ComplexScalar;

/// One pole of the secular function: z_n with weight |v_n|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularPole {
    pub mode: i64,
    pub position: f64,
    pub weight: f64,
}

/// Q(z) = 1 + α Σ w_k / (z_k − z).
#[derive(Debug, Clone, PartialEq)]
pub struct SecularFunction {
    pub alpha: f64,
    pub poles: Vec<SecularPole>,
}

impl SecularFunction {
    /// Builds Q from poles in any order; zero weights are dropped.
    pub fn new(alpha: f64, mut poles: Vec<SecularPole>) -> SecularFunction {
        poles.retain(|p| p.weight != 0.0);
        poles.sort_by(|a, b| a.position.total_cmp(&b.position));
        SecularFunction { alpha, poles }
    }

    /// G(z) = Σ w_k / (z_k − z).
    pub fn g(&self, z: ComplexScalar) -> ComplexScalar {
        self.poles.iter().map(|p| p.weight / (p.position - z)).sum()
    }

    /// G'(z) = Σ w_k / (z_k − z)².
    pub fn g_prime(&self, z: ComplexScalar) -> ComplexScalar {
        self.poles
            .iter()
            .map(|p| {
                let d = p.position - z;
                p.weight / (d * d)
            })
            .sum()
    }

    pub fn eval(&self, z: ComplexScalar) -> ComplexScalar {
        self.g(z) * self.alpha + 1.0
    }

    pub fn eval_real(&self, z: f64) -> f64 {
        1.0 + self.alpha * self.poles.iter().map(|p| p.weight / (p.position - z)).sum::<f64>()
    }

    fn slope_real(&self, z: f64) -> f64 {
        self.alpha
            * self
                .poles
                .iter()
                .map(|p| {
                    let d = p.position - z;
                    p.weight / (d * d)
                })
                .sum::<f64>()
    }

    pub fn total_weight(&self) -> f64 {
        self.poles.iter().map(|p| p.weight).sum()
    }

    /// Zeros of Q: one strictly between each pair of consecutive poles and
    /// one beyond the extreme pole on the side of sign(α). Sorted.
    pub fn roots(&self) -> Vec<f64> {
        if self.alpha == 0.0 || self.poles.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.poles.len());
        let reach = self.alpha.abs() * self.total_weight() + 1.0;
        if self.alpha < 0.0 {
            let first = self.poles[0].position;
            out.push(self.bisect(first - reach, first));
        }
        for pair in self.poles.windows(2) {
            out.push(self.bisect(pair[0].position, pair[1].position));
        }
        if self.alpha > 0.0 {
            let last = self.poles[self.poles.len() - 1].position;
            out.push(self.bisect(last, last + reach));
        }
        out
    }

    /// Root of Q on the open interval (lo, hi) where sign(α)·Q increases
    /// from negative to positive; bisection to adjacent floats followed by
    /// one Newton step kept inside the final bracket.
    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        let sign = self.alpha.signum();
        for _ in 0..2200 {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            let q = sign * self.eval_real(mid);
            if q < 0.0 {
                lo = mid;
            } else if q > 0.0 {
                hi = mid;
            } else {
                return mid;
            }
        }
        let mid = lo + 0.5 * (hi - lo);
        let slope = self.slope_real(mid);
        if slope != 0.0 {
            let step = mid - self.eval_real(mid) / slope;
            if step > lo && step < hi {
                return step;
            }
        }
        mid
    }
}

/// Secular function of the operator: poles z_n with |v_n| above the drop
/// tolerance.
pub fn secular(op: &PerturbedOperator) -> SecularFunction {
    let drop = op.drop_tolerance();
    let poles = op
        .modes()
        .filter(|(_, v)| v.norm() > drop)
        .map(|(n, v)| SecularPole { mode: n, position: unperturbed_eigenvalue(n), weight: v.norm_sqr() })
        .collect();
    SecularFunction::new(op.alpha(), poles)
}

/// Spectrum σ₀ ∪ σ₂ of the truncated operator.
pub fn compute_spectrum(op: &PerturbedOperator) -> Result<SpectrumData> {
    let sec = secular(op);
    let drop = op.drop_tolerance();
    let mut entries: Vec<SpectrumEntry> = op
        .modes()
        .filter(|(_, v)| v.norm() <= drop || op.alpha() == 0.0)
        .map(|(n, _)| SpectrumEntry { value: unperturbed_eigenvalue(n), multiplicity: 1, tag: SpectralTag::Sigma0 })
        .collect();
    let sigma0_count = entries.len();
    for mu in sec.roots() {
        let hit = entries[..sigma0_count].iter_mut().find(|e| (e.value - mu).abs() <= match_tolerance(e.value));
        match hit {
            Some(e) => {
                e.multiplicity = 2;
                e.tag = SpectralTag::Sigma0AndSigma2;
            }
            None => entries.push(SpectrumEntry { value: mu, multiplicity: 1, tag: SpectralTag::Sigma2 }),
        }
    }
    entries.sort_by(|a, b| a.value.total_cmp(&b.value));
    let data = SpectrumData { truncation: op.truncation(), entries };
    if data.entries.windows(2).any(|w| w[0].value >= w[1].value) {
        return Err(SpectralError::InconsistentSpectra { reason: "coincident eigenvalues in computed spectrum" });
    }
    Ok(data)
}

fn find_root(sec: &SecularFunction, value: f64) -> Result<f64> {
    sec.roots()
        .into_iter()
        .find(|mu| (mu - value).abs() <= match_tolerance(value))
        .ok_or(SpectralError::InvalidInput { reason: "entry is not an eigenvalue of the operator" })
}

/// Orthonormal eigenfunctions for `entry` as Fourier modes: e^{2nπix} for
/// σ₀, and (1/√G′(μ)) Σ v_n/(z_n − μ) e^{2nπix} for σ₂.
pub fn eigenfunction_modes(op: &PerturbedOperator, entry: &SpectrumEntry) -> Result<Vec<Vec<(i64, ComplexScalar)>>> {
    let mut out = Vec::new();
    if matches!(entry.tag, SpectralTag::Sigma0 | SpectralTag::Sigma0AndSigma2) {
        let n = nearest_mode(entry.value);
        if (unperturbed_eigenvalue(n) - entry.value).abs() > match_tolerance(entry.value) {
            return Err(SpectralError::InvalidInput { reason: "entry is not an unperturbed eigenvalue" });
        }
        out.push(vec![(n, Complex64::new(1.0, 0.0))]);
    }
    if matches!(entry.tag, SpectralTag::Sigma2 | SpectralTag::Sigma0AndSigma2) {
        let sec = secular(op);
        let mu = if entry.tag == SpectralTag::Sigma2 { entry.value } else { find_root(&sec, entry.value)? };
        let norm = sec.g_prime(Complex64::new(mu, 0.0)).re.sqrt();
        let modes = sec.poles.iter().map(|p| (p.mode, op.coefficient(p.mode) / ((p.position - mu) * norm))).collect();
        out.push(modes);
    }
    Ok(out)
}

/// Eigenfunctions for `entry` sampled on `x_grid`, one per multiplicity.
pub fn eigenfunction(op: &PerturbedOperator, entry: &SpectrumEntry, x_grid: &[f64]) -> Result<Vec<Vec<ComplexScalar>>> {
    Ok(eigenfunction_modes(op, entry)?
        .into_iter()
        .map(|modes| {
            x_grid
                .iter()
                .map(|&x| modes.iter().map(|&(n, c)| c * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * x)).sum())
                .collect()
        })
        .collect())
}
