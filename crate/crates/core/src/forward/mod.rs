//! Forward problem: characteristic functions, the secular function and the
//! spectrum of the perturbed operator.

mod characteristic;
mod spectrum;

use alloc::vec::Vec;
use core::f64::consts::PI;

pub use characteristic::{
    delta0, delta0_from_c, delta_alpha, det_m0, det_m0_check, det_malpha, det_malpha_check, hadamard_check,
    hadamard_product, series_head, SeriesHead,
};
pub use spectrum::{compute_spectrum, eigenfunction, eigenfunction_modes, secular, SecularFunction, SecularPole};

use crate::error::{Result, SpectralError};
use crate::potential::Potential;
use crate::ComplexScalar;


/// Smallest accepted truncation.
pub const MIN_TRUNCATION: usize = 8;
/// Default root tolerance, relative to max(1, |z|).
pub const DEFAULT_ROOT_TOL: f64 = 1e-14;
/// Coefficients below this multiple of ‖v‖ count as structural zeros.
pub const DROP_TOL: f64 = 1e-12;
/// Relative tolerance for identifying a computed value with (2nπ)³.
pub const MATCH_TOL: f64 = 1e-8;

/// Unperturbed eigenvalue z_n = (2nπ)³.
pub fn unperturbed_eigenvalue(n: i64) -> f64 {
    let l = 2.0 * PI * n as f64;
    l * l * l
}

/// Mode index n with (2nπ)³ nearest to `z`.
pub fn nearest_mode(z: f64) -> i64 {
    libm::round(libm::cbrt(z) / (2.0 * PI)) as i64
}

/// Absolute matching tolerance at `z`.
pub fn match_tolerance(z: f64) -> f64 {
    MATCH_TOL * z.abs().max(1.0)
}

/// The operator L_α = L₀ + α⟨·, v⟩v truncated to modes −N..N.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedOperator {
    alpha: f64,
    potential: Potential,
    truncation: usize,
    tol: f64,
    coefficients: Vec<ComplexScalar>,
}

impl PerturbedOperator {
    pub fn new(alpha: f64, potential: Potential, truncation: usize) -> Result<PerturbedOperator> {
        if !alpha.is_finite() {
            return Err(SpectralError::InvalidInput { reason: "coupling must be finite" });
        }
        if truncation < MIN_TRUNCATION {
            return Err(SpectralError::TruncationTooSmall { truncation, required: MIN_TRUNCATION });
        }
        if let Some(max) = potential.max_mode() {
            if max as usize > truncation {
                return Err(SpectralError::TruncationTooSmall { truncation, required: max as usize });
            }
        }
        let coefficients = potential.coefficients(truncation)?;
        Ok(PerturbedOperator { alpha, potential, truncation, tol: DEFAULT_ROOT_TOL, coefficients })
    }

    pub fn with_tolerance(mut self, tol: f64) -> PerturbedOperator {
        self.tol = tol;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// v_n for |n| ≤ N, zero outside the window.
    pub fn coefficient(&self, n: i64) -> ComplexScalar {
        let k = n + self.truncation as i64;
        if k < 0 || k as usize >= self.coefficients.len() {
            ComplexScalar::new(0.0, 0.0)
        } else {
            self.coefficients[k as usize]
        }
    }

    /// (n, v_n) for |n| ≤ N.
    pub fn modes(&self) -> impl Iterator<Item = (i64, ComplexScalar)> + '_ {
        let n = self.truncation as i64;
        (-n..=n).zip(self.coefficients.iter().copied())
    }

    /// Threshold below which |v_n| is treated as zero.
    pub fn drop_tolerance(&self) -> f64 {
        DROP_TOL * self.potential.norm()
    }
}

/// Provenance of a spectrum entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralTag {
    /// Unperturbed eigenvalue (2nπ)³ with v_n = 0.
    Sigma0,
    /// Zero of the secular function.
    Sigma2,
    /// Both at once; multiplicity 2.
    Sigma0AndSigma2,
}

impl SpectralTag {
    pub fn name(&self) -> &'static str {
        match self {
            SpectralTag::Sigma0 => "sigma0",
            SpectralTag::Sigma2 => "sigma2",
            SpectralTag::Sigma0AndSigma2 => "sigma0_and_sigma2",
        }
    }

    pub fn from_name(name: &str) -> Option<SpectralTag> {
        match name {
            "sigma0" => Some(SpectralTag::Sigma0),
            "sigma2" => Some(SpectralTag::Sigma2),
            "sigma0_and_sigma2" => Some(SpectralTag::Sigma0AndSigma2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: u8,
    pub tag: SpectralTag,
}

/// Sorted eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumData {
    pub truncation: usize,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumData {
    /// σ(L₀) = {(2nπ)³ : |n| ≤ N}.
    pub fn unperturbed(truncation: usize) -> SpectrumData {
        let n = truncation as i64;
        let entries = (-n..=n)
            .map(|k| SpectrumEntry { value: unperturbed_eigenvalue(k), multiplicity: 1, tag: SpectralTag::Sigma0 })
            .collect();
        SpectrumData { truncation, entries }
    }

    /// Checks ordering, finiteness and the multiplicity/tag pairing.
    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !e.value.is_finite() {
                return Err(SpectralError::InvalidInput { reason: "non-finite eigenvalue" });
            }
            let double = e.tag == SpectralTag::Sigma0AndSigma2;
            if (e.multiplicity == 2) != double || e.multiplicity == 0 || e.multiplicity > 2 {
                return Err(SpectralError::InvalidInput { reason: "multiplicity does not match tag" });
            }
        }
        if self.entries.windows(2).any(|w| w[0].value >= w[1].value) {
            return Err(SpectralError::InvalidInput { reason: "eigenvalues not strictly increasing" });
        }
        Ok(())
    }

    /// Eigenvalues repeated according to multiplicity.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.entries.len() + 2);
        for e in &self.entries {
            for _ in 0..e.multiplicity {
                out.push(e.value);
            }
        }
        out
    }
}
