//! JSON and CSV file formats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use trispec_core::forward::{SpectralTag, SpectrumData, SpectrumEntry};
use trispec_core::inverse::{InverseResult, SpectraBundle};
use trispec_core::potential::{NamedForm, Potential};
use trispec_core::SpectralError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::Parse { .. } => "ParseError",
            Error::Config(_) => "ConfigError",
            Error::Spectral(e) => e.kind(),
        }
    }

    /// One-line JSON diagnostic.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

impl Coefficient {
    fn new(n: i64, c: Complex64) -> Coefficient {
        Coefficient { n, re: c.re, im: c.im }
    }
}

/// Potential file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PotentialFile {
    Fourier { coeffs: Vec<Coefficient> },
    Samples { values: Vec<[f64; 2]> },
    Named { name: String },
}

impl PotentialFile {
    pub fn to_potential(&self) -> Result<Potential> {
        match self {
            PotentialFile::Fourier { coeffs } => {
                Ok(Potential::fourier(coeffs.iter().map(|c| (c.n, Complex64::new(c.re, c.im))))?)
            }
            PotentialFile::Samples { values } => {
                Ok(Potential::samples(values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())?)
            }
            PotentialFile::Named { name } => NamedForm::from_tag(name)
                .map(Potential::named)
                .ok_or_else(|| Error::Config(format!("unknown named potential {name:?}"))),
        }
    }

    pub fn from_modes(modes: &[(i64, Complex64)]) -> PotentialFile {
        PotentialFile::Fourier { coeffs: modes.iter().map(|&(n, c)| Coefficient::new(n, c)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub value: f64,
    pub multiplicity: u8,
    pub tag: String,
}

/// Spectrum file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    #[serde(rename = "truncation_N")]
    pub truncation: usize,
    pub entries: Vec<EntryRecord>,
}

impl From<&SpectrumData> for SpectrumFile {
    fn from(data: &SpectrumData) -> SpectrumFile {
        SpectrumFile {
            truncation: data.truncation,
            entries: data
                .entries
                .iter()
                .map(|e| EntryRecord { value: e.value, multiplicity: e.multiplicity, tag: e.tag.name().to_string() })
                .collect(),
        }
    }
}

impl SpectrumFile {
    pub fn to_data(&self) -> Result<SpectrumData> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let tag = SpectralTag::from_name(&e.tag)
                    .ok_or_else(|| Error::Config(format!("unknown spectral tag {:?}", e.tag)))?;
                Ok(SpectrumEntry { value: e.value, multiplicity: e.multiplicity, tag })
            })
            .collect::<Result<Vec<_>>>()?;
        let data = SpectrumData { truncation: self.truncation, entries };
        data.validate()?;
        Ok(data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub n: i64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub n: i64,
    pub residual: f64,
}

/// Reconstruction output. `alpha` is null when the spectra coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseFile {
    pub alpha: Option<f64>,
    pub coefficients: Vec<Coefficient>,
    pub weights: Vec<WeightRecord>,
    pub branch: Option<String>,
    pub residuals: Vec<ResidualRecord>,
    pub leading_constant: Option<[f64; 2]>,
}

impl From<&InverseResult> for InverseFile {
    fn from(r: &InverseResult) -> InverseFile {
        InverseFile {
            alpha: r.alpha,
            coefficients: r.coefficients.iter().map(|&(n, c)| Coefficient::new(n, c)).collect(),
            weights: r.weights.iter().map(|&(n, weight)| WeightRecord { n, weight }).collect(),
            branch: r.branch.map(|b| b.name().to_string()),
            residuals: r.residuals.iter().map(|&(n, residual)| ResidualRecord { n, residual }).collect(),
            leading_constant: r.leading_constant.map(|c| [c.re, c.im]),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.to_owned(), source })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn read_potential(path: &Path) -> Result<Potential> {
    read_json::<PotentialFile>(path)?.to_potential()
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumData> {
    read_json::<SpectrumFile>(path)?.to_data()
}

pub const SIGMA_L0: &str = "sigma_L0.json";
pub const SIGMA_V: &str = "sigma_v.json";
pub const SIGMA_V_PLUS_G: &str = "sigma_v_plus_g.json";
pub const SIGMA_V_PLUS_IG: &str = "sigma_v_plus_ig.json";
pub const SIGMA_V_PLUS_H: &str = "sigma_v_plus_h.json";

fn optional_spectrum(dir: &Path, name: &str) -> Result<Option<SpectrumData>> {
    let path = dir.join(name);
    if path.exists() {
        read_spectrum(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// Reads a bundle directory; σ(L₀) is synthesized when its file is absent.
pub fn read_bundle(dir: &Path) -> Result<SpectraBundle> {
    let sigma_v = read_spectrum(&dir.join(SIGMA_V))?;
    let mut bundle = SpectraBundle::new(sigma_v);
    if let Some(l0) = optional_spectrum(dir, SIGMA_L0)? {
        bundle.sigma_l0 = l0;
    }
    bundle.sigma_v_plus_g = optional_spectrum(dir, SIGMA_V_PLUS_G)?;
    bundle.sigma_v_plus_ig = optional_spectrum(dir, SIGMA_V_PLUS_IG)?;
    bundle.sigma_v_plus_h = optional_spectrum(dir, SIGMA_V_PLUS_H)?;
    Ok(bundle)
}

pub fn spectrum_csv(data: &SpectrumData) -> String {
    let mut s = String::from("value,multiplicity,tag\n");
    for e in &data.entries {
        writeln!(s, "{:?},{},{}", e.value, e.multiplicity, e.tag.name()).unwrap();
    }
    s
}

pub fn inverse_csv(r: &InverseResult) -> String {
    let mut s = String::from("n,re,im\n");
    for (n, c) in &r.coefficients {
        writeln!(s, "{n},{:?},{:?}", c.re, c.im).unwrap();
    }
    s
}

pub fn samples_csv(samples: &[(f64, f64)]) -> String {
    let mut s = String::from("z,q\n");
    for (z, q) in samples {
        writeln!(s, "{z:?},{q:?}").unwrap();
    }
    s
}
