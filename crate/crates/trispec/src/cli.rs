//! Command-line front end.

use std::path::{Path, PathBuf};
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use trispec_core::ctrig::{closed_form_residual, identity_residuals, IdentityFamily, MAX_CLOSED_FORM_N};
use trispec_core::forward::{compute_spectrum, secular, PerturbedOperator, SpectrumData};
use trispec_core::inverse::{
    ambarzumyan_check, assemble_four_spectra, assemble_three_spectra, weight_pass, InverseOptions, InverseResult,
    SpectraBundle, SymmetryRoute, WeightPass,
};
use trispec_core::potential::{NamedForm, Potential};

use crate::io::{self, Error, InverseFile, PotentialFile, Result, SpectrumFile};

#[derive(Debug, Parser)]
#[command(name = "trispec", version, about = "Spectra of i·y''' + α⟨y,v⟩v on [0,1] with periodic conditions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SymmetryArg {
    Even,
    Odd,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Tolerances {
    /// Reconstruction tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Relative tolerance for identifying eigenvalues across spectra.
    #[arg(long, default_value_t = 1e-8)]
    pub match_tol: f64,
}

impl Tolerances {
    fn options(&self) -> Result<InverseOptions> {
        if !(self.tol > 0.0 && self.match_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(InverseOptions { recon_tol: self.tol, match_tol: self.match_tol })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum of L_α; with --out also writes <stem>_secular.csv.
    Forward {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 16)]
        trunc: usize,
        /// Secular root tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Reconstruct v from σ(L₀), σ(v), σ(v + g), σ(v + ig).
    Inverse4 {
        /// Directory with sigma_v.json, sigma_v_plus_g.json, sigma_v_plus_ig.json
        /// and optionally sigma_L0.json.
        #[arg(long)]
        bundle: PathBuf,
        #[command(flatten)]
        tolerances: Tolerances,
        #[command(flatten)]
        output: Output,
    },
    /// Reconstruct a symmetric v from σ(L₀), σ(v), σ(v + h) (even) or σ(v + ih) (odd).
    Inverse3 {
        /// Directory with sigma_v.json, sigma_v_plus_h.json and optionally sigma_L0.json.
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum)]
        symmetry: SymmetryArg,
        #[command(flatten)]
        tolerances: Tolerances,
        #[command(flatten)]
        output: Output,
    },
    /// Forward then four-spectra inverse on v/‖v‖; random v when --potential is absent.
    Verify {
        #[arg(long)]
        potential: Option<PathBuf>,
        /// Coupling; random in [−5, 5] when absent.
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 24)]
        trunc: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tolerances: Tolerances,
        #[command(flatten)]
        output: Output,
    },
    /// Residuals of the c, s, d identity families at random points |z| ≤ 10.
    Identities {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// Failure threshold.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
}

/// Worker count: TRISPEC_THREADS if set, else available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("TRISPEC_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs the jobs on at most `thread_cap()` scoped threads, keeping order.
fn run_parallel<T: Send>(jobs: Vec<Box<dyn FnOnce() -> T + Send + '_>>) -> Vec<T> {
    let cap = thread_cap();
    let mut out = Vec::with_capacity(jobs.len());
    let mut jobs = jobs.into_iter().peekable();
    while jobs.peek().is_some() {
        let batch: Vec<_> = jobs.by_ref().take(cap).collect();
        thread::scope(|s| {
            let handles: Vec<_> = batch.into_iter().map(|job| s.spawn(job)).collect();
            out.extend(handles.into_iter().map(|h| h.join().expect("worker panicked")));
        });
    }
    out
}

fn emit(output: &Output, json: String, csv: impl FnOnce() -> String) -> Result<()> {
    let text = match output.format {
        Format::Json => json,
        Format::Csv => csv(),
    };
    match &output.out {
        Some(path) => io::write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn operator(alpha: f64, v: Potential, trunc: usize) -> Result<PerturbedOperator> {
    if !alpha.is_finite() {
        return Err(Error::Config("alpha must be finite".into()));
    }
    Ok(PerturbedOperator::new(alpha, v, trunc)?)
}

/// (z, Q(z)) at z = λ³ for λ uniform over the window, 20 samples per gap.
pub fn secular_samples(op: &PerturbedOperator) -> Vec<(f64, f64)> {
    let sec = secular(op);
    let edge = 2.0 * std::f64::consts::PI * (op.truncation() as f64 + 0.5);
    let count = 40 * op.truncation() + 2;
    (0..count)
        .map(|j| {
            let lambda = -edge + 2.0 * edge * j as f64 / (count - 1) as f64;
            let z = lambda * lambda * lambda;
            (z, sec.eval_real(z))
        })
        .collect()
}

fn secular_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "spectrum".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_secular.csv"))
}

fn forward(potential: &Path, alpha: f64, trunc: usize, tol: Option<f64>, output: &Output) -> Result<()> {
    let mut op = operator(alpha, io::read_potential(potential)?, trunc)?;
    if let Some(t) = tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        op = op.with_tolerance(t);
    }
    let data = compute_spectrum(&op)?;
    emit(output, io::to_json(&SpectrumFile::from(&data)), || io::spectrum_csv(&data))?;
    if let Some(out) = &output.out {
        io::write_text(&secular_path(out), &io::samples_csv(&secular_samples(&op)))?;
    }
    Ok(())
}

fn passes(bundle: &SpectraBundle, others: &[&SpectrumData], opts: &InverseOptions) -> Result<Vec<WeightPass>> {
    let l0 = &bundle.sigma_l0;
    let mut jobs: Vec<Box<dyn FnOnce() -> trispec_core::Result<WeightPass> + Send + '_>> = Vec::new();
    for s in std::iter::once(&bundle.sigma_v).chain(others.iter().copied()) {
        jobs.push(Box::new(move || weight_pass(l0, s, opts)));
    }
    run_parallel(jobs).into_iter().map(|r| r.map_err(Error::from)).collect()
}

fn missing(name: &str) -> Error {
    Error::Config(format!("bundle is missing {name}"))
}

pub fn inverse4(bundle: &SpectraBundle, opts: &InverseOptions) -> Result<InverseResult> {
    let g = bundle.sigma_v_plus_g.as_ref().ok_or_else(|| missing(io::SIGMA_V_PLUS_G))?;
    let ig = bundle.sigma_v_plus_ig.as_ref().ok_or_else(|| missing(io::SIGMA_V_PLUS_IG))?;
    bundle.check_window()?;
    if ambarzumyan_check(&bundle.sigma_l0, &bundle.sigma_v, opts) {
        return Ok(InverseResult::vanishing(bundle.sigma_l0.truncation, None));
    }
    let mut p = passes(bundle, &[g, ig], opts)?.into_iter();
    let (base, shifted, rotated) = (p.next().unwrap(), p.next().unwrap(), p.next().unwrap());
    Ok(assemble_four_spectra(bundle.sigma_l0.truncation, base, shifted, rotated, opts)?)
}

pub fn inverse3(bundle: &SpectraBundle, symmetry: SymmetryRoute, opts: &InverseOptions) -> Result<InverseResult> {
    let h = bundle.sigma_v_plus_h.as_ref().ok_or_else(|| missing(io::SIGMA_V_PLUS_H))?;
    bundle.check_window()?;
    if ambarzumyan_check(&bundle.sigma_l0, &bundle.sigma_v, opts) {
        return Ok(InverseResult::vanishing(bundle.sigma_l0.truncation, None));
    }
    let mut p = passes(bundle, &[h], opts)?.into_iter();
    let (base, shifted) = (p.next().unwrap(), p.next().unwrap());
    Ok(assemble_three_spectra(bundle.sigma_l0.truncation, base, shifted, symmetry, opts)?)
}

fn emit_inverse(result: &InverseResult, output: &Output) -> Result<()> {
    emit(output, io::to_json(&InverseFile::from(result)), || io::inverse_csv(result))
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    seed: u64,
    truncation: usize,
    alpha: f64,
    recovered_alpha: Option<f64>,
    alpha_relative_error: f64,
    max_coefficient_error: f64,
    potential: PotentialFile,
}

fn random_modes(rng: &mut ChaCha8Rng) -> Vec<(i64, Complex64)> {
    let count = rng.gen_range(1..=6);
    let mut modes: Vec<(i64, Complex64)> = Vec::new();
    while modes.len() < count {
        let n = rng.gen_range(-6i64..=6);
        if modes.iter().all(|(m, _)| *m != n) {
            let c = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            modes.push((n, c));
        }
    }
    modes.sort_by_key(|(n, _)| *n);
    modes
}

/// Forward spectra of v, v + g and v + ig in parallel.
pub fn forward_bundle(alpha: f64, v: &Potential, trunc: usize) -> Result<SpectraBundle> {
    let g = Potential::named(NamedForm::Ramp);
    let potentials = [v.clone(), v.add(&g), v.add_scaled(Complex64::new(0.0, 1.0), &g)];
    let jobs: Vec<Box<dyn FnOnce() -> Result<SpectrumData> + Send + '_>> = potentials
        .iter()
        .map(|p| {
            Box::new(move || Ok(compute_spectrum(&operator(alpha, p.clone(), trunc)?)?))
                as Box<dyn FnOnce() -> _ + Send>
        })
        .collect();
    let mut spectra = run_parallel(jobs).into_iter();
    let mut bundle = SpectraBundle::new(spectra.next().unwrap()?);
    bundle.sigma_v_plus_g = Some(spectra.next().unwrap()?);
    bundle.sigma_v_plus_ig = Some(spectra.next().unwrap()?);
    Ok(bundle)
}

fn verify(
    potential: Option<&Path>,
    alpha: Option<f64>,
    trunc: usize,
    seed: u64,
    tolerances: &Tolerances,
    output: &Output,
) -> Result<()> {
    let opts = tolerances.options()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = match potential {
        Some(path) => io::read_potential(path)?,
        None => Potential::fourier(random_modes(&mut rng))?,
    };
    let alpha = match alpha {
        Some(a) => a,
        None => loop {
            let a: f64 = rng.gen_range(-5.0..5.0);
            if a.abs() > 0.1 {
                break a;
            }
        },
    };
    if raw.norm() == 0.0 {
        return Err(Error::Config("potential has zero norm".into()));
    }
    let v = raw.combine(Complex64::new(1.0 / raw.norm(), 0.0), &Potential::zero(), Complex64::new(0.0, 0.0));
    let truth = operator(alpha, v.clone(), trunc)?;
    let bundle = forward_bundle(alpha, &v, trunc)?;
    let result = inverse4(&bundle, &opts)?;
    let max_coefficient_error = truth.modes().map(|(n, c)| (result.coefficient(n) - c).norm()).fold(0.0, f64::max);
    let alpha_relative_error = result.alpha.map_or(f64::INFINITY, |a| (a - alpha).abs() / alpha.abs());
    let report = VerifyReport {
        seed,
        truncation: trunc,
        alpha,
        recovered_alpha: result.alpha,
        alpha_relative_error,
        max_coefficient_error,
        potential: PotentialFile::from_modes(&truth.modes().filter(|(_, c)| c.norm() > 0.0).collect::<Vec<_>>()),
    };
    emit(output, io::to_json(&report), || {
        format!("max_coefficient_error,alpha_relative_error\n{max_coefficient_error:?},{alpha_relative_error:?}\n")
    })?;
    if max_coefficient_error > opts.recon_tol || alpha_relative_error > opts.recon_tol {
        return Err(Error::Config(format!(
            "round trip error {max_coefficient_error:e} (alpha {alpha_relative_error:e}) exceeds {:e}",
            opts.recon_tol
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct IdentityRow {
    family: &'static str,
    max_residual: f64,
}

/// Maximum residual per identity family plus the closed forms at 2nπi.
pub fn identity_audit(seed: u64, points: usize) -> Result<Vec<(&'static str, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; IdentityFamily::ALL.len()];
    for _ in 0..points {
        let mut draw =
            || Complex64::from_polar(10.0 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let (z1, z2) = (draw(), draw());
        for r in identity_residuals(z1, z2)? {
            let k = IdentityFamily::ALL.iter().position(|f| *f == r.family).unwrap();
            worst[k] = worst[k].max(r.residual);
        }
    }
    let mut rows: Vec<(&'static str, f64)> = IdentityFamily::ALL.iter().map(|f| f.name()).zip(worst).collect();
    let mut closed: f64 = 0.0;
    for n in -MAX_CLOSED_FORM_N..=MAX_CLOSED_FORM_N {
        closed = closed.max(closed_form_residual(n)?);
    }
    rows.push(("closed_form", closed));
    Ok(rows)
}

fn identities(seed: u64, points: usize, tol: f64, output: &Output) -> Result<()> {
    let rows = identity_audit(seed, points)?;
    let records: Vec<IdentityRow> =
        rows.iter().map(|&(family, max_residual)| IdentityRow { family, max_residual }).collect();
    emit(output, io::to_json(&records), || {
        let mut s = String::from("family,max_residual\n");
        for (f, r) in &rows {
            s.push_str(&format!("{f},{r:?}\n"));
        }
        s
    })?;
    if let Some((f, r)) = rows.iter().find(|(_, r)| r.is_nan() || *r > tol) {
        return Err(Error::Config(format!("{f} residual {r:e} exceeds {tol:e}")));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Forward { potential, alpha, trunc, tol, output } => forward(potential, *alpha, *trunc, *tol, output),
        Command::Inverse4 { bundle, tolerances, output } => {
            let result = inverse4(&io::read_bundle(bundle)?, &tolerances.options()?)?;
            emit_inverse(&result, output)
        }
        Command::Inverse3 { bundle, symmetry, tolerances, output } => {
            let route = match symmetry {
                SymmetryArg::Even => SymmetryRoute::Even,
                SymmetryArg::Odd => SymmetryRoute::Odd,
            };
            let result = inverse3(&io::read_bundle(bundle)?, route, &tolerances.options()?)?;
            emit_inverse(&result, output)
        }
        Command::Verify { potential, alpha, trunc, seed, tolerances, output } => {
            verify(potential.as_deref(), *alpha, *trunc, *seed, tolerances, output)
        }
        Command::Identities { seed, points, tol, output } => identities(*seed, *points, *tol, output),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trispec_core::forward::unperturbed_eigenvalue;
    use trispec_core::inverse::reconstruct_four_spectra;

    #[test]
    fn parallel_passes_match_serial() {
        let v = Potential::fourier([(0, Complex64::new(0.6, 0.0)), (2, Complex64::new(0.0, 0.8))]).unwrap();
        let bundle = forward_bundle(1.5, &v, 12).unwrap();
        let opts = InverseOptions::default();
        let a = inverse4(&bundle, &opts).unwrap();
        let b = reconstruct_four_spectra(&bundle, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn secular_samples_avoid_the_origin() {
        let op = PerturbedOperator::new(1.0, Potential::mode(0), 8).unwrap();
        let s = secular_samples(&op);
        assert_eq!(s.len(), 322);
        assert!(s.iter().all(|(_, q)| q.is_finite()));
        assert!(s.first().unwrap().0 < unperturbed_eigenvalue(-8));
    }

    #[test]
    fn secular_file_name() {
        assert_eq!(secular_path(Path::new("/tmp/run/spec.json")), Path::new("/tmp/run/spec_secular.csv"));
    }

    #[test]
    fn audit_covers_every_family() {
        let rows = identity_audit(3, 20).unwrap();
        assert_eq!(rows.len(), IdentityFamily::ALL.len() + 1);
        assert!(rows.iter().all(|(_, r)| *r <= 1e-10));
    }

    #[test]
    fn cli_parses() {
        Cli::command_check();
    }

    impl Cli {
        fn command_check() {
            use clap::CommandFactory;
            Cli::command().debug_assert();
        }
    }
}
