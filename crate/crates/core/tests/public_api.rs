use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trispec_core::forward::{
    compute_spectrum, unperturbed_eigenvalue, PerturbedOperator, SpectralTag, SpectrumData, SpectrumEntry,
};
use trispec_core::inverse::{reconstruct_four_spectra, InverseOptions, SpectraBundle};
use trispec_core::oracle::{build_model, eigensolve, guarded_window, jacobi_eigh};
use trispec_core::potential::{NamedForm, Potential};
use trispec_core::resolvent::resolvent_l_alpha;
use trispec_core::ComplexScalar;

fn c(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}

#[test]
fn sampled_potential_matches_oracle() {
    let values: Vec<ComplexScalar> = (0..129)
        .map(|j| {
            let x = j as f64 / 128.0;
            c((2.0 * std::f64::consts::PI * x).cos(), x * (1.0 - x))
        })
        .collect();
    let v = Potential::samples(values).unwrap();
    let op = PerturbedOperator::new(-3.0, v, 12).unwrap();
    let data = compute_spectrum(&op).unwrap();
    let model = build_model(&op, 12).unwrap();
    let reference = guarded_window(&model, &eigensolve(&model).unwrap());
    let (lo, hi) = (unperturbed_eigenvalue(-10), unperturbed_eigenvalue(10));
    let ours: Vec<&SpectrumEntry> = data.entries.iter().filter(|e| e.value >= lo && e.value <= hi).collect();
    assert_eq!(ours.len(), reference.len());
    for (a, b) in ours.iter().zip(&reference) {
        assert!((a.value - b.value).abs() <= 1e-8 * b.value.abs().max(1.0));
        assert_eq!(a.multiplicity as usize, b.multiplicity);
    }
}

#[test]
fn perturbed_resolvent_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v = Potential::fourier([(-2, c(0.3, 0.4)), (0, c(0.5, 0.0)), (3, c(0.0, -0.7))]).unwrap();
    let n = 8;
    let op = PerturbedOperator::new(4.0, v, n).unwrap();
    let model = build_model(&op, n).unwrap();
    let eig = jacobi_eigh(&model.matrix, model.dim()).unwrap();
    let f_modes: Vec<(i64, ComplexScalar)> =
        (-3..=3).map(|k| (k, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    let f = Potential::fourier(f_modes.iter().copied()).unwrap();
    let dense_f: Vec<ComplexScalar> = (-(n as i64)..=n as i64).map(|k| f.fourier_coefficient(k).unwrap()).collect();
    for z in [c(100.0, 3.0), c(-5000.0, 0.5), c(0.3, -2.0)] {
        let r = resolvent_l_alpha(&op, z, &f, &[]).unwrap();
        let mut expected = vec![c(0.0, 0.0); model.dim()];
        for (value, vector) in eig.values.iter().zip(&eig.vectors) {
            let proj: ComplexScalar = vector.iter().zip(&dense_f).map(|(p, g)| p.conj() * g).sum();
            for (e, p) in expected.iter_mut().zip(vector) {
                *e += p * proj / (value - z);
            }
        }
        for (row, e) in expected.iter().enumerate() {
            let mode = model.mode(row);
            let got = r.modes.iter().find(|(m, _)| *m == mode).map_or(c(0.0, 0.0), |(_, y)| *y);
            assert!((got - e).norm() <= 1e-12 * e.norm().max(1e-3), "z={z} n={mode}: {got} vs {e}");
        }
    }
}

#[test]
fn reconstruction_with_negative_coupling() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = Potential::fourier([(-1, c(0.0, s)), (2, c(s, 0.0))]).unwrap();
    let g = Potential::named(NamedForm::Ramp);
    let spectrum = |p: &Potential| compute_spectrum(&PerturbedOperator::new(-2.0, p.clone(), 20).unwrap()).unwrap();
    let mut bundle = SpectraBundle::new(spectrum(&v));
    bundle.sigma_v_plus_g = Some(spectrum(&v.add(&g)));
    bundle.sigma_v_plus_ig = Some(spectrum(&v.add_scaled(c(0.0, 1.0), &g)));
    let r = reconstruct_four_spectra(&bundle, &InverseOptions::default()).unwrap();
    assert!((r.alpha.unwrap() + 2.0).abs() < 1e-9);
    assert!((r.coefficient(-1) - c(0.0, s)).norm() < 1e-8);
    assert!((r.coefficient(2) - c(s, 0.0)).norm() < 1e-8);
    assert!(r.residuals.iter().all(|(_, e)| *e < 1e-9));
    assert!(r.potential().unwrap().norm() > 0.999);
}

#[test]
fn malformed_spectra_are_rejected() {
    let mut data = SpectrumData::unperturbed(8);
    data.entries[3].multiplicity = 2;
    assert_eq!(data.validate().unwrap_err().kind(), "InvalidInput");
    data.entries[3].tag = SpectralTag::Sigma0AndSigma2;
    assert!(data.validate().is_ok());
    data.entries.swap(0, 1);
    assert_eq!(data.validate().unwrap_err().kind(), "InvalidInput");
}
