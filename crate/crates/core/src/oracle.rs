//! Dense matrix model of the truncated operator and a cyclic Jacobi
//! eigensolver for complex Hermitian matrices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Result, SpectralError};
use crate::forward::{unperturbed_eigenvalue, PerturbedOperator};
use crate::ComplexScalar;

const ZERO: ComplexScalar = Complex64::new(0.0, 0.0);
const MAX_SWEEPS: usize = 100;
/// Relative clustering tolerance for reporting multiplicities.
pub const CLUSTER_TOL: f64 = 1e-8;

/// diag((2nπ)³) + α v v* over modes −N..N, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedModel {
    pub truncation: usize,
    pub matrix: Vec<ComplexScalar>,
}

impl TruncatedModel {
    pub fn dim(&self) -> usize {
        2 * self.truncation + 1
    }

    pub fn get(&self, row: usize, col: usize) -> ComplexScalar {
        self.matrix[row * self.dim() + col]
    }

    /// Mode index n of row `row`.
    pub fn mode(&self, row: usize) -> i64 {
        row as i64 - self.truncation as i64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Builds the matrix model on modes −N..N.
pub fn build_model(op: &PerturbedOperator, truncation: usize) -> Result<TruncatedModel> {
    let reach = op.potential().max_mode().unwrap_or(0) as usize;
    if reach > truncation {
        return Err(SpectralError::TruncationTooSmall { truncation, required: reach });
    }
    let n = truncation as i64;
    let coeffs: Vec<ComplexScalar> = (-n..=n).map(|k| op.coefficient(k)).collect();
    let dim = coeffs.len();
    let mut matrix = vec![ZERO; dim * dim];
    for j in 0..dim {
        for k in 0..dim {
            matrix[j * dim + k] = coeffs[j] * coeffs[k].conj() * op.alpha();
        }
        let diag = &mut matrix[j * dim + j];
        *diag = Complex64::new(unperturbed_eigenvalue(j as i64 - n) + diag.re, 0.0);
    }
    Ok(TruncatedModel { truncation, matrix })
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Vec<Vec<ComplexScalar>>,
}

/// Cyclic Jacobi on a dense Hermitian matrix given row-major.
pub fn jacobi_eigh(matrix: &[ComplexScalar], dim: usize) -> Result<HermitianEigen> {
    let mut a = matrix.to_vec();
    let mut v = vec![ZERO; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    let norm = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let target = 1e-15 * norm;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal(&a, dim);
        if off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                rotate(&mut a, &mut v, dim, p, q);
            }
        }
    }
    if !converged && off_diagonal(&a, dim) > 1e-12 * norm {
        return Err(SpectralError::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[i * dim + i].re.total_cmp(&a[j * dim + j].re));
    Ok(HermitianEigen {
        values: order.iter().map(|&i| a[i * dim + i].re).collect(),
        vectors: order.iter().map(|&i| (0..dim).map(|r| v[r * dim + i]).collect()).collect(),
    })
}

fn off_diagonal(a: &[ComplexScalar], dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                s += a[i * dim + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates a[p][q] with the unitary W = [[c, s], [−s e^{−iφ}, c e^{−iφ}]]
/// acting on coordinates (p, q), where a[p][q] = r e^{iφ}.
fn rotate(a: &mut [ComplexScalar], v: &mut [ComplexScalar], dim: usize, p: usize, q: usize) {
    let apq = a[p * dim + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p * dim + p].re;
    let aqq = a[q * dim + q].re;
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Column update A ← A W, with W[p][p] = c, W[p][q] = s,
    // W[q][p] = −s e^{−iφ}, W[q][q] = c e^{−iφ}.
    let e = phase.conj();
    for k in 0..dim {
        let akp = a[k * dim + p];
        let akq = a[k * dim + q];
        a[k * dim + p] = akp * c - akq * e * s;
        a[k * dim + q] = akp * s + akq * e * c;
        let vkp = v[k * dim + p];
        let vkq = v[k * dim + q];
        v[k * dim + p] = vkp * c - vkq * e * s;
        v[k * dim + q] = vkp * s + vkq * e * c;
    }
    // Row update A ← W^H A.
    let ec = phase;
    for k in 0..dim {
        let apk = a[p * dim + k];
        let aqk = a[q * dim + k];
        a[p * dim + k] = apk * c - aqk * ec * s;
        a[q * dim + k] = apk * s + aqk * ec * c;
    }
    a[p * dim + q] = ZERO;
    a[q * dim + p] = ZERO;
    a[p * dim + p] = Complex64::new(a[p * dim + p].re, 0.0);
    a[q * dim + q] = Complex64::new(a[q * dim + q].re, 0.0);
}

/// A clustered eigenvalue of the matrix model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

/// Sorted eigenvalues of the model; values within
/// [`CLUSTER_TOL`]·max(1, |z|) of each other are merged.
pub fn eigensolve(model: &TruncatedModel) -> Result<Vec<OracleEigenvalue>> {
    let eig = jacobi_eigh(&model.matrix, model.dim())?;
    let mut out: Vec<OracleEigenvalue> = Vec::with_capacity(eig.values.len());
    for value in eig.values {
        match out.last_mut() {
            Some(last) if (value - last.value).abs() <= CLUSTER_TOL * last.value.abs().max(1.0) => {
                last.multiplicity += 1;
            }
            _ => out.push(OracleEigenvalue { value, multiplicity: 1 }),
        }
    }
    Ok(out)
}

/// Oracle eigenvalues strictly inside [z_{−N+2}, z_{N−2}].
pub fn guarded_window(model: &TruncatedModel, eigenvalues: &[OracleEigenvalue]) -> Vec<OracleEigenvalue> {
    let edge = model.truncation as i64 - 2;
    let lo = unperturbed_eigenvalue(-edge);
    let hi = unperturbed_eigenvalue(edge);
    eigenvalues.iter().copied().filter(|e| e.value >= lo && e.value <= hi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    fn op(alpha: f64, modes: &[(i64, ComplexScalar)]) -> PerturbedOperator {
        PerturbedOperator::new(alpha, Potential::fourier(modes.iter().copied()).unwrap(), 8).unwrap()
    }

    #[test]
    fn single_mode_model() {
        let m = build_model(&op(5.0, &[(1, c(1.0, 0.0))]), 2).unwrap();
        for r in 0..5 {
            for k in 0..5 {
                let n = m.mode(r);
                let expected = if r != k {
                    0.0
                } else if n == 1 {
                    unperturbed_eigenvalue(1) + 5.0
                } else {
                    unperturbed_eigenvalue(n)
                };
                assert_eq!(m.get(r, k), c(expected, 0.0));
            }
        }
        let eig = eigensolve(&m).unwrap();
        assert!(eig.iter().any(|e| (e.value - unperturbed_eigenvalue(1) - 5.0).abs() < 1e-9));
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let m = build_model(&op(0.0, &[(1, c(1.0, 0.0)), (-2, c(0.0, 1.0))]), 3).unwrap();
        let eig = eigensolve(&m).unwrap();
        let expected: Vec<f64> = (-3..=3).map(unperturbed_eigenvalue).collect();
        assert_eq!(eig.iter().map(|e| e.value).collect::<Vec<_>>(), expected);
    }

    #[test]
    fn two_by_two_block() {
        let h = 0.5f64.sqrt();
        let m = build_model(&op(1.0, &[(0, c(h, 0.0)), (1, c(h, 0.0))]), 1).unwrap();
        let z = unperturbed_eigenvalue(1);
        assert!((m.get(1, 1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((m.get(1, 2) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((m.get(2, 2) - c(z + 0.5, 0.0)).norm() < 1e-12);
        let tr = z + 1.0;
        let det = 0.5 * (z + 0.5) - 0.25;
        let big = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
        let small = det / big;
        let eig = eigensolve(&m).unwrap();
        let vals: Vec<f64> = eig.iter().map(|e| e.value).collect();
        assert!(vals.iter().any(|v| (v - small).abs() < 1e-12));
        assert!(vals.iter().any(|v| (v - big).abs() < 1e-12 * big));
    }

    #[test]
    fn truncation_guard() {
        let o = op(1.0, &[(3, c(1.0, 0.0))]);
        assert!(matches!(build_model(&o, 2), Err(SpectralError::TruncationTooSmall { .. })));
    }

    #[test]
    fn degenerate_eigenvalues_cluster() {
        let m = TruncatedModel {
            truncation: 1,
            matrix: vec![c(2.0, 0.0), ZERO, ZERO, ZERO, c(2.0, 0.0), ZERO, ZERO, ZERO, c(5.0, 0.0)],
        };
        let eig = eigensolve(&m).unwrap();
        assert_eq!(
            eig,
            vec![OracleEigenvalue { value: 2.0, multiplicity: 2 }, OracleEigenvalue { value: 5.0, multiplicity: 1 },]
        );
    }

    fn arb_model() -> impl Strategy<Value = TruncatedModel> {
        (-8.0f64..8.0, proptest::collection::vec((-5i64..=5, -1.0f64..1.0, -1.0f64..1.0), 1..7)).prop_map(
            |(alpha, modes)| {
                let p = Potential::fourier(modes.into_iter().map(|(n, a, b)| (n, c(a, b)))).unwrap();
                build_model(&PerturbedOperator::new(alpha, p, 8).unwrap(), 8).unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trace_and_residuals(m in arb_model()) {
            let dim = m.dim();
            let eig = jacobi_eigh(&m.matrix, dim).unwrap();
            let trace: f64 = (0..dim).map(|i| m.get(i, i).re).sum();
            let sum: f64 = eig.values.iter().sum();
            let scale = (0..dim).map(|i| m.get(i, i).re.abs()).sum::<f64>();
            prop_assert!((trace - sum).abs() <= 1e-9 * scale);
            let norm = m.frobenius_norm();
            for (val, vec) in eig.values.iter().zip(&eig.vectors) {
                let mut res = 0.0;
                for r in 0..dim {
                    let acc: ComplexScalar = vec.iter().enumerate().map(|(k, x)| m.get(r, k) * x).sum();
                    res += (acc - vec[r] * *val).norm_sqr();
                }
                prop_assert!(res.sqrt() <= 1e-9 * norm);
            }
        }

        #[test]
        fn rank_one_update_interlaces(m in arb_model()) {
            let dim = m.dim();
            let eig = jacobi_eigh(&m.matrix, dim).unwrap().values;
            let mut diag: Vec<f64> = (0..dim).map(|i| unperturbed_eigenvalue(m.mode(i))).collect();
            diag.sort_by(f64::total_cmp);
            // α‖v‖², whose sign fixes the direction of the shift.
            let shift: f64 = (0..dim).map(|i| m.get(i, i).re - unperturbed_eigenvalue(m.mode(i))).sum();
            for k in 0..dim {
                let tol = 1e-9 * diag[k].abs().max(1.0);
                if shift >= 0.0 {
                    prop_assert!(eig[k] >= diag[k] - tol);
                    if k + 1 < dim { prop_assert!(eig[k] <= diag[k + 1] + tol); }
                } else {
                    prop_assert!(eig[k] <= diag[k] + tol);
                    if k > 0 { prop_assert!(eig[k] >= diag[k - 1] - tol); }
                }
            }
        }
    }
}
