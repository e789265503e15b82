//! Reduced density matrices of contiguous left blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::StateVector;

/// Hermitian, unit-trace reduced density matrix on 2^k dimensions.
#[derive(Debug, Clone)]
pub struct DensityBlock {
    dim: usize,
    mat: DMatrix<Complex64>,
}

impl DensityBlock {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Eigenvalues in descending order (real; tiny negative roundoff kept
    /// as-is for the caller to inspect).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.mat.clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }

    /// Von Neumann entropy `-Σ λ ln λ` (natural logarithm); eigenvalues below
    /// 1e-14 are excluded.
    pub fn von_neumann_entropy(&self) -> f64 {
        entropy_from_spectrum(&self.eigenvalues())
    }

    /// Largest deviation from Hermiticity, for invariant checks.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

pub(crate) fn entropy_from_spectrum(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&l| l > 1e-14)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        + 0.0 // normalizes the pure-state -0.0
}

/// Partial trace over sites `cut+1..=N`, keeping the left block `1..=cut`.
pub fn reduced_density(psi: &StateVector, cut: usize) -> Result<DensityBlock> {
    let n = psi.n_sites();
    if cut == 0 || cut >= n {
        return Err(Error::param(
            "cut",
            format!("must satisfy 1 ≤ cut ≤ N-1, got {cut} for N={n}"),
        ));
    }
    let rows = 1usize << cut;
    let cols = 1usize << (n - cut);
    let amps = psi.amplitudes();
    // rho_A[a, a'] = sum_b psi[a ⊗ b] conj(psi[a' ⊗ b])
    let mut mat = DMatrix::<Complex64>::zeros(rows, rows);
    for a in 0..rows {
        for ap in a..rows {
            let mut acc = Complex64::ZERO;
            for b in 0..cols {
                acc += amps[(a << (n - cut)) | b] * amps[(ap << (n - cut)) | b].conj();
            }
            mat[(a, ap)] = acc;
            mat[(ap, a)] = acc.conj();
        }
    }
    Ok(DensityBlock { dim: rows, mat })
}
