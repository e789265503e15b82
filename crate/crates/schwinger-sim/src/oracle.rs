//! Dense reference implementations for verification.
//!
//! Everything here builds explicit 2^N × 2^N matrices from Kronecker products
//! of 2×2 Pauli blocks — a deliberately independent code path from the
//! matrix-free engine, usable as an oracle against it. Guarded to small N;
//! production paths never call into this module.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::engine::StateVector;
use crate::error::{Error, Result};
use crate::gates::{apply_sequence, GateSequence};
use crate::model::HamiltonianTerms;

const MAX_DENSE_SITES: usize = 10;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// The 2x2 blocks are written in the engine's index ordering: basis index 0
// is spin down, index 1 is spin up (a set configuration bit means up).

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

/// Operator acting as `op` on the listed (1-indexed) sites and identity
/// elsewhere, with site 1 as the most significant factor. All entries of
/// `ops` must target distinct sites.
pub fn embed(n_sites: usize, ops: &[(usize, CMat)]) -> Result<CMat> {
    check_size(n_sites)?;
    let mut out = CMat::identity(1, 1);
    for site in 1..=n_sites {
        let factor = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| CMat::identity(2, 2));
        out = out.kronecker(&factor);
    }
    Ok(out)
}

/// Dense matrix of a [`HamiltonianTerms`] list.
pub fn dense_hamiltonian(terms: &HamiltonianTerms) -> Result<CMat> {
    let n = terms.n_sites;
    check_size(n)?;
    let dim = 1usize << n;
    let mut h = CMat::identity(dim, dim) * c(terms.constant, 0.0);
    for &(a, b, coeff) in &terms.zz_pairs {
        h += embed(n, &[(a, pauli_z()), (b, pauli_z())])? * c(coeff, 0.0);
    }
    for &(a, coeff) in &terms.z_fields {
        h += embed(n, &[(a, pauli_z())])? * c(coeff, 0.0);
    }
    for &(a, b, w) in &terms.pm_pairs {
        // w (s+ s- + s- s+) = (w/2)(XX + YY)
        let xx = embed(n, &[(a, pauli_x()), (b, pauli_x())])?;
        let yy = embed(n, &[(a, pauli_y()), (b, pauli_y())])?;
        h += (xx + yy) * c(0.5 * w, 0.0);
    }
    Ok(h)
}

/// `Σ_{k<l ∈ sites} σˣ_k σˣ_l` — the generator of one entangling block.
pub fn dense_xx_pair_sum(n_sites: usize, sites: &[usize]) -> Result<CMat> {
    check_size(n_sites)?;
    let dim = 1usize << n_sites;
    let mut h = CMat::zeros(dim, dim);
    for (i, &a) in sites.iter().enumerate() {
        for &b in &sites[i + 1..] {
            h += embed(n_sites, &[(a, pauli_x()), (b, pauli_x())])?;
        }
    }
    Ok(h)
}

/// `exp(-i H t)` for Hermitian `H` via dense eigendecomposition.
pub fn dense_expm(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let dim = h.nrows();
    let mut out = CMat::zeros(dim, dim);
    for k in 0..dim {
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        let col = eig.eigenvectors.column(k);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += phase * col[i] * col[j].conj();
            }
        }
    }
    out
}

/// Full unitary of a gate sequence, column by column through the gate engine.
pub fn sequence_unitary(seq: &GateSequence) -> Result<CMat> {
    check_size(seq.n_sites)?;
    let dim = 1usize << seq.n_sites;
    let mut u = CMat::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::ZERO; dim];
        amps[col] = Complex64::ONE;
        let mut psi = StateVector::from_amplitudes(seq.n_sites, amps)?;
        apply_sequence(seq, &mut psi)?;
        for row in 0..dim {
            u[(row, col)] = psi.amplitudes()[row];
        }
    }
    Ok(u)
}

/// Operator 2-norm (largest singular value) via power iteration on `A†A`.
pub fn operator_norm(a: &CMat) -> f64 {
    let dim = a.ncols();
    if dim == 0 {
        return 0.0;
    }
    let mut v: Vec<Complex64> = (0..dim)
        .map(|i| c(1.0 + (i as f64 * 0.613).sin(), (i as f64 * 0.277).cos()))
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0f64;
    for _ in 0..300 {
        // w = A†(A v)
        let av = mat_vec(a, &v);
        let w = mat_vec_adjoint(a, &av);
        let new_lambda = norm(&w);
        if new_lambda == 0.0 {
            return 0.0;
        }
        v = w;
        normalize(&mut v);
        if (new_lambda - lambda).abs() <= 1e-13 * new_lambda.max(1.0) {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    lambda.sqrt()
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn mat_vec(a: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

fn mat_vec_adjoint(a: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].conj() * v[i]).sum())
        .collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v {
            *x /= n;
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_SITES {
        return Err(Error::UnsupportedSize(format!(
            "dense oracle supports 1..={MAX_DENSE_SITES} sites, got {n}"
        )));
    }
    Ok(())
}
