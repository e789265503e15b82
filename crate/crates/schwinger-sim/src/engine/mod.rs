//! Exact linear-algebra core: state vectors and matrix-free Hamiltonian action.
//!
//! Basis ordering: a configuration index `i ∈ 0..2^N` encodes site `n`
//! (1-indexed) in bit `N - n`, so site 1 is the most significant bit and a
//! set bit means `σᶻ = +1`. This is fixed by [`crate::model::BasisState::index`]
//! and relied on everywhere.

mod density;
mod evolve;
mod ground;

pub use density::{reduced_density, DensityBlock};
pub(crate) use density::entropy_from_spectrum;
pub use evolve::{evolve_exact, Evolver};
pub use ground::{ground_state, ground_state_in_sector, GroundState};

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BasisState, HamiltonianTerms};

/// Normalized complex amplitude vector over the 2^N spin configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state with amplitude 1 on `state`.
    pub fn basis(state: &BasisState) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << state.n_sites()];
        amps[state.index()] = Complex64::ONE;
        Self {
            n_sites: state.n_sites(),
            amps,
        }
    }

    /// Build from raw amplitudes, normalizing. Errors on wrong length or
    /// vanishing norm.
    pub fn from_amplitudes(n_sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_sites {
            return Err(Error::SizeMismatch(format!(
                "expected 2^{n_sites} amplitudes, got {}",
                amps.len()
            )));
        }
        let mut psi = Self { n_sites, amps };
        let norm = psi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::param("amplitudes", "norm must be finite and > 0"));
        }
        psi.scale(1.0 / norm);
        Ok(psi)
    }

    /// Wrap raw amplitudes without normalizing (unnormalized intermediates,
    /// e.g. `H|ψ⟩`).
    pub(crate) fn from_raw(n_sites: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_sites);
        Self { n_sites, amps }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// ⟨self|other⟩ with the left argument conjugated.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }

    /// Restore unit norm; callers use this after a sequence of operations
    /// that preserve the norm up to roundoff.
    pub fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n);
        }
    }

    /// ⟨σᶻ_n⟩ for every site, 0-indexed output for site `i + 1`.
    pub fn sigma_z_expectations(&self) -> Vec<f64> {
        let n = self.n_sites;
        let mut acc = vec![0.0; n];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (site, slot) in acc.iter_mut().enumerate() {
                let bit = (i >> (n - 1 - site)) & 1;
                *slot += if bit == 1 { p } else { -p };
            }
        }
        acc
    }

    /// Probability weight outside the total-magnetization sector `m`.
    pub fn sector_leakage(&self, m: i64) -> f64 {
        let n = self.n_sites as i64;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| 2 * (i.count_ones() as i64) - n != m)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Write a binary snapshot: one endianness tag byte (`b'L'`), the site
    /// count as little-endian u32, then interleaved real/imag f64 pairs.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&[b'L'])?;
        w.write_all(&(self.n_sites as u32).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a snapshot written by [`StateVector::write_snapshot`].
    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self> {
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        if tag[0] != b'L' {
            return Err(Error::param("snapshot", "unknown endianness tag"));
        }
        let mut n_buf = [0u8; 4];
        r.read_exact(&mut n_buf)?;
        let n_sites = u32::from_le_bytes(n_buf) as usize;
        if n_sites == 0 || n_sites > 30 {
            return Err(Error::param("snapshot", "site count out of range"));
        }
        let mut amps = Vec::with_capacity(1 << n_sites);
        let mut buf = [0u8; 16];
        for _ in 0..(1usize << n_sites) {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            amps.push(Complex64::new(re, im));
        }
        Ok(Self { n_sites, amps })
    }
}

/// Matrix-free action of a [`HamiltonianTerms`] on amplitude vectors.
///
/// The diagonal (ZZ, Z, constant) part is precomputed once per instance;
/// flip-flop terms are applied through two-bit masks. `hop_scale` uniformly
/// rescales all flip-flop couplings, which makes ramped Hamiltonians
/// `H_m + f(t) H_±` cheap to sweep.
#[derive(Debug, Clone)]
pub struct HamiltonianAction {
    n_sites: usize,
    diag: Vec<f64>,
    hops: Vec<(usize, f64)>,
    hop_scale: f64,
}

impl HamiltonianAction {
    pub fn new(terms: &HamiltonianTerms) -> Result<Self> {
        let n = terms.n_sites;
        if n == 0 || n > 30 {
            return Err(Error::UnsupportedSize(format!("n_sites = {n}")));
        }
        for &(a, b, _) in &terms.zz_pairs {
            if a == 0 || b == 0 || a >= b || b > n {
                return Err(Error::param("zz_pairs", format!("bad pair ({a}, {b})")));
            }
        }
        let dim = 1usize << n;
        let mut diag = vec![terms.constant; dim];
        for &(a, b, c) in &terms.zz_pairs {
            let ba = n - a;
            let bb = n - b;
            for (i, d) in diag.iter_mut().enumerate() {
                let sa = ((i >> ba) & 1) as i32 * 2 - 1;
                let sb = ((i >> bb) & 1) as i32 * 2 - 1;
                *d += c * f64::from(sa * sb);
            }
        }
        for &(a, c) in &terms.z_fields {
            if a == 0 || a > n {
                return Err(Error::param("z_fields", format!("bad site {a}")));
            }
            let ba = n - a;
            for (i, d) in diag.iter_mut().enumerate() {
                let sa = ((i >> ba) & 1) as i32 * 2 - 1;
                *d += c * f64::from(sa);
            }
        }
        let mut hops = Vec::with_capacity(terms.pm_pairs.len());
        for &(a, b, w) in &terms.pm_pairs {
            if a == 0 || b != a + 1 || b > n {
                return Err(Error::param(
                    "pm_pairs",
                    format!("flip-flop terms must act on neighbours, got ({a}, {b})"),
                ));
            }
            hops.push(((1usize << (n - a)) | (1usize << (n - b)), w));
        }
        Ok(Self {
            n_sites: n,
            diag,
            hops,
            hop_scale: 1.0,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn set_hop_scale(&mut self, scale: f64) {
        self.hop_scale = scale;
    }

    /// `out = H · input`. Both slices must have length 2^N.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.diag.len());
        debug_assert_eq!(out.len(), self.diag.len());
        for ((o, a), d) in out.iter_mut().zip(input).zip(&self.diag) {
            *o = a * *d;
        }
        for &(mask, w) in &self.hops {
            let w = w * self.hop_scale;
            if w == 0.0 {
                continue;
            }
            for (i, a) in input.iter().enumerate() {
                let bits = i & mask;
                // exactly one of the two sites occupied: flip-flop connects
                if bits != 0 && bits != mask {
                    out[i ^ mask] += w * a;
                }
            }
        }
    }

    /// ⟨ψ|H|ψ⟩ (real for the Hermitian action).
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let mut out = vec![Complex64::ZERO; psi.dim()];
        self.apply(psi.amplitudes(), &mut out);
        psi.amplitudes()
            .iter()
            .zip(&out)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// `H|ψ⟩` term by term without materializing the 2^N × 2^N matrix.
/// The result is not normalized.
pub fn apply_hamiltonian(h: &HamiltonianTerms, psi: &StateVector) -> Result<StateVector> {
    if h.n_sites != psi.n_sites() {
        return Err(Error::SizeMismatch(format!(
            "Hamiltonian on {} sites, state on {}",
            h.n_sites,
            psi.n_sites()
        )));
    }
    let action = HamiltonianAction::new(h)?;
    let mut out = vec![Complex64::ZERO; psi.dim()];
    action.apply(psi.amplitudes(), &mut out);
    Ok(StateVector::from_raw(psi.n_sites(), out))
}
