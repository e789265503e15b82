//! Lowest eigenpairs via restarted Lanczos, optionally restricted to a
//! total-magnetization sector.
//!
//! The flip-flop terms conserve `M̂ = Σ σᶻ_n`, so the sector restriction is a
//! plain index subset: matvecs never leave the sector. Ground-state searches
//! for the encoded model run in the `M = 0` (zero net charge) sector.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::tridiag_eigen;
use crate::model::HamiltonianTerms;

use super::StateVector;

const LANCZOS_DIM: usize = 80;
const MAX_RESTARTS: usize = 80;
const DEGENERACY_GAP: f64 = 1e-10;

/// Result of a ground-state search.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// Final residual `‖Hψ - Eψ‖`.
    pub residual: f64,
    /// Estimated gap to the first excited Ritz value.
    pub gap: f64,
    /// Set when the gap estimate falls below 1e-10; the returned state is
    /// still deterministic (fixed start vector, phase-fixed output).
    pub degenerate: bool,
}

/// Ground state over the full 2^N space.
///
/// Converges to `‖Hψ - Eψ‖ ≤ tol · ‖H‖_est` where `‖H‖_est` is the sum of
/// absolute term coefficients.
pub fn ground_state(h: &HamiltonianTerms, tol: f64) -> Result<GroundState> {
    ground_state_impl(h, None, tol)
}

/// Ground state restricted to the total-magnetization sector `m`.
pub fn ground_state_in_sector(h: &HamiltonianTerms, m: i64, tol: f64) -> Result<GroundState> {
    ground_state_impl(h, Some(m), tol)
}

fn ground_state_impl(h: &HamiltonianTerms, sector: Option<i64>, tol: f64) -> Result<GroundState> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    let op = SectorOp::new(h, sector)?;
    let dim = op.dim();
    let norm_scale = h.norm_bound().max(1.0);
    let target = tol * norm_scale;

    // Deterministic, unstructured start vector: breaks symmetry ties the
    // same way on every run.
    let mut x: Vec<f64> = (0..dim).map(|i| 1.0 + 0.37 * ((i as f64) * 0.7).cos()).collect();
    normalize(&mut x);

    let mut energy = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let (theta, vec, _) = lanczos_lowest(&op, &x, &[])?;
        x = vec;
        energy = theta;
        residual = op.residual(&x, theta);
        if residual <= target {
            break;
        }
    }
    if residual > target {
        return Err(Error::Numerical(format!(
            "ground-state Lanczos stalled: residual {residual:.3e} > {target:.3e}"
        )));
    }
    // gap via one deflated pass: lowest eigenvalue orthogonal to the ground
    // vector (infinite for one-dimensional sectors)
    let gap = if dim > 1 {
        let mut y: Vec<f64> = (0..dim)
            .map(|i| 1.0 + 0.51 * ((i as f64) * 1.3).sin())
            .collect();
        let overlap = dot(&y, &x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi -= overlap * xi;
        }
        normalize(&mut y);
        let (theta1, _, _) = lanczos_lowest(&op, &y, &[&x])?;
        theta1 - energy
    } else {
        f64::INFINITY
    };

    let mut amps = vec![Complex64::ZERO; 1 << h.n_sites];
    for (k, &full) in op.indices.iter().enumerate() {
        amps[full] = Complex64::from(x[k]);
    }
    let mut state = StateVector::from_raw(h.n_sites, amps);
    phase_fix(&mut state);
    Ok(GroundState {
        energy,
        state,
        residual,
        gap,
        degenerate: gap < DEGENERACY_GAP,
    })
}

/// Make the largest-magnitude amplitude real and positive; ties broken by
/// the lowest configuration index.
fn phase_fix(psi: &mut StateVector) {
    let amps = psi.amps_mut();
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, a) in amps.iter().enumerate() {
        let m = a.norm();
        if m > best_mag + 1e-12 {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = amps[best] / amps[best].norm();
    let rot = phase.conj();
    for a in amps.iter_mut() {
        *a *= rot;
    }
}

/// Hamiltonian action restricted to a sector index set. Amplitudes are real:
/// the Hamiltonian is a real symmetric matrix, so the ground vector can be
/// chosen real.
struct SectorOp {
    indices: Vec<usize>,
    position: Vec<u32>,
    diag: Vec<f64>,
    hops: Vec<(usize, f64)>,
}

impl SectorOp {
    fn new(h: &HamiltonianTerms, sector: Option<i64>) -> Result<Self> {
        let n = h.n_sites;
        if n == 0 || n > 24 {
            return Err(Error::UnsupportedSize(format!(
                "ground-state search supports 1..=24 sites, got {n}"
            )));
        }
        let full_dim = 1usize << n;
        let indices: Vec<usize> = match sector {
            None => (0..full_dim).collect(),
            Some(m) => {
                if (m + n as i64) % 2 != 0 || m.abs() > n as i64 {
                    return Err(Error::param(
                        "sector",
                        format!("no magnetization sector M={m} for N={n}"),
                    ));
                }
                let ups = ((m + n as i64) / 2) as u32;
                (0..full_dim).filter(|i| i.count_ones() == ups).collect()
            }
        };
        if indices.is_empty() {
            return Err(Error::param("sector", "empty sector"));
        }
        let mut position = vec![u32::MAX; full_dim];
        for (k, &i) in indices.iter().enumerate() {
            position[i] = k as u32;
        }
        let diag = indices
            .iter()
            .map(|&i| {
                let mut d = h.constant;
                for &(a, b, c) in &h.zz_pairs {
                    let sa = ((i >> (n - a)) & 1) as i32 * 2 - 1;
                    let sb = ((i >> (n - b)) & 1) as i32 * 2 - 1;
                    d += c * f64::from(sa * sb);
                }
                for &(a, c) in &h.z_fields {
                    let sa = ((i >> (n - a)) & 1) as i32 * 2 - 1;
                    d += c * f64::from(sa);
                }
                d
            })
            .collect();
        let hops = h
            .pm_pairs
            .iter()
            .map(|&(a, b, w)| (((1usize << (n - a)) | (1usize << (n - b))), w))
            .collect();
        Ok(Self {
            indices,
            position,
            diag,
            hops,
        })
    }

    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn apply(&self, input: &[f64], out: &mut [f64]) {
        for ((o, x), d) in out.iter_mut().zip(input).zip(&self.diag) {
            *o = x * d;
        }
        for &(mask, w) in &self.hops {
            if w == 0.0 {
                continue;
            }
            for (k, x) in input.iter().enumerate() {
                let i = self.indices[k];
                let bits = i & mask;
                if bits != 0 && bits != mask {
                    let j = self.position[i ^ mask];
                    debug_assert_ne!(j, u32::MAX, "flip-flop left the sector");
                    out[j as usize] += w * x;
                }
            }
        }
    }

    fn residual(&self, x: &[f64], theta: f64) -> f64 {
        let mut hx = vec![0.0; x.len()];
        self.apply(x, &mut hx);
        hx.iter()
            .zip(x)
            .map(|(h, x)| (h - theta * x) * (h - theta * x))
            .sum::<f64>()
            .sqrt()
    }
}

/// One Lanczos pass from start vector `x`, kept orthogonal to `deflate`;
/// returns the lowest Ritz pair and the second Ritz value.
fn lanczos_lowest(
    op: &SectorOp,
    x: &[f64],
    deflate: &[&Vec<f64>],
) -> Result<(f64, Vec<f64>, f64)> {
    let dim = op.dim();
    let m_max = LANCZOS_DIM.min(dim);
    let mut basis: Vec<Vec<f64>> = vec![x.to_vec()];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut w = vec![0.0; dim];
    for j in 0..m_max {
        op.apply(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w);
        alphas.push(alpha);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= alpha * vi;
        }
        if j > 0 {
            let b = betas[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        for v in basis.iter().chain(deflate.iter().copied()) {
            let o = dot(v, &w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= o * vi;
            }
        }
        let beta = norm2(&w);
        if beta < 1e-13 || j + 1 == m_max {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|v| v / beta).collect());
    }

    let (vals, vecs) = tridiag_eigen(&alphas, &betas)?;
    let theta = vals[0];
    let theta1 = if vals.len() > 1 {
        vals[1]
    } else {
        f64::INFINITY
    };
    let mut vec = vec![0.0; dim];
    for (j, v) in basis.iter().enumerate() {
        let c = vecs[0][j];
        for (out, vi) in vec.iter_mut().zip(v) {
            *out += c * vi;
        }
    }
    normalize(&mut vec);
    Ok((theta, vec, theta1))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm2(a);
    if n > 0.0 {
        for x in a {
            *x /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::apply_hamiltonian;
    use crate::model::{bare_vacuum, BasisState, ModelParams};

    #[test]
    fn diagonal_mass_ground_state_is_bare_vacuum() {
        let n = 6;
        let h = HamiltonianTerms::mass_term(n, 2.0);
        let gs = ground_state(&h, 1e-10).unwrap();
        assert!((gs.energy - (-(2.0) * n as f64 / 2.0)).abs() < 1e-9);
        let vac = StateVector::basis(&bare_vacuum(n).unwrap());
        assert!((gs.state.inner(&vac).norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_site_hopping_singlet() {
        // N=2, w=1, m=0, J=0: ground state (|ud> - |du>)/sqrt(2), energy -1.
        let h = HamiltonianTerms::hopping_term(2, 1.0);
        let gs = ground_state_in_sector(&h, 0, 1e-10).unwrap();
        assert!((gs.energy + 1.0).abs() < 1e-9, "energy {}", gs.energy);
        let ud = BasisState::new(vec![1, -1]).unwrap().index();
        let du = BasisState::new(vec![-1, 1]).unwrap().index();
        let a = gs.state.amplitudes()[ud];
        let b = gs.state.amplitudes()[du];
        assert!((a.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert!((a + b).norm() < 1e-8, "amplitudes must be opposite");
        // phase fixing: dominant amplitude real positive (lowest index wins)
        assert!(b.re > 0.0 && b.im.abs() < 1e-10);
    }

    #[test]
    fn residual_contract_holds() {
        let p = ModelParams::new(8, 1.0, 0.6, 0.9);
        let h = crate::model::build_hamiltonian(&p).unwrap();
        let tol = 1e-10;
        let gs = ground_state_in_sector(&h, 0, tol).unwrap();
        let hpsi = apply_hamiltonian(&h, &gs.state).unwrap();
        let res: f64 = hpsi
            .amplitudes()
            .iter()
            .zip(gs.state.amplitudes())
            .map(|(h, p)| (h - Complex64::from(gs.energy) * p).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res <= tol * h.norm_bound(), "residual {res:.3e}");
        assert!(gs.state.sector_leakage(0) < 1e-14);
    }

    #[test]
    fn sector_restriction_changes_result() {
        // For the mass term the global ground state (m>0) is the Neel state in
        // M=0; the M=N sector's lowest state is all-up with higher energy.
        let h = HamiltonianTerms::mass_term(4, 1.0);
        let g0 = ground_state_in_sector(&h, 0, 1e-10).unwrap();
        let g4 = ground_state_in_sector(&h, 4, 1e-10).unwrap();
        assert!(g0.energy < g4.energy);
        assert!((g4.energy - 0.0).abs() < 1e-9); // staggered signs cancel
    }

    #[test]
    fn degenerate_manifold_is_flagged() {
        // Zero Hamiltonian: everything is degenerate.
        let h = HamiltonianTerms::empty(2);
        let gs = ground_state(&h, 1e-10).unwrap();
        assert!(gs.degenerate);
        assert!((gs.state.norm() - 1.0).abs() < 1e-12);
    }
}
