//! Encoded lattice Schwinger model: spin Hamiltonian and Gauss-law bookkeeping.
//!
//! After staggered (Kogut–Susskind) discretization, a Jordan–Wigner map and
//! elimination of the gauge links through the Gauss law, the model becomes a
//! pure spin chain with three term groups,
//!
//!   `H_S = H_ZZ + H_± + H_Z`
//!
//!   `H_ZZ = (J/2) Σ_{n<l≤N-1} (N-l) σᶻ_n σᶻ_l`        (asymmetric long range)
//!   `H_±  = w Σ_n (σ⁺_n σ⁻_{n+1} + h.c.)`             (pair creation/hopping)
//!   `H_Z  = Σ_n h_n σᶻ_n`,  `h_n = (m/2)(-1)ⁿ - (J/2) Σ_{k=n}^{N-1} (k mod 2)`
//!
//! Conventions used throughout the crate:
//! - sites are 1-indexed `n = 1..=N` in all formulas; serialized arrays are
//!   0-indexed with `array[i]` describing site `i + 1`;
//! - `σᶻ = +1` means an occupied site (electron on even `n`, no positron on
//!   odd `n`); the bare vacuum is the Néel pattern `|↑↓↑↓…⟩`;
//! - constant energy offsets arising from expanding `Σ L_n²` are dropped by
//!   default (they only contribute a global phase); [`build_hamiltonian_full`]
//!   re-enables them for diagonal-element checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings of the lattice model in natural units (energies ~ inverse length).
///
/// `j0` is the strength of the native two-body interaction of the simulator
/// hardware; it does not enter the model Hamiltonian itself, only the gate
/// compilation in [`crate::trotter`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Number of lattice sites `N` (even, ≥ 2).
    pub n_sites: usize,
    /// Hopping strength `w = 1/(2a)`.
    pub w: f64,
    /// Electric coupling `J = g²a/2`.
    pub j: f64,
    /// Fermion rest mass `m`.
    pub mass: f64,
    /// Native entangling-interaction strength of the simulator.
    #[serde(default = "default_j0")]
    pub j0: f64,
    /// Background electric field; accepted by Gauss-law reconstruction only.
    #[serde(default)]
    pub eps0: i64,
}

fn default_j0() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(n_sites: usize, w: f64, j: f64, mass: f64) -> Self {
        Self {
            n_sites,
            w,
            j,
            mass,
            j0: default_j0(),
            eps0: 0,
        }
    }

    pub fn with_j0(mut self, j0: f64) -> Self {
        self.j0 = j0;
        self
    }

    /// Check every invariant; every constructor of derived objects calls this.
    pub fn validate(&self) -> Result<()> {
        if self.n_sites % 2 != 0 {
            return Err(Error::param(
                "n_sites",
                format!("must be even and ≥ 2, got {}", self.n_sites),
            ));
        }
        self.validate_couplings()
    }

    /// Coupling-only checks, without the staggered-cell parity requirement.
    /// Gate compilation accepts odd chain lengths (the protocol itself does
    /// not care); the model Hamiltonian does not.
    pub fn validate_couplings(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::param(
                "n_sites",
                format!("must be ≥ 2, got {}", self.n_sites),
            ));
        }
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(Error::param("w", format!("must be > 0, got {}", self.w)));
        }
        if !(self.j0 > 0.0) || !self.j0.is_finite() {
            return Err(Error::param("j0", format!("must be > 0, got {}", self.j0)));
        }
        if self.j < 0.0 || !self.j.is_finite() {
            return Err(Error::param("j", format!("must be ≥ 0, got {}", self.j)));
        }
        if self.mass < 0.0 || !self.mass.is_finite() {
            return Err(Error::param(
                "mass",
                format!("must be ≥ 0, got {}", self.mass),
            ));
        }
        Ok(())
    }
}

/// Symbolic term list of the spin Hamiltonian.
///
/// All site indices are 1-based. `zz_pairs` holds `(n, l, c)` with `n < l`
/// contributing `c σᶻ_n σᶻ_l`; `pm_pairs` holds `(n, n+1, w)` contributing
/// `w (σ⁺_n σ⁻_{n+1} + h.c.)`; `z_fields` holds `(n, h)` contributing
/// `h σᶻ_n`. `constant` is an identity offset (zero unless requested).
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerms {
    pub n_sites: usize,
    pub zz_pairs: Vec<(usize, usize, f64)>,
    pub pm_pairs: Vec<(usize, usize, f64)>,
    pub z_fields: Vec<(usize, f64)>,
    pub constant: f64,
}

impl HamiltonianTerms {
    /// Empty term list on `n_sites` sites (the zero Hamiltonian).
    pub fn empty(n_sites: usize) -> Self {
        Self {
            n_sites,
            zz_pairs: Vec::new(),
            pm_pairs: Vec::new(),
            z_fields: Vec::new(),
            constant: 0.0,
        }
    }

    /// Staggered mass term alone: `(m/2) Σ (-1)ⁿ σᶻ_n`.
    pub fn mass_term(n_sites: usize, mass: f64) -> Self {
        let mut t = Self::empty(n_sites);
        t.z_fields = (1..=n_sites)
            .map(|n| (n, 0.5 * mass * neg_one_pow(n)))
            .collect();
        t
    }

    /// Nearest-neighbour flip-flop term alone: `w Σ (σ⁺σ⁻ + h.c.)`.
    pub fn hopping_term(n_sites: usize, w: f64) -> Self {
        let mut t = Self::empty(n_sites);
        t.pm_pairs = (1..n_sites).map(|n| (n, n + 1, w)).collect();
        t
    }

    /// Long-range electric term alone: `(J/2) Σ_{n<l≤N-1} (N-l) σᶻ_n σᶻ_l`.
    /// Valid for any chain length ≥ 2 (empty below 3 sites).
    pub fn zz_coulomb(n_sites: usize, j: f64) -> Self {
        let mut t = Self::empty(n_sites);
        for n in 1..n_sites.saturating_sub(1) {
            for l in (n + 1)..n_sites {
                t.zz_pairs.push((n, l, 0.5 * j * (n_sites - l) as f64));
            }
        }
        t
    }

    /// Sum of two term lists over the same chain.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(Error::SizeMismatch(format!(
                "cannot add terms on {} and {} sites",
                self.n_sites, other.n_sites
            )));
        }
        let mut out = self.clone();
        out.zz_pairs.extend_from_slice(&other.zz_pairs);
        out.pm_pairs.extend_from_slice(&other.pm_pairs);
        out.z_fields.extend_from_slice(&other.z_fields);
        out.constant += other.constant;
        Ok(out)
    }

    /// Scale every coefficient (used for ramped Hamiltonians).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.zz_pairs {
            t.2 *= factor;
        }
        for t in &mut out.pm_pairs {
            t.2 *= factor;
        }
        for t in &mut out.z_fields {
            t.1 *= factor;
        }
        out.constant *= factor;
        out
    }

    /// Upper bound on the operator norm: sum of absolute coefficients.
    pub fn norm_bound(&self) -> f64 {
        let zz: f64 = self.zz_pairs.iter().map(|t| t.2.abs()).sum();
        let pm: f64 = self.pm_pairs.iter().map(|t| 2.0 * t.2.abs()).sum();
        let z: f64 = self.z_fields.iter().map(|t| t.1.abs()).sum();
        zz + pm + z + self.constant.abs()
    }
}

/// A single spin configuration, `spins[i] ∈ {+1, -1}` for site `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    spins: Vec<i8>,
}

impl BasisState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::param("spins", "entries must be ±1"));
        }
        Ok(Self { spins })
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// σᶻ eigenvalue at 1-indexed site `n`.
    pub fn spin(&self, n: usize) -> i8 {
        self.spins[n - 1]
    }

    /// Total magnetization `M = Σ σᶻ_n`.
    pub fn magnetization(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    /// Index into the 2^N amplitude array. Site 1 is the most significant
    /// bit; a set bit means spin up (+1).
    pub fn index(&self) -> usize {
        self.spins
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | usize::from(s == 1))
    }

    /// Inverse of [`BasisState::index`].
    pub fn from_index(n_sites: usize, index: usize) -> Self {
        let spins = (0..n_sites)
            .map(|i| {
                if (index >> (n_sites - 1 - i)) & 1 == 1 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Self { spins }
    }
}

/// Electric field values on the `N - 1` links, reconstructed via the Gauss law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldProfile {
    pub links: Vec<i64>,
}

/// Build the full encoded spin Hamiltonian, dropping constant offsets.
///
/// The per-site field is the resummed form
/// `h_n = (m/2)(-1)ⁿ - (J/2) Σ_{k=n}^{N-1} (k mod 2)` and the long-range
/// couplings are `c_{nl} = (J/2)(N - l)` for `1 ≤ n < l ≤ N - 1`; site `N`
/// carries no ZZ coupling.
pub fn build_hamiltonian(params: &ModelParams) -> Result<HamiltonianTerms> {
    build_hamiltonian_inner(params, false)
}

/// Like [`build_hamiltonian`] but keeps the constant `(J/4) Σ_{n<N} (n + n mod 2)`
/// from expanding `J Σ L_n²`, so diagonal matrix elements reproduce the
/// electric-field energy exactly.
pub fn build_hamiltonian_full(params: &ModelParams) -> Result<HamiltonianTerms> {
    build_hamiltonian_inner(params, true)
}

fn build_hamiltonian_inner(params: &ModelParams, keep_constant: bool) -> Result<HamiltonianTerms> {
    params.validate()?;
    if params.eps0 != 0 {
        // The encoded couplings below assume a zero background field; a
        // nonzero eps0 would need modified offsets, so reject instead of
        // silently mis-building.
        return Err(Error::param(
            "eps0",
            "Hamiltonian construction requires eps0 = 0",
        ));
    }
    let n = params.n_sites;
    let mut terms = HamiltonianTerms::zz_coulomb(n, params.j);
    terms.pm_pairs = (1..n).map(|k| (k, k + 1, params.w)).collect();
    terms.z_fields = (1..=n)
        .map(|k| {
            let odd_count = (k..n).filter(|i| i % 2 == 1).count() as f64;
            (
                k,
                0.5 * params.mass * neg_one_pow(k) - 0.5 * params.j * odd_count,
            )
        })
        .collect();
    if keep_constant {
        terms.constant =
            0.25 * params.j * (1..n).map(|k| (k + k % 2) as f64).sum::<f64>();
    }
    Ok(terms)
}

/// Full `N×N` coupling matrix of the ZZ part: entry `(n, l)` is
/// `(J/2)(N - max(n, l))` for `n ≠ l` with `max(n, l) ≤ N - 1`, zero otherwise
/// (0-indexed storage, 1-indexed semantics).
///
/// The matrix decomposes into `N - 2` all-ones blocks — the entangling
/// windows of the digital protocol. Completing the zero diagonal with the
/// window multiplicities `(J/2)(N - max(n, 2))` recovers that block sum,
/// whose rank is exactly `N - 2`; see the rank test.
pub fn coupling_matrix(params: &ModelParams) -> Result<Vec<Vec<f64>>> {
    params.validate_couplings()?;
    let n = params.n_sites;
    let mut m = vec![vec![0.0; n]; n];
    for a in 1..=n {
        for b in 1..=n {
            let far = a.max(b);
            if a != b && far <= n - 1 {
                m[a - 1][b - 1] = 0.5 * params.j * (n - far) as f64;
            }
        }
    }
    Ok(m)
}

/// Bare vacuum (ground state at infinite mass): the Néel pattern with
/// `σᶻ_n = -(-1)ⁿ`, i.e. odd sites occupied.
pub fn bare_vacuum(n_sites: usize) -> Result<BasisState> {
    if n_sites < 2 || n_sites % 2 != 0 {
        return Err(Error::param(
            "n_sites",
            format!("must be even and ≥ 2, got {n_sites}"),
        ));
    }
    BasisState::new((1..=n_sites).map(|n| if n % 2 == 1 { 1 } else { -1 }).collect())
}

/// Reconstruct the electric field left to right:
/// `L_n = ε₀ + ½ Σ_{l=1}^{n} (σᶻ_l + (-1)ˡ)`.
pub fn gauss_field_profile(state: &BasisState, eps0: i64) -> FieldProfile {
    let n = state.n_sites();
    let mut links = Vec::with_capacity(n.saturating_sub(1));
    let mut acc = eps0;
    for l in 1..n {
        let step = state.spin(l) as i64 + neg_one_pow_i(l);
        debug_assert!(step % 2 == 0, "Gauss increment must be even");
        acc += step / 2;
        links.push(acc);
    }
    FieldProfile { links }
}

/// Reconstruct the electric field right to left:
/// `L_n = ε₀ - ½ Σ_{l=n+1}^{N} (σᶻ_l + (-1)ˡ)`.
///
/// Agrees with [`gauss_field_profile`] exactly when the total magnetization
/// vanishes (zero net charge).
pub fn gauss_field_profile_from_right(state: &BasisState, eps0: i64) -> FieldProfile {
    let n = state.n_sites();
    let mut links = vec![0i64; n.saturating_sub(1)];
    let mut acc = eps0;
    for l in (2..=n).rev() {
        let step = state.spin(l) as i64 + neg_one_pow_i(l);
        acc -= step / 2;
        links[l - 2] = acc;
    }
    FieldProfile { links }
}

pub(crate) fn neg_one_pow(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn neg_one_pow_i(n: usize) -> i64 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}
