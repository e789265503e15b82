//! Physical observables of the encoded model.
//!
//! All functions are pure in the state; nothing here mutates or evolves.
//! Entropies use the natural logarithm throughout (so a maximally entangled
//! qubit pair carries `ln 2`), consistent with the exponential convention of
//! the rate functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::engine::{reduced_density, StateVector};
use crate::error::{Error, Result};
use crate::model::{gauss_field_profile, neg_one_pow, BasisState};

/// Loschmidt echoes below this floor are clamped before taking logs.
const LOSCHMIDT_FLOOR: f64 = 1e-300;

/// A sampled observable on a time grid.
///
/// `stderr` is present for ensemble-averaged series; `times` are expressed in
/// the dimensionless unit named by `time_unit` (`"wt"` or `"mt"`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub name: String,
    pub time_unit: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, time_unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            time_unit: time_unit.into(),
            times: Vec::new(),
            values: Vec::new(),
            stderr: None,
            n_traj: None,
        }
    }

    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(Error::param("series", "times/values length mismatch"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("series", "times must be strictly increasing"));
        }
        Ok(())
    }
}

/// Particle number density `ν = (1/2N) Σ_n ⟨(-1)ⁿ σᶻ_n + 1⟩ ∈ [0, 1]`.
/// Zero on the bare vacuum, one on the fully inverted Néel state.
pub fn particle_density(psi: &StateVector) -> f64 {
    let n = psi.n_sites();
    let z = psi.sigma_z_expectations();
    let sum: f64 = z
        .iter()
        .enumerate()
        .map(|(i, &zi)| neg_one_pow(i + 1) * zi + 1.0)
        .sum();
    sum / (2.0 * n as f64)
}

/// Vacuum persistence amplitude and its intensive rate function.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumPersistence {
    /// `G = ⟨ψ₀|ψ(t)⟩`.
    pub amplitude: Complex64,
    /// Loschmidt echo `L = |G|²`.
    pub loschmidt: f64,
    /// Rate per site `λ = -ln(L)/N`, clamped at `L = 1e-300`.
    pub lambda: f64,
    /// Set when the echo underflowed the clamp.
    pub overflow: bool,
}

pub fn vacuum_persistence(psi0: &StateVector, psi_t: &StateVector) -> Result<VacuumPersistence> {
    if psi0.n_sites() != psi_t.n_sites() {
        return Err(Error::SizeMismatch(format!(
            "states on {} and {} sites",
            psi0.n_sites(),
            psi_t.n_sites()
        )));
    }
    let amplitude = psi0.inner(psi_t);
    let loschmidt = amplitude.norm_sqr();
    let (neg_log, overflow) = clamped_neg_log(loschmidt);
    Ok(VacuumPersistence {
        amplitude,
        loschmidt,
        lambda: neg_log / psi0.n_sites() as f64,
        overflow,
    })
}

/// Rate function per unit length `κ = -ln(L)/(aN) = λ/a`.
pub fn rate_function_kappa(loschmidt: f64, spacing: f64, n_sites: usize) -> Result<f64> {
    if !(spacing > 0.0) {
        return Err(Error::param("spacing", "must be > 0"));
    }
    let (neg_log, _) = clamped_neg_log(loschmidt);
    Ok(neg_log / (spacing * n_sites as f64))
}

fn clamped_neg_log(l: f64) -> (f64, bool) {
    if l < LOSCHMIDT_FLOOR {
        (-LOSCHMIDT_FLOOR.ln(), true)
    } else {
        // clamp at zero: echoes a hair above 1 are normalization roundoff
        ((-l.ln()).max(0.0), false)
    }
}

/// Von Neumann entropy of the left block `1..=cut` (natural log).
pub fn half_chain_entropy(psi: &StateVector, cut: usize) -> Result<f64> {
    Ok(reduced_density(psi, cut)?.von_neumann_entropy())
}

/// Expectation of the total magnetization `M̂ = Σ σᶻ_n`.
pub fn total_magnetization(psi: &StateVector) -> f64 {
    psi.sigma_z_expectations().iter().sum()
}

/// Expectation of every link field,
/// `⟨L_n⟩ = ε₀ + ½ Σ_{l=1}^{n} (⟨σᶻ_l⟩ + (-1)ˡ)`.
pub fn electric_field_expectation(psi: &StateVector, eps0: i64) -> Vec<f64> {
    let n = psi.n_sites();
    let z = psi.sigma_z_expectations();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let mut acc = eps0 as f64;
    for l in 1..n {
        acc += 0.5 * (z[l - 1] + neg_one_pow(l));
        out.push(acc);
    }
    out
}

/// Which block receives the link sitting exactly at the entanglement cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryLinkSide {
    Left,
    Right,
}

/// Block entropy of the state embedded in the *extended* Hilbert space that
/// carries explicit link registers.
///
/// Every basis component is mapped to `|spins⟩ ⊗ |L_1 … L_{N-1}⟩` with the
/// link values fixed by the Gauss law, and the bipartition splits spins at
/// `cut` and links according to `boundary_link_side`. For states supported on
/// a single magnetization sector this equals the spin-only
/// [`half_chain_entropy`] for either side choice; outside a fixed-charge
/// sector the equivalence fails, so such states are rejected.
pub fn extended_state_entropy(
    psi: &StateVector,
    cut: usize,
    eps0: i64,
    boundary_link_side: BoundaryLinkSide,
) -> Result<f64> {
    let n = psi.n_sites();
    if cut == 0 || cut >= n {
        return Err(Error::param("cut", format!("1 ≤ cut ≤ N-1 required, got {cut}")));
    }
    let support_tol = 1e-12;
    let mut sector: Option<i64> = None;
    // label -> index maps; BTreeMap keeps the construction deterministic
    let mut left_labels: BTreeMap<(usize, Vec<i64>), usize> = BTreeMap::new();
    let mut right_labels: BTreeMap<(usize, Vec<i64>), usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();

    for (idx, &amp) in psi.amplitudes().iter().enumerate() {
        if amp.norm() <= support_tol {
            continue;
        }
        let basis = BasisState::from_index(n, idx);
        let m = basis.magnetization();
        match sector {
            None => sector = Some(m),
            Some(m0) if m0 != m => {
                return Err(Error::Precondition(format!(
                    "state mixes magnetization sectors {m0} and {m}; the \
                     extended-space entropy is only defined at fixed charge"
                )));
            }
            _ => {}
        }
        let links = gauss_field_profile(&basis, eps0).links;
        let left_bits = idx >> (n - cut);
        let right_bits = idx & ((1 << (n - cut)) - 1);
        // links[0..cut-1] are strictly left of the cut, links[cut..] strictly
        // right; links[cut-1] is the boundary link L_cut
        let mut left_links: Vec<i64> = links[..cut - 1].to_vec();
        let mut right_links: Vec<i64> = links[cut..].to_vec();
        match boundary_link_side {
            BoundaryLinkSide::Left => left_links.push(links[cut - 1]),
            BoundaryLinkSide::Right => right_links.insert(0, links[cut - 1]),
        }
        let nl = left_labels.len();
        let li = *left_labels.entry((left_bits, left_links)).or_insert(nl);
        let nr = right_labels.len();
        let ri = *right_labels.entry((right_bits, right_links)).or_insert(nr);
        entries.push((li, ri, amp));
    }
    if entries.is_empty() {
        return Err(Error::param("psi", "state has no support above 1e-12"));
    }

    let (rows, cols) = (left_labels.len(), right_labels.len());
    let mut coeff = nalgebra::DMatrix::<Complex64>::zeros(rows, cols);
    for (li, ri, amp) in entries {
        coeff[(li, ri)] += amp;
    }
    // spectrum of C C^dagger = squared Schmidt coefficients
    let gram = &coeff * coeff.adjoint();
    let eig = gram.symmetric_eigen();
    let eigs: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    Ok(crate::engine::entropy_from_spectrum(&eigs))
}

/// Observables that can be tracked along a run or ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// Particle number density ν.
    Nu,
    /// Rate function λ of the vacuum persistence (needs the reference state).
    Lambda,
    /// Loschmidt echo |G|².
    Loschmidt,
    /// Total magnetization ⟨M̂⟩.
    Magnetization,
    /// Half-chain entropy at the given cut.
    Entropy { cut: usize },
}

impl ObservableKind {
    pub fn name(&self) -> String {
        match self {
            ObservableKind::Nu => "nu".into(),
            ObservableKind::Lambda => "lambda".into(),
            ObservableKind::Loschmidt => "loschmidt".into(),
            ObservableKind::Magnetization => "magnetization".into(),
            ObservableKind::Entropy { cut } => format!("entropy_cut{cut}"),
        }
    }

    /// Evaluate on a state; `reference` is the t = 0 state used by
    /// echo-type observables.
    pub fn evaluate(&self, psi: &StateVector, reference: &StateVector) -> Result<f64> {
        Ok(match self {
            ObservableKind::Nu => particle_density(psi),
            ObservableKind::Lambda => vacuum_persistence(reference, psi)?.lambda,
            ObservableKind::Loschmidt => vacuum_persistence(reference, psi)?.loschmidt,
            ObservableKind::Magnetization => total_magnetization(psi),
            ObservableKind::Entropy { cut } => half_chain_entropy(psi, *cut)?,
        })
    }
}
