//! Compilation and execution of the three-section digital protocol.
//!
//! One protocol cycle of length `T` realizes `e^{-i H_S T}` to first order in
//! three sections:
//!
//! **Section I** (long-range ZZ): sandwiched between collective ±π/4
//! Y-rotations, `N - 2` entangling windows of length `Δt_I` run with active
//! sets `{1,2}, {1,2,3}, …, {1..N-1}` while the remaining sites are hidden.
//! Every pair `(k, l)` with `l ≤ N - 1` then accumulates exactly `N - l`
//! windows, reproducing the `(N - l)`-graded couplings — exact for a single
//! step — with strength `J = 2 (Δt_I / T) J₀`.
//!
//! **Section II** (nearest-neighbour flip-flop): `N - 1` pair windows; in
//! each, the four-step conjugation `U · MS(Δt_II/2) · U† · MS(Δt_II/2)` with
//! `U = e^{i π/4 (σᶻ_n + σᶻ_{n+1})}` turns the native XX coupling into an
//! exact `e^{-i J₀ Δt_II (σ⁺σ⁻ + h.c.)}`, giving `w = (Δt_II / T) J₀`.
//! The windows are applied sequentially, itself a first-order split; the
//! compiler records a warning when `J₀ Δt_II (N-1) > 0.1`.
//!
//! **Section III** (local fields): one instantaneous per-site Z rotation with
//! angles `φ_n = h_n T`.

use crate::engine::StateVector;
use crate::error::{Error, Result};
use crate::gates::apply_sequence;
pub use crate::gates::{GateKind, GateOp, GateSequence};
use crate::model::{build_hamiltonian, HamiltonianTerms, ModelParams};
use crate::oracle;

use std::f64::consts::FRAC_PI_4;

/// Window lengths of one protocol cycle (or partial cycle) of length
/// `cycle_time`, for native coupling `j0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleTimings {
    pub j0: f64,
    pub cycle_time: f64,
    pub dt_i: f64,
    pub dt_ii: f64,
    pub dt_iii: f64,
}

impl CycleTimings {
    /// Timings that reproduce `params` over a cycle of length `tau`:
    /// `Δt_I = J τ / (2 J₀)`, `Δt_II = w τ / J₀`; local rotations are treated
    /// as instantaneous (`Δt_III = 0`).
    pub fn for_duration(params: &ModelParams, tau: f64) -> Result<Self> {
        params.validate_couplings()?;
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::param("cycle_time", "must be finite and ≥ 0"));
        }
        Ok(Self {
            j0: params.j0,
            cycle_time: tau,
            dt_i: params.j * tau / (2.0 * params.j0),
            dt_ii: params.w * tau / params.j0,
            dt_iii: 0.0,
        })
    }

    /// Total entangling time of one cycle.
    pub fn busy_time(&self, n_sites: usize) -> f64 {
        (n_sites.saturating_sub(2)) as f64 * self.dt_i
            + (n_sites - 1) as f64 * self.dt_ii
            + self.dt_iii
    }
}

/// Section I: collective rotation, growing entangling windows, inverse
/// rotation. Empty for `N < 3` (the model has no ZZ terms there).
pub fn compile_section1(params: &ModelParams, timings: &CycleTimings) -> Vec<GateOp> {
    let n = params.n_sites;
    let mut gates = Vec::new();
    if n < 3 {
        return gates;
    }
    gates.push(GateOp::local_y(FRAC_PI_4));
    for m in 2..n {
        let hidden: Vec<usize> = (m + 1..=n).collect();
        gates.push(GateOp::hide(hidden.clone()));
        gates.push(GateOp::ms(
            (1..=m).collect(),
            timings.j0 * timings.dt_i,
            timings.dt_i,
        ));
        gates.push(GateOp::unhide(hidden));
    }
    gates.push(GateOp::local_y(-FRAC_PI_4));
    gates
}

/// Section II: for each neighbour pair, hide the rest and run the four-step
/// conjugated double MS window.
pub fn compile_section2(params: &ModelParams, timings: &CycleTimings) -> Vec<GateOp> {
    let n = params.n_sites;
    let mut gates = Vec::new();
    let half = timings.dt_ii / 2.0;
    for k in 1..n {
        let pair = vec![k, k + 1];
        let rest: Vec<usize> = (1..=n).filter(|&s| s != k && s != k + 1).collect();
        gates.push(GateOp::hide(rest.clone()));
        // U = exp(i pi/4 (Z_k + Z_{k+1})), i.e. LOCAL_Z angles -pi/4
        gates.push(GateOp::local_z(vec![(k, -FRAC_PI_4), (k + 1, -FRAC_PI_4)]));
        gates.push(GateOp::ms(pair.clone(), timings.j0 * half, half));
        gates.push(GateOp::local_z(vec![(k, FRAC_PI_4), (k + 1, FRAC_PI_4)]));
        gates.push(GateOp::ms(pair, timings.j0 * half, half));
        gates.push(GateOp::unhide(rest));
    }
    gates
}

/// Section III: one per-site Z rotation with `φ_n = h_n · T`, where `h_n` is
/// the resummed local-field coefficient of the model.
pub fn compile_section3(params: &ModelParams, timings: &CycleTimings) -> Result<GateOp> {
    let terms = build_hamiltonian(params)?;
    let angles = terms
        .z_fields
        .iter()
        .map(|&(site, h)| (site, h * timings.cycle_time))
        .collect();
    Ok(GateOp::local_z(angles))
}

/// One full cycle: sections I, II, III in order.
pub fn compile_cycle(params: &ModelParams, timings: &CycleTimings) -> Result<GateSequence> {
    let mut seq = GateSequence::new(params.n_sites, timings.j0);
    seq.gates.extend(compile_section1(params, timings));
    seq.gates.extend(compile_section2(params, timings));
    seq.gates.push(compile_section3(params, timings)?);
    Ok(seq)
}

/// A compiled multi-cycle protocol run.
#[derive(Debug, Clone)]
pub struct TrotterSchedule {
    pub params: ModelParams,
    pub timings: CycleTimings,
    pub n_cycles: usize,
    pub cycle: GateSequence,
    /// Validity notes collected during compilation (never fatal).
    pub warnings: Vec<String>,
}

impl TrotterSchedule {
    /// Compile a schedule of `n_cycles` cycles of length `cycle_time`.
    ///
    /// Fails when the entangling windows cannot fit in the cycle, i.e. when
    /// `(N-2)Δt_I + (N-1)Δt_II + Δt_III > T` — the native coupling `j0` is
    /// then too weak for the requested couplings.
    pub fn new(params: &ModelParams, cycle_time: f64, n_cycles: usize) -> Result<Self> {
        if !(cycle_time > 0.0) || !cycle_time.is_finite() {
            return Err(Error::param("cycle_time", "must be finite and > 0"));
        }
        let timings = CycleTimings::for_duration(params, cycle_time)?;
        let busy = timings.busy_time(params.n_sites);
        if busy > cycle_time * (1.0 + 1e-12) {
            return Err(Error::param(
                "cycle_time",
                format!(
                    "entangling windows need {busy:.6} time units but the cycle \
                     is {cycle_time:.6}; increase j0 (≥ {:.3} here)",
                    ((params.n_sites - 2) as f64 * params.j / 2.0
                        + (params.n_sites - 1) as f64 * params.w)
                ),
            ));
        }
        let mut warnings = Vec::new();
        let seq_ii_strength = timings.j0 * timings.dt_ii * (params.n_sites - 1) as f64;
        if seq_ii_strength > 0.1 {
            warnings.push(format!(
                "sequential pair windows: J0*dt_II*(N-1) = {seq_ii_strength:.3} exceeds 0.1; \
                 the flip-flop section is itself coarsely Trotterized"
            ));
        }
        let cycle = compile_cycle(params, &timings)?;
        Ok(Self {
            params: params.clone(),
            timings,
            n_cycles,
            cycle,
            warnings,
        })
    }

    /// Simulated physical time after cycle `c`.
    pub fn time_after(&self, c: usize) -> f64 {
        c as f64 * self.timings.cycle_time
    }
}

/// Execute a schedule, recording the state after every full cycle.
/// `trajectory[c]` is the state at simulated time `c · T`; index 0 is `psi0`.
pub fn run_schedule(schedule: &TrotterSchedule, psi0: &StateVector) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(schedule.n_cycles + 1);
    let mut psi = psi0.clone();
    out.push(psi.clone());
    for _ in 0..schedule.n_cycles {
        apply_sequence(&schedule.cycle, &mut psi)?;
        out.push(psi.clone());
    }
    Ok(out)
}

/// Evaluate a Trotterized evolution on an arbitrary increasing time grid.
///
/// A grid point `t = kT + τ` with `0 < τ < T` is reached by `k` full cycles
/// followed by one *partial* cycle of length `τ` (window lengths scale with
/// the cycle length, so a partial cycle realizes the same couplings over a
/// shorter step). `cycle_for(tau)` must return the gate sequence for a cycle
/// of length `tau`; it is fed both `T` and the partial lengths, which lets
/// callers inject noise perturbations consistently.
pub fn states_on_grid<F>(
    cycle_time: f64,
    times: &[f64],
    psi0: &StateVector,
    mut cycle_for: F,
) -> Result<Vec<StateVector>>
where
    F: FnMut(f64) -> Result<GateSequence>,
{
    if !(cycle_time > 0.0) {
        return Err(Error::param("cycle_time", "must be > 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::param("times", "must be nondecreasing and ≥ 0"));
    }
    let full = cycle_for(cycle_time)?;
    let mut out = Vec::with_capacity(times.len());
    let mut checkpoint = psi0.clone();
    let mut cycles_done = 0usize;
    for &t in times {
        let target = ((t / cycle_time) + 1e-9).floor() as usize;
        while cycles_done < target {
            apply_sequence(&full, &mut checkpoint)?;
            cycles_done += 1;
        }
        let tau = t - cycles_done as f64 * cycle_time;
        if tau <= cycle_time * 1e-9 {
            out.push(checkpoint.clone());
        } else {
            let partial = cycle_for(tau)?;
            let mut psi = checkpoint.clone();
            apply_sequence(&partial, &mut psi)?;
            out.push(psi);
        }
    }
    Ok(out)
}

/// Ideal (noise-free) Trotter evolution on a time grid, starting from `psi0`.
pub fn ideal_states_on_grid(
    params: &ModelParams,
    cycle_time: f64,
    times: &[f64],
    psi0: &StateVector,
) -> Result<Vec<StateVector>> {
    states_on_grid(cycle_time, times, psi0, |tau| {
        compile_cycle(params, &CycleTimings::for_duration(params, tau)?)
    })
}

/// First-order Trotter error bound
/// `(t²/2n) Σ_{i<j} 2‖[H_i, H_j]‖₂` over the section Hamiltonians
/// `{H_ZZ, H_±, H_Z}`, with spectral norms from the dense oracle (N ≤ 10).
pub fn trotter_error_bound(params: &ModelParams, t: f64, n_steps: usize) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::param("n_steps", "must be ≥ 1"));
    }
    let full = build_hamiltonian(params)?;
    let mut h_zz = HamiltonianTerms::empty(params.n_sites);
    h_zz.zz_pairs = full.zz_pairs.clone();
    let mut h_pm = HamiltonianTerms::empty(params.n_sites);
    h_pm.pm_pairs = full.pm_pairs.clone();
    let mut h_z = HamiltonianTerms::empty(params.n_sites);
    h_z.z_fields = full.z_fields.clone();

    let parts = [h_zz, h_pm, h_z];
    let dense: Vec<_> = parts
        .iter()
        .map(oracle::dense_hamiltonian)
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            // diagonal sections commute exactly; skip the matrix products
            if parts[i].pm_pairs.is_empty() && parts[j].pm_pairs.is_empty() {
                continue;
            }
            let comm = &dense[i] * &dense[j] - &dense[j] * &dense[i];
            sum += 2.0 * oracle::operator_norm(&comm);
        }
    }
    Ok(t * t / (2.0 * n_steps as f64) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::bare_vacuum;

    fn params(n: usize, w: f64, j: f64, mass: f64, j0: f64) -> ModelParams {
        ModelParams::new(n, w, j, mass).with_j0(j0)
    }

    #[test]
    fn section1_window_structure() {
        let p = params(6, 1.0, 1.0, 1.0, 16.0);
        let t = CycleTimings::for_duration(&p, 0.5).unwrap();
        let gates = compile_section1(&p, &t);
        let active_sets: Vec<Vec<usize>> = gates
            .iter()
            .filter_map(|g| match &g.kind {
                GateKind::MsXx { sites, .. } => Some(sites.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(
            active_sets,
            vec![
                vec![1, 2],
                vec![1, 2, 3],
                vec![1, 2, 3, 4],
                vec![1, 2, 3, 4, 5],
            ]
        );
    }

    #[test]
    fn section1_single_window_for_n3() {
        let p = ModelParams {
            n_sites: 3,
            w: 1.0,
            j: 1.0,
            mass: 0.0,
            j0: 8.0,
            eps0: 0,
        };
        let t = CycleTimings::for_duration(&p, 0.4).unwrap();
        let gates = compile_section1(&p, &t);
        let ms: Vec<_> = gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::MsXx { .. }))
            .collect();
        assert_eq!(ms.len(), 1);
    }

    #[test]
    fn section1_empty_for_n2() {
        let p = params(2, 1.0, 3.0, 1.0, 8.0);
        let t = CycleTimings::for_duration(&p, 0.4).unwrap();
        assert!(compile_section1(&p, &t).is_empty());
    }

    #[test]
    fn section2_pair_window_count() {
        let p = params(6, 1.0, 1.0, 1.0, 16.0);
        let t = CycleTimings::for_duration(&p, 0.5).unwrap();
        let gates = compile_section2(&p, &t);
        let ms = gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::MsXx { .. }))
            .count();
        assert_eq!(ms, 2 * (6 - 1), "two MS gates per pair window");
    }

    #[test]
    fn section3_angles() {
        // staggered mass only: angles (-1, +1, -1, +1) for m=2, T=1
        let p = params(4, 1.0, 0.0, 2.0, 8.0);
        let t = CycleTimings::for_duration(&p, 1.0).unwrap();
        let gate = compile_section3(&p, &t).unwrap();
        match gate.kind {
            GateKind::LocalZ { angles } => {
                let vals: Vec<f64> = angles.iter().map(|a| a.1).collect();
                assert_eq!(vals, vec![-1.0, 1.0, -1.0, 1.0]);
            }
            _ => panic!("section III must be a LOCAL_Z gate"),
        }
        // field offsets only: angle on site 1 is -2 for J=2, T=1
        let p = params(4, 1.0, 2.0, 0.0, 16.0);
        let t = CycleTimings::for_duration(&p, 1.0).unwrap();
        let gate = compile_section3(&p, &t).unwrap();
        match gate.kind {
            GateKind::LocalZ { angles } => assert_eq!(angles[0], (1, -2.0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_cycles_returns_initial_state() {
        let p = params(4, 1.0, 1.0, 1.0, 16.0);
        let s = TrotterSchedule::new(&p, 0.5, 0).unwrap();
        let psi0 = StateVector::basis(&bare_vacuum(4).unwrap());
        let traj = run_schedule(&s, &psi0).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj[0], psi0);
    }

    #[test]
    fn cycles_preserve_norm_and_charge() {
        let p = params(6, 1.0, 1.0, 0.5, 16.0);
        let s = TrotterSchedule::new(&p, 0.4, 12).unwrap();
        let psi0 = StateVector::basis(&bare_vacuum(6).unwrap());
        let traj = run_schedule(&s, &psi0).unwrap();
        for (c, psi) in traj.iter().enumerate() {
            assert!(
                (psi.norm() - 1.0).abs() < 1e-10,
                "norm drift at cycle {c}"
            );
            assert!(psi.sector_leakage(0) < 1e-10, "charge leak at cycle {c}");
        }
    }

    #[test]
    fn infeasible_cycle_is_rejected() {
        // j0 too weak: windows cannot fit into the cycle
        let p = params(10, 1.0, 1.0, 1.0, 5.0);
        assert!(TrotterSchedule::new(&p, 1.0, 1).is_err());
    }

    #[test]
    fn sequential_splitting_warning_fires() {
        let p = params(10, 1.0, 1.0, 1.0, 16.0);
        let s = TrotterSchedule::new(&p, 0.75, 1).unwrap();
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn grid_states_match_cycle_boundaries() {
        let p = params(4, 1.0, 1.0, 1.0, 16.0);
        let t_cycle = 0.5;
        let s = TrotterSchedule::new(&p, t_cycle, 4).unwrap();
        let psi0 = StateVector::basis(&bare_vacuum(4).unwrap());
        let traj = run_schedule(&s, &psi0).unwrap();
        let times: Vec<f64> = (0..=4).map(|k| k as f64 * t_cycle).collect();
        let grid = ideal_states_on_grid(&p, t_cycle, &times, &psi0).unwrap();
        for (k, (a, b)) in traj.iter().zip(&grid).enumerate() {
            let dist: f64 = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(dist < 1e-12, "boundary {k} differs by {dist:.2e}");
        }
    }

    #[test]
    fn error_bound_vanishes_for_commuting_sections() {
        // with w -> 0 every remaining section is diagonal
        let p = ModelParams {
            n_sites: 4,
            w: 1e-300,
            j: 1.0,
            mass: 1.0,
            j0: 8.0,
            eps0: 0,
        };
        let bound = trotter_error_bound(&p, 1.0, 10).unwrap();
        assert!(bound < 1e-250, "bound should vanish, got {bound:.3e}");
    }

    #[test]
    fn error_bound_halves_with_double_steps() {
        let p = params(4, 1.0, 1.0, 1.0, 8.0);
        let b10 = trotter_error_bound(&p, 1.0, 10).unwrap();
        let b20 = trotter_error_bound(&p, 1.0, 20).unwrap();
        assert!((b10 / b20 - 2.0).abs() < 1e-9);
        assert!(b10 > 0.0);
    }
}
