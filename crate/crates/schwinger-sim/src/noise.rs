//! Experimental imperfections: quasi-static coupling noise, collective
//! dephasing, hiding-pulse failures, and magnetization postselection.
//!
//! The error model has four knobs:
//!
//! - the entangling strength fluctuates by `δJ`, uniform on
//!   `[-delta_j_rel, +delta_j_rel] · J₀` and constant within one trajectory
//!   (laser drifts are slow against a single run);
//! - collective dephasing `δω Σ σᶻ` with `δω` uniform on
//!   `[-delta_w_rel, +delta_w_rel] · J₀`, also quasi-static, applied after
//!   every timed window for its duration;
//! - ions parked in hiding levels dephase at `δω' = hidden_factor · δω`;
//! - every hide and unhide pulse fails independently with probability `p`,
//!   tracked as classical shot bookkeeping (detected by measuring
//!   hiding-level population, except when both pulses of one step fail on
//!   the same ion).
//!
//! All randomness is counter-based: trajectory `i` draws from a ChaCha8
//! stream with `seed_from_u64(seed)` and `set_stream(i)`, so results are
//! reproducible independent of execution order and worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::StateVector;
use crate::error::{Error, Result};
use crate::gates::{GateKind, GateOp, GateSequence};
use crate::model::{BasisState, ModelParams};
use crate::observables::{ObservableKind, TimeSeries};
use crate::trotter::{compile_cycle, states_on_grid, CycleTimings};

/// Noise-model parameters. The half-widths are dimensionless fractions of
/// the native coupling `J₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// Half-width of the uniform relative fluctuation of `J₀`.
    #[serde(default)]
    pub delta_j_rel: f64,
    /// Half-width of the uniform collective dephasing `δω`, in units of `J₀`.
    #[serde(default)]
    pub delta_w_rel: f64,
    /// Dephasing ratio `δω'/δω` for hidden ions.
    #[serde(default = "default_hidden_factor")]
    pub hidden_factor: f64,
    /// Per-pulse hide/unhide failure probability.
    #[serde(default)]
    pub hide_fail_p: f64,
    /// Trajectories in the ensemble.
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    pub seed: u64,
}

fn default_hidden_factor() -> f64 {
    1.5
}

fn default_n_traj() -> usize {
    200
}

impl NoiseParams {
    pub fn quiet(seed: u64) -> Self {
        Self {
            delta_j_rel: 0.0,
            delta_w_rel: 0.0,
            hidden_factor: default_hidden_factor(),
            hide_fail_p: 0.0,
            n_traj: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_j_rel < 0.0 || self.delta_w_rel < 0.0 {
            return Err(Error::param("noise", "half-widths must be ≥ 0"));
        }
        if self.hidden_factor < 0.0 {
            return Err(Error::param("hidden_factor", "must be ≥ 0"));
        }
        if !(0.0..1.0).contains(&self.hide_fail_p) {
            return Err(Error::param("hide_fail_p", "must lie in [0, 1)"));
        }
        if self.n_traj == 0 {
            return Err(Error::param("n_traj", "must be ≥ 1"));
        }
        Ok(())
    }
}

/// Noise realization of one trajectory, in units of `J₀`: the effective
/// entangling strength is `(1 + dj) J₀` and the dephasing rate is `dw · J₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub dj: f64,
    pub dw: f64,
}

impl NoiseSample {
    pub fn is_zero(&self) -> bool {
        self.dj == 0.0 && self.dw == 0.0
    }
}

/// Draw the quasi-static sample of trajectory `trajectory_index`:
/// two uniform deviates from the per-trajectory ChaCha8 stream, mapped as
/// `x ↦ (2x - 1) · half_width`.
pub fn sample_noise(np: &NoiseParams, trajectory_index: u64) -> NoiseSample {
    let mut rng = ChaCha8Rng::seed_from_u64(np.seed);
    rng.set_stream(trajectory_index);
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    NoiseSample {
        dj: (2.0 * u1 - 1.0) * np.delta_j_rel,
        dw: (2.0 * u2 - 1.0) * np.delta_w_rel,
    }
}

/// Apply one noise realization to a compiled sequence: every MS angle is
/// scaled by `1 + dj`, and after every timed window of duration `Δ` a
/// dephasing `LOCAL_Z` is appended with angle `dw·J₀·Δ` on active sites and
/// `hidden_factor·dw·J₀·Δ` on hidden sites. A zero sample returns the
/// sequence unchanged.
pub fn perturb_sequence(seq: &GateSequence, s: &NoiseSample, np: &NoiseParams) -> GateSequence {
    if s.is_zero() {
        return seq.clone();
    }
    let mut out = GateSequence::new(seq.n_sites, seq.j0);
    let mut hidden_mask = 0u64;
    for gate in &seq.gates {
        let emitted = match &gate.kind {
            GateKind::MsXx { sites, theta } => GateOp {
                kind: GateKind::MsXx {
                    sites: sites.clone(),
                    theta: theta * (1.0 + s.dj),
                },
                duration: gate.duration,
            },
            GateKind::Hide { sites } => {
                for &site in sites {
                    hidden_mask |= 1 << (site - 1);
                }
                gate.clone()
            }
            GateKind::Unhide { sites } => {
                for &site in sites {
                    hidden_mask &= !(1 << (site - 1));
                }
                gate.clone()
            }
            _ => gate.clone(),
        };
        out.gates.push(emitted);
        if gate.duration > 0.0 && s.dw != 0.0 {
            let angles = (1..=seq.n_sites)
                .map(|site| {
                    let rate = if hidden_mask >> (site - 1) & 1 == 1 {
                        np.hidden_factor * s.dw
                    } else {
                        s.dw
                    };
                    (site, rate * seq.j0 * gate.duration)
                })
                .collect();
            out.gates.push(GateOp::local_z(angles));
        }
    }
    out
}

/// Everything needed to run one noisy ensemble on a time grid.
#[derive(Debug, Clone)]
pub struct EnsembleInput<'a> {
    pub params: &'a ModelParams,
    pub cycle_time: f64,
    pub times: &'a [f64],
    pub psi0: &'a StateVector,
    pub observables: &'a [ObservableKind],
    /// Unit label stamped onto the output series.
    pub time_unit: &'a str,
}

/// Run `n_traj` perturbed schedules from the same initial state and average.
///
/// Per time point the output series carry the trajectory mean and the
/// standard error (sample standard deviation / √n_traj). Trajectories are
/// processed in parallel but reduced in index order, so results are bitwise
/// independent of the worker count.
pub fn ensemble_average(input: &EnsembleInput, np: &NoiseParams) -> Result<Vec<TimeSeries>> {
    np.validate()?;
    let per_traj: Vec<Vec<Vec<f64>>> = (0..np.n_traj as u64)
        .into_par_iter()
        .map(|traj| -> Result<Vec<Vec<f64>>> {
            let sample = sample_noise(np, traj);
            trajectory_observables(input, np, &sample)
        })
        .collect::<Result<_>>()?;

    let n_t = input.times.len();
    let n_obs = input.observables.len();
    let mut series = Vec::with_capacity(n_obs);
    for (oi, kind) in input.observables.iter().enumerate() {
        let mut means = Vec::with_capacity(n_t);
        let mut errs = Vec::with_capacity(n_t);
        for ti in 0..n_t {
            let mut mean = 0.0;
            for traj in &per_traj {
                mean += traj[oi][ti];
            }
            mean /= np.n_traj as f64;
            let var = if np.n_traj > 1 {
                per_traj
                    .iter()
                    .map(|traj| (traj[oi][ti] - mean).powi(2))
                    .sum::<f64>()
                    / (np.n_traj - 1) as f64
            } else {
                0.0
            };
            means.push(mean);
            errs.push((var / np.n_traj as f64).sqrt());
        }
        series.push(TimeSeries {
            name: kind.name(),
            time_unit: input.time_unit.to_string(),
            times: input.times.to_vec(),
            values: means,
            stderr: Some(errs),
            n_traj: Some(np.n_traj),
        });
    }
    Ok(series)
}

/// One trajectory's observable values: `result[obs][time]`.
fn trajectory_observables(
    input: &EnsembleInput,
    np: &NoiseParams,
    sample: &NoiseSample,
) -> Result<Vec<Vec<f64>>> {
    let states = states_on_grid(input.cycle_time, input.times, input.psi0, |tau| {
        let timings = CycleTimings::for_duration(input.params, tau)?;
        let ideal = compile_cycle(input.params, &timings)?;
        Ok(perturb_sequence(&ideal, sample, np))
    })?;
    let mut out = vec![Vec::with_capacity(states.len()); input.observables.len()];
    for psi in &states {
        for (oi, kind) in input.observables.iter().enumerate() {
            out[oi].push(kind.evaluate(psi, input.psi0)?);
        }
    }
    Ok(out)
}

/// Shot statistics of the hiding/unhiding failure model.
///
/// Per shot, every hide and unhide pulse of every step fails independently
/// with probability `p`. A shot is *detected* when at least one step leaves
/// hiding-level population behind (exactly one of an ion's two pulses
/// failed somewhere); it carries an *undetected* error when both pulses of
/// one step fail on the same ion. The two classes can overlap — a shot may
/// be discarded by detection and still contain a paired failure — so
/// `undetected_rate` counts all shots carrying a paired failure. `survival`
/// counts fully clean shots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HidingFailureStats {
    pub n_shots: usize,
    pub n_steps: usize,
    pub detected_rate: f64,
    pub undetected_rate: f64,
    pub survival_rate: f64,
    pub detected_se: f64,
    pub undetected_se: f64,
}

/// Monte Carlo over hide/unhide pulse failures for a compiled sequence.
/// Each `HIDE` gate opens one step over its site set.
pub fn hiding_failure_monte_carlo(
    seq: &GateSequence,
    p: f64,
    seed: u64,
    n_shots: usize,
) -> Result<HidingFailureStats> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param("p", "must lie in [0, 1)"));
    }
    if n_shots == 0 {
        return Err(Error::param("n_shots", "must be ≥ 1"));
    }
    let steps: Vec<usize> = seq
        .gates
        .iter()
        .filter_map(|g| match &g.kind {
            GateKind::Hide { sites } => Some(sites.len()),
            _ => None,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut detected = 0usize;
    let mut undetected = 0usize;
    let mut clean = 0usize;
    for _ in 0..n_shots {
        let mut saw_single = false;
        let mut saw_pair = false;
        for &n_ions in &steps {
            for _ in 0..n_ions {
                let hide_fail = rng.gen::<f64>() < p;
                let unhide_fail = rng.gen::<f64>() < p;
                match (hide_fail, unhide_fail) {
                    (true, true) => saw_pair = true,
                    (false, false) => {}
                    _ => saw_single = true,
                }
            }
        }
        if saw_single {
            detected += 1;
        }
        if saw_pair {
            undetected += 1;
        }
        if !saw_single && !saw_pair {
            clean += 1;
        }
    }
    let n = n_shots as f64;
    let det = detected as f64 / n;
    let und = undetected as f64 / n;
    Ok(HidingFailureStats {
        n_shots,
        n_steps: steps.len(),
        detected_rate: det,
        undetected_rate: und,
        survival_rate: clean as f64 / n,
        detected_se: (det * (1.0 - det) / n).sqrt(),
        undetected_se: (und * (1.0 - und) / n).sqrt(),
    })
}

/// Keep only measurement outcomes with total magnetization `target_m`;
/// returns the kept outcomes and the acceptance fraction (1.0 for empty
/// input).
pub fn postselect_magnetization(
    outcomes: &[BasisState],
    target_m: i64,
) -> (Vec<BasisState>, f64) {
    let kept: Vec<BasisState> = outcomes
        .iter()
        .filter(|s| s.magnetization() == target_m)
        .cloned()
        .collect();
    let acceptance = if outcomes.is_empty() {
        1.0
    } else {
        kept.len() as f64 / outcomes.len() as f64
    };
    (kept, acceptance)
}
