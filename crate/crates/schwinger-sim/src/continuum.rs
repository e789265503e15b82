//! Continuum-limit workflow: lattice-spacing parameterization, adiabatic
//! initial-state preparation, quench runs, and thermodynamic-limit
//! extrapolation in 1/N.
//!
//! The couplings rescale with the lattice constant as `w = 1/(2a)` and
//! `J = g²a/2` while the rest mass is spacing-independent. The correct order
//! of limits is `N → ∞` at fixed `a` first, then `a → 0`; the sweep driver
//! therefore extrapolates each spacing separately and leaves the final
//! spacing limit to the caller.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{ground_state_in_sector, Evolver, HamiltonianAction, StateVector};
use crate::error::{Error, Result};
use crate::model::{bare_vacuum, build_hamiltonian, HamiltonianTerms, ModelParams};
use crate::observables::{rate_function_kappa, vacuum_persistence, TimeSeries};
use crate::trotter::{compile_section2, compile_section3, CycleTimings};

/// Lattice-spacing parameterization of the theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpacing {
    pub a: f64,
    pub g: f64,
    pub mass: f64,
}

impl LatticeSpacing {
    /// Derived couplings `(w, J, m) = (1/2a, g²a/2, m)`.
    pub fn couplings(&self) -> Result<(f64, f64, f64)> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::param("a", "lattice spacing must be > 0"));
        }
        Ok((
            1.0 / (2.0 * self.a),
            0.5 * self.g * self.g * self.a,
            self.mass,
        ))
    }

    /// Model parameters on `n_sites` sites at this spacing.
    pub fn model_params(&self, n_sites: usize) -> Result<ModelParams> {
        let (w, j, m) = self.couplings()?;
        Ok(ModelParams::new(n_sites, w, j, m))
    }
}

/// Standalone form of the coupling rescaling.
pub fn couplings_from_spacing(ls: &LatticeSpacing) -> Result<(f64, f64, f64)> {
    ls.couplings()
}

/// Ramp profile `f(t)` with `f(0) = 0` and `f(t') = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    Linear,
}

/// Piecewise-constant discretization of a monotone ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    pub total_time: f64,
    pub n_steps: usize,
    pub shape: RampShape,
}

impl RampSchedule {
    pub fn linear(total_time: f64, n_steps: usize) -> Result<Self> {
        if !(total_time >= 0.0) || !total_time.is_finite() {
            return Err(Error::param("total_time", "must be finite and ≥ 0"));
        }
        if total_time > 0.0 && n_steps == 0 {
            return Err(Error::param("n_steps", "must be ≥ 1 for a nonzero ramp"));
        }
        Ok(Self {
            total_time,
            n_steps,
            shape: RampShape::Linear,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.total_time == 0.0 {
            return 1.0;
        }
        match self.shape {
            RampShape::Linear => (t / self.total_time).clamp(0.0, 1.0),
        }
    }
}

/// Outcome of an adiabatic preparation.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub state: StateVector,
    /// `⟨H_target⟩` in the prepared state.
    pub energy: f64,
    /// Overlap squared with the exact sector ground state, when the oracle
    /// was affordable.
    pub fidelity: Option<f64>,
    /// Gate bookkeeping of the digital mode (`None` on the exact path).
    pub gate_counts: Option<DigitalGateCounts>,
}

/// Per-Trotter-step gate counts of the digital preparation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DigitalGateCounts {
    pub pair_windows_per_step: usize,
    pub entangling_gates_per_step: usize,
    pub steps: usize,
}

/// Largest size for which the preparation reports a ground-state fidelity.
const FIDELITY_ORACLE_MAX_SITES: usize = 14;

/// Prepare the `g = 0` ground state by ramping `H(t) = H_m + f(t) H_±` from
/// the Néel state, integrating each piecewise-constant step exactly.
///
/// The ramp quality is reported (fidelity against the sector ground state
/// for small systems), never enforced.
pub fn adiabatic_prepare(
    params: &ModelParams,
    ramp: &RampSchedule,
    tol: f64,
) -> Result<PreparedState> {
    params.validate()?;
    let n = params.n_sites;
    let mut psi = StateVector::basis(&bare_vacuum(n)?);
    if ramp.total_time > 0.0 {
        let dt = ramp.total_time / ramp.n_steps as f64;
        let terms = HamiltonianTerms::mass_term(n, params.mass)
            .add(&HamiltonianTerms::hopping_term(n, params.w))?;
        let action = HamiltonianAction::new(&terms)?;
        let mut evolver = Evolver::from_action(action, tol / ramp.n_steps as f64)?;
        for k in 0..ramp.n_steps {
            let f = ramp.value((k as f64 + 0.5) * dt);
            evolver.action_mut().set_hop_scale(f);
            evolver.evolve(&mut psi, dt)?;
        }
    }
    finish_preparation(params, psi, None, tol)
}

/// Digital preparation: each Trotter step applies the pair-window compiler
/// (flip-flop section with strength `f_k · w`) followed by the local mass
/// rotations; the long-range section is absent because `J = 0` during
/// preparation.
pub fn adiabatic_prepare_digital(
    params: &ModelParams,
    ramp: &RampSchedule,
    cycle_time: f64,
    tol: f64,
) -> Result<PreparedState> {
    params.validate()?;
    if ramp.total_time > 0.0 && !(cycle_time > 0.0) {
        return Err(Error::param("cycle_time", "must be > 0"));
    }
    let n = params.n_sites;
    let mut psi = StateVector::basis(&bare_vacuum(n)?);
    let steps = if ramp.total_time > 0.0 {
        (ramp.total_time / cycle_time).round().max(1.0) as usize
    } else {
        0
    };
    let dt = if steps > 0 {
        ramp.total_time / steps as f64
    } else {
        0.0
    };
    for k in 0..steps {
        let f = ramp.value((k as f64 + 0.5) * dt);
        let step_params = ModelParams {
            j: 0.0,
            w: (f * params.w).max(f64::MIN_POSITIVE),
            ..params.clone()
        };
        let timings = CycleTimings::for_duration(&step_params, dt)?;
        let mut seq = crate::gates::GateSequence::new(n, params.j0);
        seq.gates.extend(compile_section2(&step_params, &timings));
        seq.gates.push(compile_section3(&step_params, &timings)?);
        crate::gates::apply_sequence(&seq, &mut psi)?;
    }
    let counts = DigitalGateCounts {
        pair_windows_per_step: n - 1,
        entangling_gates_per_step: 2 * (n - 1),
        steps,
    };
    finish_preparation(params, psi, Some(counts), tol)
}

fn finish_preparation(
    params: &ModelParams,
    psi: StateVector,
    gate_counts: Option<DigitalGateCounts>,
    tol: f64,
) -> Result<PreparedState> {
    let target = HamiltonianTerms::mass_term(params.n_sites, params.mass)
        .add(&HamiltonianTerms::hopping_term(params.n_sites, params.w))?;
    let action = HamiltonianAction::new(&target)?;
    let energy = action.expectation(&psi);
    let fidelity = if params.n_sites <= FIDELITY_ORACLE_MAX_SITES {
        let gs = ground_state_in_sector(&target, 0, tol.min(1e-9))?;
        Some(gs.state.inner(&psi).norm_sqr())
    } else {
        None
    };
    Ok(PreparedState {
        state: psi,
        energy,
        fidelity,
        gate_counts,
    })
}

/// Quench the prepared state with the electric coupling switched on and
/// record `κ(t) = -ln L(t) / (aN)` on the grid (times in absolute units;
/// the series is labeled in `mt`).
pub fn quench_run(
    initial: &StateVector,
    ls: &LatticeSpacing,
    times: &[f64],
    tol: f64,
) -> Result<TimeSeries> {
    let params = ls.model_params(initial.n_sites())?;
    let terms = build_hamiltonian(&params)?;
    let evolver = Evolver::new(&terms, tol)?;
    let mut series = TimeSeries::new("kappa", "mt");
    series.n_traj = None;
    let mut psi = initial.clone();
    let mut t_now = 0.0;
    for &t in times {
        if t < t_now {
            return Err(Error::param("times", "must be nondecreasing"));
        }
        evolver.evolve(&mut psi, t - t_now)?;
        t_now = t;
        let vp = vacuum_persistence(initial, &psi)?;
        series
            .times
            .push(ls.mass * t);
        series
            .values
            .push(rate_function_kappa(vp.loschmidt, ls.a, initial.n_sites())?);
    }
    Ok(series)
}

/// Ordinary-least-squares fit of `κ_N = κ_∞ + Σ_k c_k / N^k` over the
/// requested correction orders.
#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationFit {
    pub kappa_inf: f64,
    /// `(order, coefficient)` pairs, in the order requested.
    pub coefficients: Vec<(u32, f64)>,
    /// Euclidean norm of the fit residual.
    pub residual: f64,
    /// Sizes that entered the fit.
    pub sizes: Vec<usize>,
}

/// Fit `κ_∞` from finite-size data. `orders ⊆ {1, 2}` selects the correction
/// terms; the fit needs at least one more distinct size than parameters.
pub fn extrapolate_thermodynamic(
    data: &[(usize, f64)],
    orders: &[u32],
) -> Result<ExtrapolationFit> {
    if orders.iter().any(|&o| o == 0 || o > 2) {
        return Err(Error::Fit("correction orders must be within {1, 2}".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(n, _) in data {
        if n == 0 {
            return Err(Error::Fit("sizes must be positive".into()));
        }
        seen.insert(n);
    }
    let n_params = 1 + orders.len();
    if seen.len() < n_params + 1 {
        return Err(Error::Fit(format!(
            "need at least {} distinct sizes for {} parameters, got {}",
            n_params + 1,
            n_params,
            seen.len()
        )));
    }
    let rows = data.len();
    let design = nalgebra::DMatrix::<f64>::from_fn(rows, n_params, |r, c| {
        if c == 0 {
            1.0
        } else {
            (data[r].0 as f64).powi(-(orders[c - 1] as i32))
        }
    });
    let rhs = nalgebra::DVector::<f64>::from_fn(rows, |r, _| data[r].1);
    let svd = design.clone().svd(true, true);
    if svd.rank(1e-12) < n_params {
        return Err(Error::Fit("rank-deficient design matrix".into()));
    }
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let residual = (&design * &sol - &rhs).norm();
    Ok(ExtrapolationFit {
        kappa_inf: sol[0],
        coefficients: orders
            .iter()
            .enumerate()
            .map(|(i, &o)| (o, sol[i + 1]))
            .collect(),
        residual,
        sizes: data.iter().map(|d| d.0).collect(),
    })
}

/// Extrapolation of one time point: the `1/N` fit, the `1/N + 1/N²` fit when
/// enough sizes exist, and a stability flag.
#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationRecord {
    pub t: f64,
    pub fit_order1: ExtrapolationFit,
    pub fit_order12: Option<ExtrapolationFit>,
    /// Set when adding the `1/N²` term moves `κ_∞` by more than 5%.
    pub unstable: bool,
}

/// How the sweep prepares the pre-quench state at each `(a, N)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preparation {
    /// Sector-restricted eigensolve (the oracle; fidelity not reported).
    ExactGroundState,
    /// Ramped evolution, reporting the achieved ground-state fidelity.
    Adiabatic { ramp_time: f64, ramp_steps: usize },
}

/// Preparation bookkeeping for one system size.
#[derive(Debug, Clone, Serialize)]
pub struct PrepInfo {
    pub n_sites: usize,
    /// Ground-state fidelity of the ramped state (None on the exact path or
    /// above the oracle size limit).
    pub fidelity: Option<f64>,
    /// Entangling windows per Trotter step a digital preparation would use.
    pub pair_windows_per_step: usize,
    /// Entangling gates per Trotter step (two per window).
    pub entangling_gates_per_step: usize,
}

/// All results at one lattice spacing.
#[derive(Debug, Clone, Serialize)]
pub struct SpacingResult {
    pub a: f64,
    pub m_over_w: f64,
    /// `(N, κ(t) series)` per system size.
    pub curves: Vec<(usize, TimeSeries)>,
    pub extrapolations: Vec<ExtrapolationRecord>,
    pub preparation: Vec<PrepInfo>,
    pub warnings: Vec<String>,
}

/// Sweep configuration: sizes and spacings, a common time grid (absolute
/// units), and the time points at which to extrapolate.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub g_over_m: f64,
    pub mass: f64,
    pub spacings: Vec<f64>,
    pub sizes: Vec<usize>,
    pub times: Vec<f64>,
    pub fit_times: Vec<f64>,
    pub tol: f64,
    pub preparation: Preparation,
}

/// Relative change of `κ_∞` between fit orders above which a time point is
/// flagged unstable.
const FIT_STABILITY_THRESHOLD: f64 = 0.05;

/// Run the full size-and-spacing sweep: prepare, quench, extrapolate.
///
/// Sizes at a fixed spacing run in parallel; aggregation order is fixed by
/// the input lists.
pub fn continuum_sweep(cfg: &SweepConfig) -> Result<Vec<SpacingResult>> {
    if cfg.sizes.is_empty() || cfg.spacings.is_empty() {
        return Err(Error::param("sweep", "needs at least one size and spacing"));
    }
    cfg.spacings
        .iter()
        .map(|&a| {
            let ls = LatticeSpacing {
                a,
                g: cfg.g_over_m * cfg.mass,
                mass: cfg.mass,
            };
            let (w, _, _) = ls.couplings()?;
            let per_size: Vec<(usize, TimeSeries, PrepInfo)> = cfg
                .sizes
                .par_iter()
                .map(|&n| -> Result<(usize, TimeSeries, PrepInfo)> {
                    let params = ls.model_params(n)?;
                    let (initial, fidelity) = match cfg.preparation {
                        Preparation::ExactGroundState => {
                            let g0_target = HamiltonianTerms::mass_term(n, params.mass)
                                .add(&HamiltonianTerms::hopping_term(n, params.w))?;
                            let gs =
                                ground_state_in_sector(&g0_target, 0, cfg.tol.min(1e-9))?;
                            (gs.state, None)
                        }
                        Preparation::Adiabatic {
                            ramp_time,
                            ramp_steps,
                        } => {
                            let ramp = RampSchedule::linear(ramp_time, ramp_steps)?;
                            let prep = adiabatic_prepare(&params, &ramp, cfg.tol)?;
                            (prep.state, prep.fidelity)
                        }
                    };
                    let info = PrepInfo {
                        n_sites: n,
                        fidelity,
                        pair_windows_per_step: n - 1,
                        entangling_gates_per_step: 2 * (n - 1),
                    };
                    Ok((n, quench_run(&initial, &ls, &cfg.times, cfg.tol)?, info))
                })
                .collect::<Result<_>>()?;
            let preparation: Vec<PrepInfo> =
                per_size.iter().map(|(_, _, i)| i.clone()).collect();
            let curves: Vec<(usize, TimeSeries)> =
                per_size.into_iter().map(|(n, s, _)| (n, s)).collect();

            let mut warnings = Vec::new();
            let mut extrapolations = Vec::new();
            if cfg.sizes.len() < 3 {
                warnings.push(format!(
                    "only {} size(s): raw curves passed through without extrapolation",
                    cfg.sizes.len()
                ));
            } else {
                for &t_fit in &cfg.fit_times {
                    let mt = ls.mass * t_fit;
                    let data: Vec<(usize, f64)> = curves
                        .iter()
                        .map(|(n, series)| {
                            let idx = nearest_index(&series.times, mt)?;
                            Ok((*n, series.values[idx]))
                        })
                        .collect::<Result<_>>()?;
                    let fit1 = extrapolate_thermodynamic(&data, &[1])?;
                    let fit12 = if cfg.sizes.len() >= 4 {
                        Some(extrapolate_thermodynamic(&data, &[1, 2])?)
                    } else {
                        None
                    };
                    let unstable = fit12.as_ref().is_some_and(|f12| {
                        (fit1.kappa_inf - f12.kappa_inf).abs()
                            > FIT_STABILITY_THRESHOLD * f12.kappa_inf.abs().max(1e-12)
                    });
                    extrapolations.push(ExtrapolationRecord {
                        t: mt,
                        fit_order1: fit1,
                        fit_order12: fit12,
                        unstable,
                    });
                }
            }
            Ok(SpacingResult {
                a,
                m_over_w: cfg.mass / w,
                curves,
                extrapolations,
                preparation,
                warnings,
            })
        })
        .collect()
}

fn nearest_index(times: &[f64], t: f64) -> Result<usize> {
    times
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (**a - t).abs().partial_cmp(&(**b - t).abs()).unwrap()
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::param("fit_times", "empty time grid"))
}
