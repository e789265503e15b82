//! Declarative run configuration.
//!
//! Runs are described by a TOML file (comments and nesting supported);
//! unknown keys are hard errors. The time grid is dimensionless — `wt` or
//! `mt` per the `grid.unit` field — and converted to absolute times using
//! the model couplings. A handful of flags (`--seed`, `--out`, `--threads`)
//! override file values; every default that influenced the run is echoed
//! into the emitted manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::noise::NoiseParams;
use crate::observables::ObservableKind;

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "SCHWINGER_SIM_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Exact Krylov evolution from the bare vacuum.
    Evolve,
    /// Ideal (noise-free) Trotterized evolution.
    Trotter,
    /// Noisy trajectory ensemble over the Trotter protocol.
    Noise,
    /// Exact evolution tracking the half-chain entropy.
    Entropy,
    /// Size-and-spacing sweep with thermodynamic-limit extrapolation.
    Continuum,
    /// Joint exact / Trotter / noisy comparison table.
    Compare,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Trotter => "trotter",
            ExperimentKind::Noise => "noise",
            ExperimentKind::Entropy => "entropy",
            ExperimentKind::Continuum => "continuum",
            ExperimentKind::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// Times are `w · t`.
    Wt,
    /// Times are `m · t`.
    Mt,
}

impl TimeUnit {
    pub fn label(&self) -> &'static str {
        match self {
            TimeUnit::Wt => "wt",
            TimeUnit::Mt => "mt",
        }
    }
}

/// Uniform dimensionless time grid `start, start+step, …, ≤ stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub unit: TimeUnit,
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Config("grid.step must be > 0".into()));
        }
        if self.stop < self.start {
            return Err(Error::Config("grid.stop must be ≥ grid.start".into()));
        }
        if self.start < 0.0 {
            return Err(Error::Config("grid.start must be ≥ 0".into()));
        }
        Ok(())
    }

    /// Dimensionless grid points.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }

    /// Convert a dimensionless value to absolute time for `params`.
    pub fn to_absolute(&self, x: f64, params: &ModelParams) -> Result<f64> {
        match self.unit {
            TimeUnit::Wt => Ok(x / params.w),
            TimeUnit::Mt => {
                if params.mass <= 0.0 {
                    return Err(Error::Config(
                        "grid.unit = \"mt\" requires mass > 0".into(),
                    ));
                }
                Ok(x / params.mass)
            }
        }
    }

    pub fn absolute_points(&self, params: &ModelParams) -> Result<Vec<f64>> {
        self.points()
            .into_iter()
            .map(|x| self.to_absolute(x, params))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    /// Cycle length in grid units (e.g. `0.75` means `T = 0.75/w`).
    #[serde(default)]
    pub cycle_time: Option<f64>,
    /// For `compare`: one Trotter column per entry.
    #[serde(default)]
    pub cycle_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    /// Cut position; defaults to the half chain.
    #[serde(default)]
    pub cut: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreparationMode {
    /// Sector-restricted eigensolve (the oracle path).
    Exact,
    /// Ramped evolution `H_m + f(t) H_±` on the exact integrator.
    Adiabatic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumConfig {
    pub g_over_m: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Spacings expressed as `m/w = 2am` (one sweep per entry).
    pub m_over_w: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Times (grid units) at which to extrapolate `N → ∞`.
    pub fit_times: Vec<f64>,
    #[serde(default = "default_preparation")]
    pub preparation: PreparationMode,
    /// Ramp length (grid units) for the adiabatic mode.
    #[serde(default = "default_ramp_time")]
    pub ramp_time: f64,
    #[serde(default = "default_ramp_steps")]
    pub ramp_steps: usize,
}

fn default_mass() -> f64 {
    1.0
}

fn default_preparation() -> PreparationMode {
    PreparationMode::Exact
}

fn default_ramp_time() -> f64 {
    50.0
}

fn default_ramp_steps() -> usize {
    500
}

/// One complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (0 = library default). Outputs never depend on it.
    #[serde(default)]
    pub threads: usize,
    /// Optional label tying this run to a bundled reproduction preset.
    #[serde(default)]
    pub figure: Option<String>,
    /// Evolution tolerance for exact propagation.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub model: Option<ModelParams>,
    pub grid: GridConfig,
    #[serde(default)]
    pub observables: Option<Vec<ObservableKind>>,
    #[serde(default)]
    pub trotter: Option<TrotterConfig>,
    #[serde(default)]
    pub noise: Option<NoiseParams>,
    #[serde(default)]
    pub entropy: Option<EntropyConfig>,
    #[serde(default)]
    pub continuum: Option<ContinuumConfig>,
}

fn default_tolerance() -> f64 {
    1e-9
}

/// Flag-level overrides applied after the file is parsed.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Load, override, validate.
pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &overrides.out_dir {
        cfg.out_dir = Some(out.clone());
    }
    if let Some(threads) = overrides.threads {
        cfg.threads = threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be > 0".into()));
        }
        let model = || -> Result<&ModelParams> {
            self.model
                .as_ref()
                .ok_or_else(|| Error::Config("a [model] section is required".into()))
        };
        match self.kind {
            ExperimentKind::Evolve | ExperimentKind::Entropy => {
                model()?.validate()?;
            }
            ExperimentKind::Trotter => {
                model()?.validate()?;
                self.require_cycle_time()?;
            }
            ExperimentKind::Noise => {
                model()?.validate()?;
                self.require_cycle_time()?;
                self.noise
                    .as_ref()
                    .ok_or_else(|| Error::Config("a [noise] section is required".into()))?
                    .validate()?;
            }
            ExperimentKind::Compare => {
                model()?.validate()?;
                let t = self.trotter.as_ref().ok_or_else(|| {
                    Error::Config("a [trotter] section is required".into())
                })?;
                let list_ok = t.cycle_times.as_ref().is_some_and(|v| !v.is_empty());
                if !list_ok && t.cycle_time.is_none() {
                    return Err(Error::Config(
                        "compare needs trotter.cycle_times (or cycle_time)".into(),
                    ));
                }
                if let Some(np) = &self.noise {
                    np.validate()?;
                }
            }
            ExperimentKind::Continuum => {
                let c = self.continuum.as_ref().ok_or_else(|| {
                    Error::Config("a [continuum] section is required".into())
                })?;
                if self.grid.unit != TimeUnit::Mt {
                    return Err(Error::Config(
                        "continuum runs use grid.unit = \"mt\"".into(),
                    ));
                }
                if c.sizes.is_empty() || c.m_over_w.is_empty() {
                    return Err(Error::Config(
                        "continuum.sizes and continuum.m_over_w must be nonempty".into(),
                    ));
                }
                if c.sizes.iter().any(|&n| n < 2 || n % 2 != 0) {
                    return Err(Error::Config(
                        "continuum.sizes must be even and ≥ 2".into(),
                    ));
                }
                if !(c.mass > 0.0) || !(c.g_over_m >= 0.0) {
                    return Err(Error::Config(
                        "continuum.mass must be > 0 and g_over_m ≥ 0".into(),
                    ));
                }
            }
        }
        if let Some(obs) = &self.observables {
            if obs.is_empty() {
                return Err(Error::Config("observables must be nonempty if given".into()));
            }
            if let Some(m) = &self.model {
                for o in obs {
                    if let ObservableKind::Entropy { cut } = o {
                        if *cut == 0 || *cut >= m.n_sites {
                            return Err(Error::Config(format!(
                                "entropy cut {cut} out of range for N={}",
                                m.n_sites
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn require_cycle_time(&self) -> Result<f64> {
        self.trotter
            .as_ref()
            .and_then(|t| t.cycle_time)
            .filter(|&t| t > 0.0)
            .ok_or_else(|| Error::Config("trotter.cycle_time must be set and > 0".into()))
    }

    /// Cycle time in grid units for single-schedule kinds.
    pub fn cycle_time(&self) -> Result<f64> {
        self.require_cycle_time()
    }

    /// Cycle-time list for `compare`.
    pub fn cycle_times(&self) -> Vec<f64> {
        match &self.trotter {
            Some(t) => t
                .cycle_times
                .clone()
                .or_else(|| t.cycle_time.map(|x| vec![x]))
                .unwrap_or_default(),
            None => Vec::new(),
        }
    }

    /// Observable set with kind-specific defaults applied.
    pub fn observable_set(&self) -> Vec<ObservableKind> {
        if let Some(obs) = &self.observables {
            return obs.clone();
        }
        match self.kind {
            ExperimentKind::Entropy => {
                let cut = self
                    .entropy
                    .as_ref()
                    .and_then(|e| e.cut)
                    .or_else(|| self.model.as_ref().map(|m| m.n_sites / 2))
                    .unwrap_or(1);
                vec![ObservableKind::Entropy { cut }, ObservableKind::Nu]
            }
            ExperimentKind::Compare => vec![ObservableKind::Nu],
            _ => vec![ObservableKind::Nu, ObservableKind::Lambda],
        }
    }

    /// Resolve the output directory: flag/file value, else the environment
    /// root, else `runs/<kind>`.
    pub fn resolve_out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        let root = std::env::var(OUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|_| PathBuf::from("runs"));
        root.join(self.kind.as_str())
    }
}
