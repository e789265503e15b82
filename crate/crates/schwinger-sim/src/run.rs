//! Experiment orchestration: drive the solvers from a [`RunConfig`], emit
//! deterministic CSV tables plus a JSON manifest.
//!
//! Output bytes depend only on the configuration and seed — never on wall
//! time or worker count. The manifest additionally records timing and tool
//! provenance and is the only file that differs between identical runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{ExperimentKind, PreparationMode, RunConfig};
use crate::continuum::{self, SweepConfig};
use crate::engine::{evolve_exact, Evolver, StateVector};
use crate::error::{Error, Result};
use crate::gates::GateSequence;
use crate::model::{bare_vacuum, build_hamiltonian_full, gauss_field_profile, BasisState,
    HamiltonianTerms, ModelParams};
use crate::noise::{ensemble_average, EnsembleInput};
use crate::observables::{self, ObservableKind, TimeSeries};
use crate::oracle;
use crate::trotter::{compile_section1, compile_section2, ideal_states_on_grid, CycleTimings};

/// Version string baked in by the build script (`git describe` or "unknown").
pub const GIT_DESCRIBE: &str = env!("GIT_DESCRIBE");

#[derive(Debug, Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
    git_describe: &'static str,
}

fn tool_info() -> ToolInfo {
    ToolInfo {
        name: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        git_describe: GIT_DESCRIBE,
    }
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    tool: ToolInfo,
    kind: &'static str,
    seed: u64,
    /// Full configuration with every applied default echoed back.
    config: &'a RunConfig,
    warnings: &'a [String],
    outputs: &'a [String],
    extra: &'a BTreeMap<String, serde_json::Value>,
    wall_time_s: f64,
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub csv_paths: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Execute a validated configuration.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let started = Instant::now();
    let out_dir = config.resolve_out_dir();
    std::fs::create_dir_all(&out_dir)?;
    let mut warnings = Vec::new();
    let mut extra = BTreeMap::new();

    let csv_paths = match config.kind {
        ExperimentKind::Evolve | ExperimentKind::Entropy => {
            run_exact(config, &out_dir)?
        }
        ExperimentKind::Trotter => run_trotter(config, &out_dir, &mut warnings)?,
        ExperimentKind::Noise => run_noise(config, &out_dir, &mut warnings)?,
        ExperimentKind::Compare => run_compare(config, &out_dir, &mut warnings)?,
        ExperimentKind::Continuum => {
            run_continuum(config, &out_dir, &mut warnings, &mut extra)?
        }
    };

    let outputs: Vec<String> = csv_paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let manifest = RunManifest {
        tool: tool_info(),
        kind: config.kind.as_str(),
        seed: config.seed,
        config,
        warnings: &warnings,
        outputs: &outputs,
        extra: &extra,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let manifest_path = out_dir.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))? + "\n",
    )?;
    Ok(RunOutcome {
        out_dir,
        manifest_path,
        csv_paths,
        warnings,
    })
}

// ── experiment bodies ────────────────────────────────────────────────

/// Exact observable curves for a quench from the bare vacuum.
pub fn exact_series(
    params: &ModelParams,
    display_times: &[f64],
    abs_times: &[f64],
    unit: &str,
    observables: &[ObservableKind],
    tolerance: f64,
) -> Result<Vec<TimeSeries>> {
    let terms = crate::model::build_hamiltonian(params)?;
    let evolver = Evolver::new(&terms, tolerance)?;
    let psi0 = StateVector::basis(&bare_vacuum(params.n_sites)?);
    let mut psi = psi0.clone();
    let mut t_now = 0.0;
    let mut series: Vec<TimeSeries> = observables
        .iter()
        .map(|o| TimeSeries::new(o.name(), unit))
        .collect();
    for (&disp, &t) in display_times.iter().zip(abs_times) {
        if t < t_now {
            return Err(Error::param("times", "must be nondecreasing"));
        }
        evolver.evolve(&mut psi, t - t_now)?;
        t_now = t;
        for (slot, kind) in series.iter_mut().zip(observables) {
            slot.push(disp, kind.evaluate(&psi, &psi0)?);
        }
    }
    Ok(series)
}

/// Ideal Trotter observable curves on a grid (partial final cycle per point).
pub fn trotter_series(
    params: &ModelParams,
    cycle_time_abs: f64,
    display_times: &[f64],
    abs_times: &[f64],
    unit: &str,
    observables: &[ObservableKind],
) -> Result<Vec<TimeSeries>> {
    let psi0 = StateVector::basis(&bare_vacuum(params.n_sites)?);
    let states = ideal_states_on_grid(params, cycle_time_abs, abs_times, &psi0)?;
    let mut series: Vec<TimeSeries> = observables
        .iter()
        .map(|o| TimeSeries::new(o.name(), unit))
        .collect();
    for (ti, psi) in states.iter().enumerate() {
        for (slot, kind) in series.iter_mut().zip(observables) {
            slot.push(display_times[ti], kind.evaluate(psi, &psi0)?);
        }
    }
    Ok(series)
}

fn model_and_grid(config: &RunConfig) -> Result<(ModelParams, Vec<f64>, Vec<f64>)> {
    let params = config
        .model
        .clone()
        .ok_or_else(|| Error::Config("a [model] section is required".into()))?;
    let display = config.grid.points();
    let abs = config.grid.absolute_points(&params)?;
    Ok((params, display, abs))
}

fn run_exact(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (params, display, abs) = model_and_grid(config)?;
    let series = exact_series(
        &params,
        &display,
        &abs,
        config.grid.unit.label(),
        &config.observable_set(),
        config.tolerance,
    )?;
    let mut paths = Vec::new();
    for s in &series {
        paths.push(write_series_csv(out_dir, s)?);
    }
    // electric-field profile of the final state, for inspection
    paths.push(write_field_csv(out_dir, &params, &abs, config.tolerance)?);
    Ok(paths)
}

fn run_trotter(
    config: &RunConfig,
    out_dir: &Path,
    warnings: &mut Vec<String>,
) -> Result<Vec<PathBuf>> {
    let (params, display, abs) = model_and_grid(config)?;
    let cycle_abs = config
        .grid
        .to_absolute(config.cycle_time()?, &params)?;
    let sched = crate::trotter::TrotterSchedule::new(&params, cycle_abs, 0)?;
    warnings.extend(sched.warnings.iter().cloned());
    let series = trotter_series(
        &params,
        cycle_abs,
        &display,
        &abs,
        config.grid.unit.label(),
        &config.observable_set(),
    )?;
    series
        .iter()
        .map(|s| write_series_csv(out_dir, s))
        .collect()
}

fn run_noise(
    config: &RunConfig,
    out_dir: &Path,
    warnings: &mut Vec<String>,
) -> Result<Vec<PathBuf>> {
    let (params, display, abs) = model_and_grid(config)?;
    let cycle_abs = config.grid.to_absolute(config.cycle_time()?, &params)?;
    let sched = crate::trotter::TrotterSchedule::new(&params, cycle_abs, 0)?;
    warnings.extend(sched.warnings.iter().cloned());
    let mut np = config
        .noise
        .clone()
        .ok_or_else(|| Error::Config("a [noise] section is required".into()))?;
    np.seed = config.seed;
    let psi0 = StateVector::basis(&bare_vacuum(params.n_sites)?);
    let input = EnsembleInput {
        params: &params,
        cycle_time: cycle_abs,
        times: &abs,
        psi0: &psi0,
        observables: &config.observable_set(),
        time_unit: config.grid.unit.label(),
    };
    let mut series = ensemble_average(&input, &np)?;
    for s in &mut series {
        s.times = display.clone();
    }
    series
        .iter()
        .map(|s| write_series_csv(out_dir, s))
        .collect()
}

fn run_compare(
    config: &RunConfig,
    out_dir: &Path,
    warnings: &mut Vec<String>,
) -> Result<Vec<PathBuf>> {
    let (params, display, abs) = model_and_grid(config)?;
    let observables = config.observable_set();
    let exact = exact_series(
        &params,
        &display,
        &abs,
        config.grid.unit.label(),
        &observables,
        config.tolerance,
    )?;
    let cycle_times = config.cycle_times();
    let mut trotter_cols: Vec<(f64, Vec<TimeSeries>)> = Vec::new();
    for &ct in &cycle_times {
        let cycle_abs = config.grid.to_absolute(ct, &params)?;
        let sched = crate::trotter::TrotterSchedule::new(&params, cycle_abs, 0)?;
        warnings.extend(sched.warnings.iter().cloned());
        trotter_cols.push((
            ct,
            trotter_series(
                &params,
                cycle_abs,
                &display,
                &abs,
                config.grid.unit.label(),
                &observables,
            )?,
        ));
    }
    let mut noisy_cols: Vec<(f64, Vec<TimeSeries>)> = Vec::new();
    if let Some(noise_cfg) = &config.noise {
        let mut np = noise_cfg.clone();
        np.seed = config.seed;
        let psi0 = StateVector::basis(&bare_vacuum(params.n_sites)?);
        for &ct in &cycle_times {
            let cycle_abs = config.grid.to_absolute(ct, &params)?;
            let input = EnsembleInput {
                params: &params,
                cycle_time: cycle_abs,
                times: &abs,
                psi0: &psi0,
                observables: &observables,
                time_unit: config.grid.unit.label(),
            };
            noisy_cols.push((ct, ensemble_average(&input, &np)?));
        }
    }

    let mut paths = Vec::new();
    for (oi, kind) in observables.iter().enumerate() {
        let mut header = vec![config.grid.unit.label().to_string(), "exact".to_string()];
        for (ct, _) in &trotter_cols {
            header.push(format!("trotter_T{ct}"));
        }
        for (ct, _) in &noisy_cols {
            header.push(format!("noisy_T{ct}"));
            header.push(format!("noisy_T{ct}_stderr"));
        }
        let mut rows = Vec::with_capacity(display.len());
        for ti in 0..display.len() {
            let mut row = vec![display[ti], exact[oi].values[ti]];
            for (_, cols) in &trotter_cols {
                row.push(cols[oi].values[ti]);
            }
            for (_, cols) in &noisy_cols {
                row.push(cols[oi].values[ti]);
                row.push(cols[oi].stderr.as_ref().map_or(0.0, |e| e[ti]));
            }
            rows.push(row);
        }
        let path = out_dir.join(format!("compare_{}.csv", kind.name()));
        write_table_csv(&path, &header, &rows)?;
        paths.push(path);
    }
    Ok(paths)
}

fn run_continuum(
    config: &RunConfig,
    out_dir: &Path,
    warnings: &mut Vec<String>,
    extra: &mut BTreeMap<String, serde_json::Value>,
) -> Result<Vec<PathBuf>> {
    let c = config
        .continuum
        .clone()
        .ok_or_else(|| Error::Config("a [continuum] section is required".into()))?;
    let display = config.grid.points();
    // grid is in mt; absolute times are mt / m
    let times: Vec<f64> = display.iter().map(|x| x / c.mass).collect();
    let fit_times: Vec<f64> = c.fit_times.iter().map(|x| x / c.mass).collect();
    let sweep = SweepConfig {
        g_over_m: c.g_over_m,
        mass: c.mass,
        spacings: c.m_over_w.iter().map(|mw| mw / (2.0 * c.mass)).collect(),
        sizes: c.sizes.clone(),
        times,
        fit_times,
        tol: config.tolerance,
        preparation: match c.preparation {
            PreparationMode::Exact => continuum::Preparation::ExactGroundState,
            PreparationMode::Adiabatic => continuum::Preparation::Adiabatic {
                ramp_time: c.ramp_time / c.mass,
                ramp_steps: c.ramp_steps,
            },
        },
    };
    let results = continuum::continuum_sweep(&sweep)?;
    let mut paths = Vec::new();
    let mut summary = Vec::new();
    for res in &results {
        let subdir = out_dir.join(format!("mw{}", trim_float(res.m_over_w)));
        std::fs::create_dir_all(&subdir)?;
        warnings.extend(res.warnings.iter().cloned());
        for (n, series) in &res.curves {
            let path = subdir.join(format!("kappa_N{n}.csv"));
            let rows: Vec<Vec<f64>> = series
                .times
                .iter()
                .zip(&series.values)
                .map(|(&t, &v)| vec![t, v])
                .collect();
            write_table_csv(&path, &["mt".to_string(), "kappa".to_string()], &rows)?;
            paths.push(path);
        }
        for rec in &res.extrapolations {
            let path = subdir.join(format!("extrap_mt{}.json", trim_float(rec.t)));
            std::fs::write(
                &path,
                serde_json::to_string_pretty(rec).map_err(|e| Error::Config(e.to_string()))?
                    + "\n",
            )?;
            paths.push(path);
        }
        summary.push(serde_json::json!({
            "m_over_w": res.m_over_w,
            "a": res.a,
            "sizes": res.curves.iter().map(|c| c.0).collect::<Vec<_>>(),
            "unstable_fit_points": res
                .extrapolations
                .iter()
                .filter(|r| r.unstable)
                .map(|r| r.t)
                .collect::<Vec<_>>(),
            "preparation": res.preparation,
        }));
    }
    extra.insert("spacings".into(), serde_json::Value::Array(summary));
    Ok(paths)
}

fn write_field_csv(
    out_dir: &Path,
    params: &ModelParams,
    abs_times: &[f64],
    tol: f64,
) -> Result<PathBuf> {
    let terms = crate::model::build_hamiltonian(params)?;
    let psi0 = StateVector::basis(&bare_vacuum(params.n_sites)?);
    let last = abs_times.last().copied().unwrap_or(0.0);
    let psi = evolve_exact(&terms, &psi0, last, tol)?;
    let field = observables::electric_field_expectation(&psi, params.eps0);
    let header: Vec<String> = std::iter::once("link".to_string())
        .chain(std::iter::once("efield".to_string()))
        .collect();
    let rows: Vec<Vec<f64>> = field
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![(i + 1) as f64, v])
        .collect();
    let path = out_dir.join("efield_final.csv");
    write_table_csv(&path, &header, &rows)?;
    Ok(path)
}

// ── output helpers ───────────────────────────────────────────────────

/// `{name}.csv` with header `{unit},{name}[,stderr,n_traj]`.
pub fn write_series_csv(dir: &Path, series: &TimeSeries) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", series.name));
    let mut text = String::new();
    let has_err = series.stderr.is_some();
    if has_err {
        writeln!(
            text,
            "{},{},stderr,n_traj",
            series.time_unit, series.name
        )
        .unwrap();
    } else {
        writeln!(text, "{},{}", series.time_unit, series.name).unwrap();
    }
    for (i, (&t, &v)) in series.times.iter().zip(&series.values).enumerate() {
        if let Some(err) = &series.stderr {
            writeln!(
                text,
                "{t},{v},{},{}",
                err[i],
                series.n_traj.unwrap_or(1)
            )
            .unwrap();
        } else {
            writeln!(text, "{t},{v}").unwrap();
        }
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Generic numeric table with full round-trip float formatting.
pub fn write_table_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

// ── self test ────────────────────────────────────────────────────────

/// One verification check of the `selftest` subcommand.
#[derive(Debug)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Fast identity and oracle checks (a few seconds), exercising the same
/// dual-route comparisons as the test suite.
pub fn selftest() -> Vec<SelfCheck> {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, res: Result<(f64, f64)>| {
        match res {
            Ok((value, bound)) => checks.push(SelfCheck {
                name,
                passed: value <= bound,
                detail: format!("{value:.3e} (allowed {bound:.1e})"),
            }),
            Err(e) => checks.push(SelfCheck {
                name,
                passed: false,
                detail: e.to_string(),
            }),
        };
    };

    push("section1-vs-dense-expm", section1_check());
    push("section2-pair-identity", section2_check());
    push("krylov-vs-dense-expm", krylov_check());
    push("gauss-diagonal-identity", gauss_diag_check());
    push("entropy-equivalence", entropy_equivalence_check());
    push("extrapolation-recovery", extrapolation_check());
    checks
}

fn section1_check() -> Result<(f64, f64)> {
    let params = ModelParams::new(4, 1.0, 1.0, 1.0).with_j0(16.0);
    let cycle_time = 0.5;
    let timings = CycleTimings::for_duration(&params, cycle_time)?;
    let mut seq = GateSequence::new(4, params.j0);
    seq.gates.extend(compile_section1(&params, &timings));
    let compiled = oracle::sequence_unitary(&seq)?;
    let h_zz = oracle::dense_hamiltonian(&HamiltonianTerms::zz_coulomb(4, params.j))?;
    let exact = oracle::dense_expm(&h_zz, cycle_time);
    Ok((oracle::operator_norm(&(compiled - exact)), 1e-10))
}

fn section2_check() -> Result<(f64, f64)> {
    let params = ModelParams::new(2, 1.0, 0.0, 0.0).with_j0(2.0);
    let cycle_time = 0.2;
    let timings = CycleTimings::for_duration(&params, cycle_time)?;
    let mut seq = GateSequence::new(2, params.j0);
    seq.gates.extend(compile_section2(&params, &timings));
    let compiled = oracle::sequence_unitary(&seq)?;
    let h_pm = oracle::dense_hamiltonian(&HamiltonianTerms::hopping_term(2, params.j0))?;
    let exact = oracle::dense_expm(&h_pm, timings.dt_ii);
    Ok((oracle::operator_norm(&(compiled - exact)), 1e-12))
}

fn krylov_check() -> Result<(f64, f64)> {
    let params = ModelParams::new(4, 1.0, 1.0, 1.0);
    let terms = crate::model::build_hamiltonian(&params)?;
    let tol = 1e-9;
    let psi0 = StateVector::basis(&bare_vacuum(4)?);
    let psi = evolve_exact(&terms, &psi0, 1.0, tol)?;
    let dense = oracle::dense_hamiltonian(&terms)?;
    let u = oracle::dense_expm(&dense, 1.0);
    let expected: Vec<_> = (0..16)
        .map(|r| {
            (0..16)
                .map(|c| u[(r, c)] * psi0.amplitudes()[c])
                .sum::<num_complex::Complex64>()
        })
        .collect();
    let dist = psi
        .amplitudes()
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((dist, tol))
}

fn gauss_diag_check() -> Result<(f64, f64)> {
    let params = ModelParams::new(6, 1.0, 0.8, 0.0);
    let terms = build_hamiltonian_full(&params)?;
    let mut worst = 0.0f64;
    for idx in 0..(1usize << 6) {
        let s = BasisState::from_index(6, idx);
        let mut diag = terms.constant;
        for &(a, b, c) in &terms.zz_pairs {
            diag += c * f64::from(s.spin(a) * s.spin(b));
        }
        for &(a, c) in &terms.z_fields {
            diag += c * f64::from(s.spin(a));
        }
        let field: f64 = gauss_field_profile(&s, 0)
            .links
            .iter()
            .map(|&l| (l * l) as f64)
            .sum();
        worst = worst.max((diag - params.j * field).abs());
    }
    Ok((worst, 1e-12))
}

fn entropy_equivalence_check() -> Result<(f64, f64)> {
    let params = ModelParams::new(6, 1.0, 1.0, 0.7);
    let terms = crate::model::build_hamiltonian(&params)?;
    let psi0 = StateVector::basis(&bare_vacuum(6)?);
    let psi = evolve_exact(&terms, &psi0, 1.9, 1e-10)?;
    let spin = observables::half_chain_entropy(&psi, 3)?;
    let mut worst = 0.0f64;
    for side in [
        observables::BoundaryLinkSide::Left,
        observables::BoundaryLinkSide::Right,
    ] {
        let full = observables::extended_state_entropy(&psi, 3, 0, side)?;
        worst = worst.max((full - spin).abs());
    }
    Ok((worst, 1e-10))
}

fn extrapolation_check() -> Result<(f64, f64)> {
    let data: Vec<(usize, f64)> = [6usize, 8, 10, 12]
        .iter()
        .map(|&n| (n, 0.3 + 1.7 / n as f64))
        .collect();
    let fit = continuum::extrapolate_thermodynamic(&data, &[1])?;
    Ok((fit.residual.max((fit.kappa_inf - 0.3).abs()), 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for check in selftest() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn series_csv_format() {
        let mut s = TimeSeries::new("nu", "wt");
        s.push(0.0, 0.0);
        s.push(0.5, 0.25);
        let dir = std::env::temp_dir().join("schwinger-sim-test-csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = write_series_csv(&dir, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "wt,nu\n0,0\n0.5,0.25\n");
        std::fs::remove_dir_all(&dir).ok();
    }
}
