//! Shared helpers for the integration suites: seeded random states, peak
//! detection with parabolic refinement, and simple regression utilities.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schwinger_sim::engine::StateVector;

/// Random normalized state supported on one magnetization sector.
pub fn random_sector_state(n_sites: usize, m: i64, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n_sites;
    let amps: Vec<Complex64> = (0..dim)
        .map(|i| {
            let mag = 2 * (i.count_ones() as i64) - n_sites as i64;
            if mag == m {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    StateVector::from_amplitudes(n_sites, amps).expect("sector must be nonempty")
}

/// Random normalized state over the full space.
pub fn random_state(n_sites: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n_sites;
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    StateVector::from_amplitudes(n_sites, amps).unwrap()
}

pub fn state_distance(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct Peak {
    pub t: f64,
    pub value: f64,
}

/// Interior local maxima above `min_rise` over their neighbours, with the
/// position refined by the parabola through the three bracketing samples.
pub fn local_maxima(times: &[f64], values: &[f64], min_rise: f64) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b > a && b >= c && (b - a.min(c)) >= min_rise {
            let denom = a - 2.0 * b + c;
            let (t, v) = if denom.abs() > 1e-300 {
                let h = times[i + 1] - times[i];
                let shift = 0.5 * (a - c) / denom;
                (
                    times[i] + shift * h,
                    b - 0.25 * (a - c) * shift,
                )
            } else {
                (times[i], b)
            };
            peaks.push(Peak { t, value: v });
        }
    }
    peaks
}

/// Least-squares line fit; returns `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Uniform grid `0, step, …, stop`.
pub fn grid(stop: f64, step: f64) -> Vec<f64> {
    let n = (stop / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}
