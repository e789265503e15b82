//! Discretization error of the digital protocol: deviation of the Trotterized
//! particle density from the exact curve as the cycle length shrinks,
//! together with the commutator-based error bound.
//!
//!     cargo run --release --example trotter_convergence

use schwinger_sim::model::ModelParams;
use schwinger_sim::observables::ObservableKind;
use schwinger_sim::run::{exact_series, trotter_series};
use schwinger_sim::trotter::trotter_error_bound;

fn main() -> schwinger_sim::Result<()> {
    let params = ModelParams::new(10, 1.0, 1.0, 1.0).with_j0(16.0);
    println!("N = 10, m = J = w; deviation sampled at each schedule's cycle boundaries\n");
    println!("{:>10} {:>10} {:>12}", "T [1/w]", "cycles", "max |d nu|");
    for cycle_time in [1.5f64, 0.75, 0.5, 0.25, 0.125, 0.0625] {
        let n_cycles = (5.0 / cycle_time + 1e-9).floor() as usize;
        let times: Vec<f64> = (0..=n_cycles).map(|k| k as f64 * cycle_time).collect();
        let exact = exact_series(&params, &times, &times, "wt", &[ObservableKind::Nu], 1e-9)?
            .remove(0)
            .values;
        let trotter = trotter_series(
            &params,
            cycle_time,
            &times,
            &times,
            "wt",
            &[ObservableKind::Nu],
        )?
        .remove(0)
        .values;
        let dev = exact
            .iter()
            .zip(&trotter)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("{cycle_time:>10} {n_cycles:>10} {dev:>12.5}");
    }
    println!(
        "\nnote: per-bond window angle is wT, so cycles with wT near pi/2 swap whole \
         bonds and the protocol needs wT(N-1) well below 1 to track the flip-flop term."
    );

    let small = ModelParams::new(6, 1.0, 1.0, 1.0).with_j0(16.0);
    let bound = trotter_error_bound(&small, 1.0, 10)?;
    println!(
        "\ncommutator bound, N = 6, t = 1, 10 steps: |U_exact - U_sim| <= {bound:.3}"
    );
    Ok(())
}
