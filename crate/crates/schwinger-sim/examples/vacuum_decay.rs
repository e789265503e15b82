//! Spontaneous pair creation out of the bare vacuum: exact evolution of the
//! particle density and the vacuum-persistence rate function.
//!
//!     cargo run --release --example vacuum_decay

use schwinger_sim::model::ModelParams;
use schwinger_sim::observables::ObservableKind;
use schwinger_sim::run::exact_series;

fn main() -> schwinger_sim::Result<()> {
    let n_sites = 12;
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    for j_over_w in [0.0, 1.0] {
        let params = ModelParams::new(n_sites, 1.0, j_over_w, 1.0);
        let series = exact_series(
            &params,
            &times,
            &times,
            "wt",
            &[ObservableKind::Nu, ObservableKind::Lambda],
            1e-9,
        )?;
        println!("N = {n_sites}, m/w = 1, J/w = {j_over_w}");
        println!("{:>6} {:>9} {:>9}", "wt", "nu", "lambda");
        for (i, &t) in times.iter().enumerate().step_by(4) {
            println!(
                "{t:6.2} {:9.4} {:9.4}",
                series[0].values[i], series[1].values[i]
            );
        }
        let peak = series[0].values.iter().cloned().fold(0.0, f64::max);
        println!("peak density: {peak:.4}\n");
    }
    Ok(())
}
