//! Half-chain entanglement growth after the vacuum quench: linear increase,
//! finite-size saturation, and suppression by the electric coupling.
//!
//!     cargo run --release --example entanglement_growth

use schwinger_sim::model::ModelParams;
use schwinger_sim::observables::ObservableKind;
use schwinger_sim::run::exact_series;

fn main() -> schwinger_sim::Result<()> {
    let times: Vec<f64> = (0..=48).map(|k| k as f64 * 0.25).collect();
    let mass = 0.5;

    println!("free case (J = 0), m/w = {mass}: S(t) per system size");
    let mut curves = Vec::new();
    for n in [8usize, 10, 12] {
        let params = ModelParams::new(n, 1.0, 0.0, mass);
        let s = exact_series(
            &params,
            &times,
            &times,
            "wt",
            &[ObservableKind::Entropy { cut: n / 2 }],
            1e-9,
        )?
        .remove(0);
        curves.push((n, s.values));
    }
    println!("{:>6} {:>8} {:>8} {:>8}", "wt", "N=8", "N=10", "N=12");
    for (i, &t) in times.iter().enumerate().step_by(4) {
        println!(
            "{t:6.2} {:8.4} {:8.4} {:8.4}",
            curves[0].1[i], curves[1].1[i], curves[2].1[i]
        );
    }

    let params = ModelParams::new(12, 1.0, 0.2, mass);
    let s_coupled = exact_series(
        &params,
        &times,
        &times,
        "wt",
        &[ObservableKind::Entropy { cut: 6 }],
        1e-9,
    )?
    .remove(0);
    let at = times.iter().position(|&t| (t - 6.0).abs() < 1e-9).unwrap();
    println!(
        "\nJ/w = 0.2 at N = 12: S(wt=6) = {:.4} vs {:.4} for J = 0 \
         (string tension slows entanglement growth beyond t ~ 1/J)",
        s_coupled.values[at], curves[2].1[at]
    );
    Ok(())
}
