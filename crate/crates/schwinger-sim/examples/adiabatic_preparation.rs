//! Adiabatic preparation of the interacting vacuum at g = 0: ramp the
//! hopping in from the Néel state and track the ground-state fidelity, on
//! both the exact integrator and the digital (gate-compiled) variant.
//!
//!     cargo run --release --example adiabatic_preparation

use schwinger_sim::continuum::{adiabatic_prepare, adiabatic_prepare_digital, RampSchedule};
use schwinger_sim::model::ModelParams;

fn main() -> schwinger_sim::Result<()> {
    let params = ModelParams::new(8, 1.0, 0.0, 1.0).with_j0(16.0);
    println!("ramp H(t) = H_m + f(t) H_pm from the Neel state, N = 8, m/w = 1\n");
    println!("{:>12} {:>10} {:>14}", "ramp time", "steps", "gs fidelity");
    for (ramp_time, steps) in [(5.0, 50), (12.5, 125), (25.0, 250), (50.0, 500)] {
        let ramp = RampSchedule::linear(ramp_time, steps)?;
        let prep = adiabatic_prepare(&params, &ramp, 1e-8)?;
        println!(
            "{ramp_time:>12} {steps:>10} {:>14.6}",
            prep.fidelity.unwrap_or(f64::NAN)
        );
    }

    let ramp = RampSchedule::linear(50.0, 500)?;
    let digital = adiabatic_prepare_digital(&params, &ramp, 0.1, 1e-8)?;
    let counts = digital.gate_counts.unwrap();
    println!(
        "\ndigital variant (T = 0.1/w per step): fidelity {:.6}, {} steps, \
         {} pair windows / {} entangling gates per step",
        digital.fidelity.unwrap_or(f64::NAN),
        counts.steps,
        counts.pair_windows_per_step,
        counts.entangling_gates_per_step
    );
    Ok(())
}
