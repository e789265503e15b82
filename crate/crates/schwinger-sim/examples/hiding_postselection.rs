//! Error-detection bookkeeping: Monte Carlo statistics of hide/unhide pulse
//! failures, and postselection on the conserved total magnetization.
//!
//!     cargo run --release --example hiding_postselection

use schwinger_sim::gates::{GateOp, GateSequence};
use schwinger_sim::model::{bare_vacuum, BasisState, ModelParams};
use schwinger_sim::noise::{hiding_failure_monte_carlo, postselect_magnetization};
use schwinger_sim::trotter::TrotterSchedule;

fn main() -> schwinger_sim::Result<()> {
    // single hide/unhide step on N ions: undetected rate ~ p^2 N
    let n = 10;
    let p_fail = 0.05;
    let mut step = GateSequence::new(n, 1.0);
    let all: Vec<usize> = (1..=n).collect();
    step.gates.push(GateOp::hide(all.clone()));
    step.gates.push(GateOp::unhide(all));
    let stats = hiding_failure_monte_carlo(&step, p_fail, 42, 100_000)?;
    println!("single step, {n} ions, p = {p_fail}:");
    println!(
        "  detected {:.4} ± {:.4}   undetected {:.5} ± {:.5} (p²N = {:.5})   clean {:.4}",
        stats.detected_rate,
        stats.detected_se,
        stats.undetected_rate,
        stats.undetected_se,
        p_fail * p_fail * n as f64,
        stats.survival_rate
    );

    // a full compiled cycle has one step per entangling window
    let params = ModelParams::new(6, 1.0, 1.0, 1.0).with_j0(16.0);
    let schedule = TrotterSchedule::new(&params, 0.5, 1)?;
    let cycle_stats = hiding_failure_monte_carlo(&schedule.cycle, 0.01, 7, 100_000)?;
    println!(
        "\nfull cycle (N = 6, {} hide/unhide steps), p = 0.01: kept fraction {:.4}",
        cycle_stats.n_steps,
        1.0 - cycle_stats.detected_rate
    );

    // magnetization postselection rejects single spin flips
    let vac = bare_vacuum(6)?;
    let mut flipped = vac.spins().to_vec();
    flipped[2] = -flipped[2];
    let outcomes = vec![
        vac.clone(),
        BasisState::new(flipped)?,
        BasisState::new(vec![-1, 1, 1, -1, 1, -1])?,
        vac,
    ];
    let (kept, acceptance) = postselect_magnetization(&outcomes, 0);
    println!(
        "\npostselection on M = 0: kept {}/{} outcomes (acceptance {acceptance:.2})",
        kept.len(),
        outcomes.len()
    );
    Ok(())
}
