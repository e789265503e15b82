//! Compile one protocol cycle, print the gate list, and verify the two
//! compiled sections against dense matrix exponentials.
//!
//!     cargo run --release --example gate_compilation

use schwinger_sim::gates::GateSequence;
use schwinger_sim::model::{HamiltonianTerms, ModelParams};
use schwinger_sim::oracle;
use schwinger_sim::trotter::{
    compile_section1, compile_section2, CycleTimings, TrotterSchedule,
};

fn main() -> schwinger_sim::Result<()> {
    let params = ModelParams::new(4, 1.0, 1.0, 1.0).with_j0(8.0);
    let cycle_time = 0.5;
    let schedule = TrotterSchedule::new(&params, cycle_time, 1)?;
    println!("one compiled cycle (N = 4, T = 0.5/w, J0 = 8w):\n");
    print!("{}", schedule.cycle.to_text());
    for w in &schedule.warnings {
        println!("note: {w}");
    }

    // section identities against the dense oracle
    let timings = CycleTimings::for_duration(&params, cycle_time)?;
    let mut sec1 = GateSequence::new(4, params.j0);
    sec1.gates.extend(compile_section1(&params, &timings));
    let u1 = oracle::sequence_unitary(&sec1)?;
    let h_zz = oracle::dense_hamiltonian(&HamiltonianTerms::zz_coulomb(4, params.j))?;
    println!(
        "\nsection I  vs exp(-i H_ZZ T): operator-norm defect {:.3e}",
        oracle::operator_norm(&(u1 - oracle::dense_expm(&h_zz, cycle_time)))
    );

    let pair = ModelParams::new(2, 1.0, 0.0, 0.0).with_j0(8.0);
    let pair_timings = CycleTimings::for_duration(&pair, cycle_time)?;
    let mut sec2 = GateSequence::new(2, pair.j0);
    sec2.gates.extend(compile_section2(&pair, &pair_timings));
    let u2 = oracle::sequence_unitary(&sec2)?;
    let h_pm = oracle::dense_hamiltonian(&HamiltonianTerms::hopping_term(2, pair.j0))?;
    println!(
        "section II vs exp(-i J0 (s+s- + h.c.) dt_II): operator-norm defect {:.3e}",
        oracle::operator_norm(&(u2 - oracle::dense_expm(&h_pm, pair_timings.dt_ii)))
    );
    Ok(())
}
