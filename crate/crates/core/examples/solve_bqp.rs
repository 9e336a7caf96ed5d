//! Certified enumeration and the variational solver on the same instance.

use mpshl::reduction::{assemble_instance, solve_instance, AssemblyOptions, BqpInstance, SolveMode, SolveOptions};

fn main() -> mpshl::Result<()> {
    let bqp = BqpInstance::from_rows(&[
        vec![0.3, -0.8, 0.1],
        vec![-0.8, 0.2, 0.6],
        vec![0.1, 0.6, -0.4],
    ])?;
    let inst = assemble_instance(&bqp, &AssemblyOptions::default())?;
    let opts = SolveOptions { starts: 3, max_rounds: 10, ..Default::default() };
    for mode in [SolveMode::Enumerate, SolveMode::Alternating] {
        let out = solve_instance(&inst, mode, &opts)?;
        println!(
            "{mode:?}: b={:?} value={:.4} objective={:.6} chain energy={:?} variational={:?}",
            out.bits, out.value, out.energy, out.chain_energy, out.variational_energy
        );
    }
    Ok(())
}
