//! Compiles a BQP into a chain and prints its layout and per-window energies
//! at a binary witness.

use mpshl::oracles::windows_decomposition_check;
use mpshl::reduction::{assemble_instance, AssemblyOptions, BqpInstance, Witness};

fn main() -> mpshl::Result<()> {
    let bqp = BqpInstance::from_rows(&[vec![-0.5, 1.0], vec![1.0, -0.75]])?;
    let inst = assemble_instance(&bqp, &AssemblyOptions::default())?;
    let l = inst.layout();
    println!("N={} D={} m={} n={} kappa={:.6} gamma={}", l.n_vars, l.dim, l.m, l.sites, inst.kappa(), inst.gamma());
    println!("free sites {:?}, worst fixed residual {:?}", inst.free_sites(), inst.worst_fixed_site());

    let w = Witness::from_bits(&[1, 0]);
    let psi = inst.state_at_point(&w.x, &w.y)?;
    println!("energy at b=10: {:.12}", psi.energy(inst.hamiltonian())?);
    for win in inst.profile_of(&psi)?.iter().filter(|w| w.energy.abs() > 1e-14) {
        println!("  window {:>2} {:?}: {:.3e}", win.start, win.kind, win.energy);
    }

    let report = windows_decomposition_check(&inst, 8, 0)?;
    println!("findings {}", report.payload["findings"]);
    Ok(())
}
