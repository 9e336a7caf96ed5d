//! Single-site sweeps on the transverse-field Ising chain, checked against
//! exact diagonalization.

use mpshl::dmrg::{sweep, DmrgOptions};
use mpshl::hamiltonian::ChainHamiltonian;
use mpshl::mps::{capped_profile, random_mps};
use mpshl::oracles::dense_ground_energy;

fn main() -> mpshl::Result<()> {
    let n = 10;
    for g in [0.5, 1.0, 1.5] {
        let h = ChainHamiltonian::tfi(n, g, true)?;
        let exact = dense_ground_energy(&h, 1 << 12)?;
        for bond in [2, 4, 16] {
            let psi = random_mps(n, 2, &capped_profile(n, 2, bond), 1)?;
            let (_, rep) = sweep(&psi, &h, &DmrgOptions { max_sweeps: 20, ..Default::default() })?;
            println!(
                "g={g:.1} D={bond:>2}: E={:.12} error {:.2e} sweeps {} max increase {:.1e}",
                rep.final_energy,
                rep.final_energy - exact,
                rep.sweeps,
                rep.max_increase()
            );
        }
    }
    // two sites with the boundary fields: -sqrt(5)
    let h = ChainHamiltonian::tfi(2, 1.0, true)?;
    let (_, rep) = sweep(&random_mps(2, 2, &[1, 2, 1], 0)?, &h, &DmrgOptions::default())?;
    println!("n=2: {:.15} vs {:.15}", rep.final_energy, -(5f64.sqrt()));
    Ok(())
}
