//! Restricting the variation to a few sites, with the two local solvers and
//! random restarts.

use mpshl::dmrg::{optimize_site_set, DmrgOptions, LocalSolver, SiteSetStrategy};
use mpshl::hamiltonian::ChainHamiltonian;
use mpshl::mps::{capped_profile, random_mps};

fn main() -> mpshl::Result<()> {
    let n = 8;
    let h = ChainHamiltonian::tfi(n, 1.0, false)?;
    let psi = random_mps(n, 2, &capped_profile(n, 2, 4), 3)?.left_canonicalize()?;
    let sites = [2, 5];
    println!("start energy {:.10}", psi.energy(&h)?);
    let strategies = [
        SiteSetStrategy::Alternating { local: LocalSolver::Eigen, max_rounds: 20 },
        SiteSetStrategy::Alternating { local: LocalSolver::Isometric, max_rounds: 20 },
        SiteSetStrategy::Multistart { local: LocalSolver::Isometric, starts: 6, seed: 9, max_rounds: 20 },
    ];
    for s in &strategies {
        let (_, rep) = optimize_site_set(&psi, &h, &sites, s, &DmrgOptions::default(), None)?;
        println!("{:<12} rounds {:>2} energy {:.10} best start {:?}", rep.strategy, rep.rounds, rep.final_energy, rep.best_start);
    }
    Ok(())
}
