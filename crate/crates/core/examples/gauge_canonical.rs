//! Random MPS brought into left, right and mixed canonical form.

use mpshl::mps::{capped_profile, random_mps};

fn main() -> mpshl::Result<()> {
    let (n, d, bond) = (12, 3, 8);
    let psi = random_mps(n, d, &capped_profile(n, d, bond), 42)?;
    println!("bonds {:?}, norm {:.6e}", psi.bond_profile(), psi.norm());

    let left = psi.left_canonicalize()?;
    let worst = left.gauge_residuals().into_iter().fold(0.0, f64::max);
    println!("left canonical: norm {:.15}, max gauge residual {worst:.2e}", left.norm());

    let right = psi.right_canonicalize()?;
    let mixed = psi.mixed_canonical(n / 2)?;
    println!("|<left|right>| = {:.15}", left.overlap(&right)?.norm());
    println!("mixed centre {:?}, norm {:.6e}", mixed.orthogonality_center(), mixed.norm());
    Ok(())
}
