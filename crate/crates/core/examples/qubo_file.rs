//! Reads a QUBO in triplet form and solves it.

use mpshl::frontends::parse_qubo;
use mpshl::oracles::bqp_min;

const TEXT: &str = "# 1-based i j value
p qubo 3
1 1 -3
2 2 -2
3 3 -1
1 2 4
2 3 -1
";

fn main() -> mpshl::Result<()> {
    let bqp = parse_qubo(TEXT)?;
    println!("normalized M (scale {}):\n{}", bqp.scale(), bqp.matrix());
    let best = bqp_min(&bqp)?;
    println!("min {} (original units {}) at {:?}", best.value, bqp.unscaled(best.value), best.argmins);
    Ok(())
}
