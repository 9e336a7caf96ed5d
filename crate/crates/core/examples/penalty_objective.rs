//! The continuous penalty objective and its binary minimizers, with a grid
//! scan showing nothing on the grid does better.

use mpshl::oracles::{bqp_min, grid_min_big};
use mpshl::reduction::{big_minimum, BqpInstance};

fn main() -> mpshl::Result<()> {
    let bqp = BqpInstance::from_rows(&[vec![0.5, -1.0], vec![-1.0, 0.25]])?;
    let exact = bqp_min(&bqp)?;
    println!("min b M b^T = {} at {:?}", exact.value, exact.argmins);

    let big = big_minimum(&bqp)?;
    println!("min f = {} (binary part {})", big.value, big.binary_minimum);
    for w in &big.witnesses {
        println!("  witness x={:?} y={:?}", w.x, w.y);
    }
    let grid = grid_min_big(&bqp, 6, 1e-9)?;
    println!("grid of {} points: min {} at x={:?} y={:?}", grid.points, grid.value, grid.x, grid.y);
    Ok(())
}
