//! Writes an instance to JSON, reads it back and compares.

use mpshl::io::{read_instance, write_instance};
use mpshl::reduction::{assemble_instance, AssemblyOptions, BqpInstance};

fn main() -> mpshl::Result<()> {
    let bqp = BqpInstance::from_rows(&[vec![-1.0 / 3.0]])?;
    let inst = assemble_instance(&bqp, &AssemblyOptions::default())?;
    let path = std::env::temp_dir().join("mpshl_example_instance.json");
    write_instance(&path, &inst)?;
    let back = read_instance(&path)?;
    println!("{} bytes at {}", std::fs::metadata(&path)?.len(), path.display());
    println!("tensors equal: {}", back.state() == inst.state());
    println!("hamiltonian equal: {}", back.hamiltonian() == inst.hamiltonian());
    println!("M equal: {}", back.bqp().matrix() == inst.bqp().matrix());
    std::fs::remove_file(&path)?;
    Ok(())
}
