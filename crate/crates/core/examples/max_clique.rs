//! DIMACS graph to maximum clique through the reduction.

use mpshl::frontends::{clique_to_bqp, parse_dimacs};
use mpshl::reduction::{assemble_instance, solve_instance, AssemblyOptions, SolveMode, SolveOptions};

const BOWTIE: &str = "c two triangles sharing vertex 3
p edge 5 6
e 1 2
e 2 3
e 1 3
e 3 4
e 4 5
e 3 5
";

fn main() -> mpshl::Result<()> {
    let parsed = parse_dimacs(BOWTIE)?;
    let g = &parsed.graph;
    let bqp = clique_to_bqp(g, 2.0)?;
    let inst = assemble_instance(&bqp, &AssemblyOptions::default())?;
    let out = solve_instance(&inst, SolveMode::Enumerate, &SolveOptions::default())?;
    let members: Vec<usize> = out.bits.iter().enumerate().filter(|(_, b)| **b == 1).map(|(i, _)| i + 1).collect();
    println!("{} vertices, {} edges, chain of {} sites", g.vertices(), g.edge_count(), inst.layout().sites);
    println!("clique {members:?} (size {}), is clique: {}", members.len(), g.is_clique(&out.bits));
    Ok(())
}
