pub mod cli;
pub mod dmrg;
pub mod error;
pub mod frontends;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod mpo;
pub mod mps;
pub mod oracles;
pub mod reduction;

pub use error::{Error, Result};
