use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dmrg::{optimize_site_set, Candidate, CandidateSet, DmrgOptions, LocalSolver, SiteSetStrategy};
use crate::error::{Error, Result};

use super::bqp::{big_objective, bit_strings, Witness};
use super::embedding::{embed_point, extract_relaxed};
use super::instance::ReductionInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Exhaustive scan of the binary witnesses, scored by the penalty
    /// objective. Certified.
    Enumerate,
    /// Variational optimization of the free sites followed by rounding.
    Alternating,
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(Self::Enumerate),
            "alternating" => Ok(Self::Alternating),
            other => Err(Error::UnsupportedStrategy(format!("solve mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_rounds: usize,
    pub dmrg: DmrgOptions,
    /// Also contract the full chain at the returned witness.
    pub chain_energy: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { starts: 4, seed: 0, max_rounds: 20, dmrg: DmrgOptions::default(), chain_energy: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub mode: SolveMode,
    pub bits: Vec<u8>,
    /// `b M b^T`.
    pub value: f64,
    /// `value` in the units of the source problem.
    pub original_value: f64,
    /// Penalty objective at the witness of `bits`.
    pub energy: f64,
    pub shortcut: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_energy: Option<f64>,
    /// Lowest chain energy reached by the variational run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variational_energy: Option<f64>,
    /// Continuous variables read from the optimized tensors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxed: Option<(Vec<f64>, Vec<f64>)>,
    pub candidates: usize,
}

pub fn solve_instance(inst: &ReductionInstance, mode: SolveMode, opts: &SolveOptions) -> Result<SolveOutcome> {
    match mode {
        SolveMode::Enumerate => enumerate(inst, opts),
        SolveMode::Alternating => alternating(inst, opts),
    }
}

fn enumerate(inst: &ReductionInstance, opts: &SolveOptions) -> Result<SolveOutcome> {
    let bqp = inst.bqp();
    let k = bqp.vars();
    if k > crate::oracles::BQP_SCAN_CAP {
        return Err(Error::CapExceeded { requested: k, cap: crate::oracles::BQP_SCAN_CAP });
    }
    // ties within rounding of the objective go to the lexicographically first
    let tie = 1e-12 / (2.0 * (k * k) as f64);
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut scanned = 0;
    for bits in bit_strings(k) {
        let w = Witness::from_bits(&bits);
        let f = big_objective(&w.x, &w.y, bqp)?;
        scanned += 1;
        match &best {
            Some((bf, _)) if f >= bf - tie => {}
            _ => best = Some((f, bits)),
        }
    }
    let (_, bits) = best.expect("at least one candidate");
    finish(inst, SolveMode::Enumerate, bits, None, None, scanned, opts)
}

fn alternating(inst: &ReductionInstance, opts: &SolveOptions) -> Result<SolveOutcome> {
    let sites = inst.free_sites();
    let strategy = SiteSetStrategy::Multistart {
        local: LocalSolver::Isometric,
        starts: opts.starts.max(1),
        seed: opts.seed,
        max_rounds: opts.max_rounds,
    };
    let (psi, report) = optimize_site_set(inst.state(), inst.hamiltonian(), &sites, &strategy, &opts.dmrg, None)?;
    let n = inst.n_vars();
    let (x, y) = extract_relaxed(psi.site(sites[0]), psi.site(sites[1]), n);
    let bits: Vec<u8> = x[..n - 1].iter().map(|&t| u8::from(t >= 0.5)).collect();
    finish(inst, SolveMode::Alternating, bits, Some(report.final_energy), Some((x, y)), opts.starts.max(1), opts)
}

fn finish(
    inst: &ReductionInstance,
    mode: SolveMode,
    bits: Vec<u8>,
    variational_energy: Option<f64>,
    relaxed: Option<(Vec<f64>, Vec<f64>)>,
    candidates: usize,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    let bqp = inst.bqp();
    let w = Witness::from_bits(&bits);
    let energy = big_objective(&w.x, &w.y, bqp)?;
    let value = bqp.value(&bits);
    let shortcut = inst.shortcut_energy(&w.x, &w.y)?;
    let chain_energy = if opts.chain_energy {
        Some(inst.state_at_point(&w.x, &w.y)?.energy(inst.hamiltonian())?)
    } else {
        None
    };
    Ok(SolveOutcome {
        mode,
        bits,
        value,
        original_value: bqp.unscaled(value),
        energy,
        shortcut,
        chain_energy,
        variational_energy,
        relaxed,
        candidates,
    })
}

/// The binary witnesses as assignments of the two free sites, scored by
/// the penalty objective.
impl CandidateSet for ReductionInstance {
    fn free_sites(&self) -> Vec<usize> {
        ReductionInstance::free_sites(self).to_vec()
    }

    fn candidates(&self) -> Result<Vec<Candidate>> {
        let n = self.n_vars();
        bit_strings(n - 1)
            .map(|bits| {
                let w = Witness::from_bits(&bits);
                let (a3, a5) = embed_point(&w.x, &w.y, n)?;
                Ok(Candidate { label: bits, tensors: vec![a3, a5] })
            })
            .collect()
    }

    fn score(&self, candidate: &Candidate, _chain_energy: f64) -> Result<f64> {
        let w = Witness::from_bits(&candidate.label);
        big_objective(&w.x, &w.y, self.bqp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{assemble_instance, AssemblyOptions, BqpInstance};

    #[test]
    fn enumerate_small_cases() {
        let inst = assemble_instance(&BqpInstance::from_rows(&[vec![-1.0]]).unwrap(), &AssemblyOptions::default()).unwrap();
        let out = solve_instance(&inst, SolveMode::Enumerate, &SolveOptions::default()).unwrap();
        assert_eq!(out.bits, vec![1]);
        assert_eq!(out.value, -1.0);
        let tied = BqpInstance::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let inst = assemble_instance(&tied, &AssemblyOptions::default()).unwrap();
        let out = solve_instance(&inst, SolveMode::Enumerate, &SolveOptions::default()).unwrap();
        assert_eq!(out.bits, vec![0, 0]);
        assert_eq!(out.value, 0.0);
        assert_eq!(out.energy, -3.0);
    }

    #[test]
    fn alternating_is_never_below_enumerate() {
        let bqp = BqpInstance::from_rows(&[vec![0.2, -0.9], vec![-0.9, 0.4]]).unwrap();
        let inst = assemble_instance(&bqp, &AssemblyOptions::default()).unwrap();
        let opts = SolveOptions { starts: 2, max_rounds: 4, ..Default::default() };
        let e = solve_instance(&inst, SolveMode::Enumerate, &opts).unwrap();
        let a = solve_instance(&inst, SolveMode::Alternating, &opts).unwrap();
        assert!(a.energy >= e.energy - 1e-12);
        assert!(a.variational_energy.is_some());
    }

    #[test]
    fn modes_parse() {
        assert_eq!("alternating".parse::<SolveMode>().unwrap(), SolveMode::Alternating);
        assert!(matches!("anneal".parse::<SolveMode>(), Err(Error::UnsupportedStrategy(_))));
    }
}
